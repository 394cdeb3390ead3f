//! Banded linear systems solved by Gaussian elimination with partial pivoting.

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum BandError {
    #[error("singular band matrix at column {0}")]
    Singular(usize),
    #[error("entry ({0}, {1}) outside the declared band")]
    OutOfBand(usize, usize),
}

/// Row `i` stores columns `i-kl ..= i+kl+ku`; the extra `kl` columns hold
/// pivoting fill-in.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    w: usize,
    a: Vec<f64>,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> BandMatrix {
        let w = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, w, a: vec![0.0; n * w] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.w + (j + self.kl - i)
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) -> Result<(), BandError> {
        if j + self.kl < i || j > i + self.ku || j >= self.n {
            return Err(BandError::OutOfBand(i, j));
        }
        let k = self.idx(i, j);
        self.a[k] = v;
        Ok(())
    }

    /// `A x = b`.
    pub fn solve(mut self, mut b: Vec<f64>) -> Result<Vec<f64>, BandError> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let right = (k + kl + ku).min(n - 1);
            let mut p = k;
            let mut best = self.a[self.idx(k, k)].abs();
            for i in k + 1..=last {
                let v = self.a[self.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(BandError::Singular(k));
            }
            if p != k {
                for j in k..=right {
                    let (x, y) = (self.idx(k, j), self.idx(p, j));
                    self.a.swap(x, y);
                }
                b.swap(k, p);
            }
            let piv = self.a[self.idx(k, k)];
            for i in k + 1..=last {
                let ik = self.idx(i, k);
                let m = self.a[ik] / piv;
                if m == 0.0 {
                    continue;
                }
                self.a[ik] = 0.0;
                for j in k + 1..=right {
                    let (ij, kj) = (self.idx(i, j), self.idx(k, j));
                    self.a[ij] -= m * self.a[kj];
                }
                b[i] -= m * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let right = (i + kl + ku).min(n - 1);
            let mut s = b[i];
            for (j, xj) in x.iter().enumerate().take(right + 1).skip(i + 1) {
                s -= self.a[self.idx(i, j)] * xj;
            }
            x[i] = s / self.a[self.idx(i, i)];
        }
        Ok(x)
    }
}
