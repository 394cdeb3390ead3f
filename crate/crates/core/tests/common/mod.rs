//! Independent oracles shared by the integration tests and the acceptance gate.
#![allow(dead_code)]

use g2cone::calculus::Calculus;
use g2cone::cone::eta_variation;
use g2cone::forms::{phi7, slots_of, Form};
use g2cone::obstruction::pairing_form;
use g2cone::poly::{Var, NVARS};
use g2cone::spectral_ode::{solve_mode, weighted_norm, GridFunction, Kind, ModeSpec, SolveOptions};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---- finite-difference two-point boundary-value oracle ----

/// `Σ_k coeffs[k] u^{(k)}` at one end of the interval equals `value`.
#[derive(Clone, Debug)]
pub struct EndCondition {
    pub at_right: bool,
    pub coeffs: Vec<f64>,
    pub value: f64,
}

fn left(coeffs: &[f64], value: f64) -> EndCondition {
    EndCondition { at_right: false, coeffs: coeffs.to_vec(), value }
}

fn right(coeffs: &[f64]) -> EndCondition {
    EndCondition { at_right: true, coeffs: coeffs.to_vec(), value: 0.0 }
}

/// Weights `w` with `Σ_j w_j p(offsets_j h) ≈ h^k p^{(k)}(0)`, from a
/// Vandermonde solve.
pub fn stencil(offsets: &[f64], k: usize) -> Vec<f64> {
    let n = offsets.len();
    let mut fact = 1.0;
    let m = DMatrix::from_fn(n, n, |p, j| offsets[j].powi(p as i32));
    let mut rhs = DVector::zeros(n);
    for p in 1..=k {
        fact *= p as f64;
    }
    rhs[k] = fact;
    m.lu().solve(&rhs).expect("distinct nodes").iter().copied().collect()
}

/// Gaussian elimination with partial pivoting on a sparse row list whose
/// nonzeros lie in a band.
pub fn solve_banded(rows: &[Vec<(usize, f64)>], mut b: Vec<f64>) -> Vec<f64> {
    let n = rows.len();
    let (mut kl, mut ku) = (0usize, 0usize);
    for (i, r) in rows.iter().enumerate() {
        for &(j, _) in r {
            if j < i {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
    }
    let w = 2 * kl + ku + 1;
    let at = |i: usize, j: usize| i * w + j + kl - i;
    let mut a = vec![0.0; n * w];
    for (i, r) in rows.iter().enumerate() {
        for &(j, v) in r {
            a[at(i, j)] += v;
        }
    }
    for k in 0..n {
        let last = (k + kl).min(n - 1);
        let right = (k + kl + ku).min(n - 1);
        let p = (k..=last).max_by(|&x, &y| a[at(x, k)].abs().total_cmp(&a[at(y, k)].abs())).unwrap();
        assert!(a[at(p, k)] != 0.0, "singular oracle matrix at {k}");
        if p != k {
            for j in k..=right {
                a.swap(at(k, j), at(p, j));
            }
            b.swap(k, p);
        }
        for i in k + 1..=last {
            let m = a[at(i, k)] / a[at(k, k)];
            if m != 0.0 {
                for j in k..=right {
                    a[at(i, j)] -= m * a[at(k, j)];
                }
                b[i] -= m * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let right = (i + kl + ku).min(n - 1);
        let s: f64 = (i + 1..=right).map(|j| a[at(i, j)] * x[j]).sum();
        x[i] = (b[i] - s) / a[at(i, i)];
    }
    x
}

/// Solves `Σ_k op[k] u^{(k)} = f` on the grid with second-order central
/// differences and one-sided end conditions; `op.len() − 1` conditions.
pub fn fd_bvp(op: &[f64], f: &[f64], h: f64, ends: &[EndCondition]) -> Vec<f64> {
    let n = f.len();
    let order = op.len() - 1;
    let m = order.div_ceil(2);
    assert_eq!(ends.len(), 2 * m);
    let nl = ends.iter().filter(|e| !e.at_right).count();
    let central: Vec<f64> = (-(m as i64)..=m as i64).map(|x| x as f64).collect();
    let mut interior = vec![0.0; 2 * m + 1];
    for (k, c) in op.iter().enumerate() {
        for (j, w) in stencil(&central, k).iter().enumerate() {
            interior[j] += c * w / h.powi(k as i32);
        }
    }
    let one_sided = |e: &EndCondition| -> Vec<(usize, f64)> {
        let p = e.coeffs.len() + 3;
        let offs: Vec<f64> = (0..p).map(|j| if e.at_right { -(j as f64) } else { j as f64 }).collect();
        let mut w = vec![0.0; p];
        for (k, c) in e.coeffs.iter().enumerate() {
            for (j, s) in stencil(&offs, k).iter().enumerate() {
                w[j] += c * s / h.powi(k as i32);
            }
        }
        w.into_iter().enumerate().map(|(j, v)| (if e.at_right { n - 1 - j } else { j }, v)).collect()
    };
    let mut rows = Vec::with_capacity(n);
    let mut rhs = Vec::with_capacity(n);
    for e in ends.iter().filter(|e| !e.at_right) {
        rows.push(one_sided(e));
        rhs.push(e.value);
    }
    for i in m..n - m {
        rows.push(interior.iter().enumerate().map(|(j, w)| (i + j - m, *w)).collect());
        rhs.push(f[i]);
    }
    for e in ends.iter().filter(|e| e.at_right) {
        rows.push(one_sided(e));
        rhs.push(e.value);
    }
    assert_eq!(rows.len(), n, "{nl} left conditions");
    solve_banded(&rows, rhs)
}

fn decaying_root(c: f64) -> f64 {
    (7.0 - (49.0 + 4.0 * c).sqrt()) / 2.0
}

/// `(μ − D² + 7D)u = f`; `−9u(0) + u'(0) = G` when given, `u(0) = 0` otherwise.
pub fn oracle_step3(mu: f64, f: &[f64], h: f64, bc: Option<f64>) -> Vec<f64> {
    let rm = decaying_root(mu);
    assert!(rm < 0.0);
    let l = match bc {
        Some(g) => left(&[-9.0, 1.0], g),
        None => left(&[1.0], 0.0),
    };
    fd_bvp(&[mu, 7.0, -1.0], f, h, &[l, right(&[-rm, 1.0])])
}

/// `(D² − 7D − λ + 12)w = f` with no growing component at the right end.
pub fn oracle_step5(lambda: f64, f: &[f64], h: f64) -> Vec<f64> {
    let c = lambda - 12.0;
    let rm = decaying_root(c);
    let ends = if rm < 0.0 {
        vec![left(&[1.0], 0.0), right(&[-rm, 1.0])]
    } else {
        vec![right(&[1.0]), right(&[0.0, 1.0])]
    };
    fd_bvp(&[-c, -7.0, 1.0], f, h, &ends)
}

/// `¼(P − c₊)(P − c₋)w = f` with `P = D² − 7D`,
/// `(λ−18)w(0) − w''(0) + 9w'(0) = datum`, and the growing components
/// (after removing the decaying exponentials) zero at the right end. For
/// `λ > 18` the second decaying mode is fixed by `(P − c₊)w(0) = 0`.
pub fn oracle_step4(lambda: f64, f: &[f64], h: f64, datum: f64) -> Vec<f64> {
    let s = (4.0 * lambda + 9.0).sqrt();
    let (cp, cm) = (lambda - 9.0 + s, lambda - 9.0 - s);
    let (gp, gm) = ((s - 5.0) / 2.0, (s - 9.0) / 2.0);
    let op: Vec<f64> = [cp * cm, 14.0 * (lambda - 9.0), 49.0 - 2.0 * (lambda - 9.0), -14.0, 1.0]
        .iter()
        .map(|x| x / 4.0)
        .collect();
    let mut ends = vec![left(&[lambda - 18.0, 9.0, -1.0], datum)];
    if lambda > 18.0 {
        ends.push(left(&[-cp, -7.0, 1.0], 0.0));
        ends.push(right(&[gp * gm, gp + gm, 1.0]));
        ends.push(right(&[0.0, gp * gm, gp + gm, 1.0]));
    } else {
        ends.push(right(&[gp, 1.0]));
        ends.push(right(&[0.0, gp, 1.0]));
        ends.push(right(&[0.0, 0.0, gp, 1.0]));
    }
    fd_bvp(&op, f, h, &ends)
}

/// Smooth forcing `Σ a(1 + ct)e^{−bt}cos(ωt + φ)` with three random terms.
pub fn random_forcing(seed: u64, h: f64, tmax: f64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<[f64; 5]> = (0..3)
        .map(|_| {
            [
                rng.random_range(-1.0..1.0),
                rng.random_range(0.0..1.0),
                rng.random_range(1.0..2.0),
                rng.random_range(0.0..3.0),
                rng.random_range(0.0..std::f64::consts::TAU),
            ]
        })
        .collect();
    GridFunction::from_fn(h, GridFunction::points_for(tmax, h), |t| {
        terms.iter().map(|[a, c, b, w, p]| a * (1.0 + c * t) * (-b * t).exp() * (w * t + p).cos()).sum()
    })
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Prefix of `u` covering `[0, len)`.
pub fn prefix(u: &GridFunction, len: f64) -> GridFunction {
    let n = GridFunction::points_for(len, u.delta);
    GridFunction { delta: u.delta, comps: u.comps.iter().map(|c| c[..n].to_vec()).collect() }
}

/// `‖u‖_q / ‖f‖_q` for `f = (T+t)^{−q} cos t`, measured away from the
/// truncated right end.
pub fn norm_constant(kind: Kind, lambda: f64, t0: f64, q: f64) -> f64 {
    let (h, len) = (0.02, 160.0);
    let f = GridFunction::from_fn(h, GridFunction::points_for(len, h), |t| (t0 + t).powf(-q) * t.cos());
    let opts = SolveOptions { tail_tol: None };
    let u = solve_mode(ModeSpec::new(lambda, kind).unwrap(), &f, None, &opts).unwrap();
    weighted_norm(&prefix(&u, 120.0), q, t0) / weighted_norm(&prefix(&f, 120.0), q, t0)
}

// ---- dense-tensor evaluation of the cubic integrand ----

type T3 = Vec<f64>;

fn idx3(a: usize, b: usize, c: usize) -> usize {
    (a * 7 + b) * 7 + c
}

/// Fully antisymmetric component array of a cone-frame 3-form at a point.
fn tensor3(f: &Form, vals: &[f64; NVARS]) -> T3 {
    let mut t = vec![0.0; 343];
    for (mask, v) in f.eval_f64(vals) {
        let s = slots_of(mask);
        assert_eq!(s.len(), 3);
        let (a, b, c) = (s[0], s[1], s[2]);
        for (p, sign) in [((a, b, c), 1.0), ((b, c, a), 1.0), ((c, a, b), 1.0), ((b, a, c), -1.0), ((a, c, b), -1.0), ((c, b, a), -1.0)] {
            t[idx3(p.0, p.1, p.2)] += sign * v;
        }
    }
    t
}

fn permutations7() -> Vec<([usize; 7], f64)> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool; 7], out: &mut Vec<([usize; 7], f64)>) {
        if cur.len() == 7 {
            let mut p = [0; 7];
            p.copy_from_slice(cur);
            let inv = (0..7).flat_map(|i| (i + 1..7).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
            out.push((p, if inv % 2 == 0 { 1.0 } else { -1.0 }));
            return;
        }
        for k in 0..7 {
            if !used[k] {
                used[k] = true;
                cur.push(k);
                rec(cur, used, out);
                cur.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::with_capacity(5040);
    rec(&mut Vec::new(), &mut [false; 7], &mut out);
    out
}

/// `B_ij = ψ_{iab}ψ_{jcd}ψ_{efg}ε^{abcdefg}/144`.
fn b_matrix(psi: &T3, perms: &[([usize; 7], f64)]) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(7, 7);
    for i in 0..7 {
        for j in i..7 {
            let mut acc = 0.0;
            for (p, sg) in perms {
                let x = psi[idx3(i, p[0], p[1])];
                if x == 0.0 {
                    continue;
                }
                acc += sg * x * psi[idx3(j, p[2], p[3])] * psi[idx3(p[4], p[5], p[6])];
            }
            b[(i, j)] = acc / 144.0;
            b[(j, i)] = acc / 144.0;
        }
    }
    b
}

/// `(φ + sψ₁, β)_{g(s)} · vol_{g(s)}/vol₀` with `g = B det(B)^{−1/9}`.
fn pairing_at(phi: &T3, psi1: &T3, beta: &T3, s: f64, perms: &[([usize; 7], f64)]) -> f64 {
    let psi: T3 = phi.iter().zip(psi1).map(|(a, b)| a + s * b).collect();
    let b = b_matrix(&psi, perms);
    let det = b.determinant();
    let ginv = b.try_inverse().expect("nondegenerate") * det.powf(1.0 / 9.0);
    let mut acc = 0.0;
    for a in 0..7 {
        for bb in 0..7 {
            for c in 0..7 {
                let x = psi[idx3(a, bb, c)];
                if x == 0.0 {
                    continue;
                }
                for a2 in 0..7 {
                    for b2 in 0..7 {
                        let gg = ginv[(a, a2)] * ginv[(bb, b2)];
                        for c2 in 0..7 {
                            acc += x * gg * ginv[(c, c2)] * beta[idx3(a2, b2, c2)];
                        }
                    }
                }
            }
        }
    }
    acc / 6.0 * det.powf(1.0 / 9.0)
}

/// Coordinates `(v1, v2, x1..x6)` as a full variable vector.
pub fn point(v1: f64, v2: f64, x: [f64; 6]) -> [f64; NVARS] {
    let mut vals = [0.0; NVARS];
    vals[Var::V1.index()] = v1;
    vals[Var::V2.index()] = v2;
    for (k, xk) in x.iter().enumerate() {
        vals[Var::X(k as u8 + 1).index()] = *xk;
    }
    vals
}

/// The `s²` coefficient of the pairing, by a five-point second difference
/// of the dense-tensor evaluation.
pub fn cubic_oracle(calc: &Calculus, vals: &[f64; NVARS]) -> f64 {
    let perms = permutations7();
    let phi = tensor3(&phi7(), vals);
    let psi1 = tensor3(&eta_variation(calc), vals);
    let beta = tensor3(&pairing_form(calc), vals);
    let h = 1e-3;
    let f = |s: f64| pairing_at(&phi, &psi1, &beta, s, &perms);
    let d2 = (-f(2.0 * h) + 16.0 * f(h) - 30.0 * f(0.0) + 16.0 * f(-h) - f(-2.0 * h)) / (12.0 * h * h);
    d2 / 2.0
}
