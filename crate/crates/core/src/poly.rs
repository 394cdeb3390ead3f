//! Exact multivariate polynomials over the rationals.
//!
//! Variables are the coordinate functions `v1, v2, x1..x6`, the deformation
//! parameter `s`, the radial weight `a` and a pool of free symbols `b1..b24`
//! used for generic coefficients. `v3` is not a variable: it is always
//! rewritten as `-v1 - v2`, so canonical form already encodes `v1+v2+v3 = 0`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

/// Number of free symbols `b1..bN`.
pub const NUM_FREE: usize = 24;
pub const NVARS: usize = 10 + NUM_FREE;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    V1,
    V2,
    /// `x_i` for i in 1..=6.
    X(u8),
    S,
    A,
    /// Free symbol `b_i` for i in 1..=NUM_FREE.
    B(u8),
}

impl Var {
    pub fn index(self) -> usize {
        match self {
            Var::V1 => 0,
            Var::V2 => 1,
            Var::X(i) => {
                assert!((1..=6).contains(&i), "x index out of range");
                1 + i as usize
            }
            Var::S => 8,
            Var::A => 9,
            Var::B(i) => {
                assert!((1..=NUM_FREE as u8).contains(&i), "free symbol index out of range");
                9 + i as usize
            }
        }
    }

    pub fn from_index(i: usize) -> Var {
        match i {
            0 => Var::V1,
            1 => Var::V2,
            2..=7 => Var::X((i - 1) as u8),
            8 => Var::S,
            9 => Var::A,
            _ => Var::B((i - 9) as u8),
        }
    }

    pub fn name(self) -> String {
        match self {
            Var::V1 => "v1".into(),
            Var::V2 => "v2".into(),
            Var::X(i) => format!("x{i}"),
            Var::S => "s".into(),
            Var::A => "a".into(),
            Var::B(i) => format!("b{i}"),
        }
    }

    /// The eight coordinate variables on which left-invariant derivations act.
    pub fn coordinates() -> [Var; 8] {
        [
            Var::V1,
            Var::V2,
            Var::X(1),
            Var::X(2),
            Var::X(3),
            Var::X(4),
            Var::X(5),
            Var::X(6),
        ]
    }
}

pub type Mono = [u8; NVARS];

/// Sparse polynomial; the map never stores zero coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Mono, Q>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { terms: BTreeMap::new() }
    }

    pub fn one() -> Poly {
        Poly::constant(Q::one())
    }

    pub fn constant(c: Q) -> Poly {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert([0; NVARS], c);
        }
        p
    }

    pub fn int(n: i64) -> Poly {
        Poly::constant(q(n))
    }

    pub fn rat(n: i64, d: i64) -> Poly {
        Poly::constant(qf(n, d))
    }

    pub fn var(v: Var) -> Poly {
        let mut m = [0; NVARS];
        m[v.index()] = 1;
        let mut p = Poly::zero();
        p.terms.insert(m, Q::one());
        p
    }

    pub fn v(i: u8) -> Poly {
        match i {
            1 => Poly::var(Var::V1),
            2 => Poly::var(Var::V2),
            3 => -(Poly::var(Var::V1) + Poly::var(Var::V2)),
            _ => panic!("v index out of range"),
        }
    }

    pub fn x(i: u8) -> Poly {
        Poly::var(Var::X(i))
    }

    pub fn b(i: u8) -> Poly {
        Poly::var(Var::B(i))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Q)> {
        self.terms.iter()
    }

    pub fn from_terms<I: IntoIterator<Item = (Mono, Q)>>(it: I) -> Poly {
        let mut p = Poly::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Mono, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(e) => {
                *e += c;
                if e.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    /// The constant term if the polynomial is constant.
    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                if m.iter().all(|&e| e == 0) {
                    Some(c.clone())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, k)| (*m, k * c)).collect(),
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.iter().map(|&e| e as u32).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn degree_in(&self, v: Var) -> u32 {
        let i = v.index();
        self.terms.keys().map(|m| m[i] as u32).max().unwrap_or(0)
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut r = Poly::one();
        for _ in 0..n {
            r = &r * self;
        }
        r
    }

    pub fn derivative(&self, v: Var) -> Poly {
        let i = v.index();
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            if m[i] > 0 {
                let mut m2 = *m;
                m2[i] -= 1;
                out.add_term(m2, c * q(m[i] as i64));
            }
        }
        out
    }

    /// Coefficient of `v^k`, as a polynomial in the remaining variables.
    pub fn coeff(&self, v: Var, k: u8) -> Poly {
        let i = v.index();
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            if m[i] == k {
                let mut m2 = *m;
                m2[i] = 0;
                out.add_term(m2, c.clone());
            }
        }
        out
    }

    /// Drops every term whose degree in `v` exceeds `max`.
    pub fn truncate(&self, v: Var, max: u8) -> Poly {
        let i = v.index();
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m[i] <= max)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// Substitutes polynomials for variables simultaneously.
    pub fn substitute(&self, subs: &[(Var, Poly)]) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut base = [0u8; NVARS];
            let mut term = Poly::one();
            for (i, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let var = Var::from_index(i);
                match subs.iter().find(|(v, _)| *v == var) {
                    Some((_, p)) => term = &term * &p.pow(e as u32),
                    None => base[i] = e,
                }
            }
            let mut mono = Poly::zero();
            mono.terms.insert(base, c.clone());
            out += &(&mono * &term);
        }
        out
    }

    /// Evaluates with `vals[i]` assigned to the variable of index `i`.
    pub fn eval_f64(&self, vals: &[f64; NVARS]) -> f64 {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64().unwrap_or(f64::NAN);
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    t *= vals[i].powi(e as i32);
                }
            }
            acc += t;
        }
        acc
    }

    /// Exact evaluation at rational values; unassigned variables stay symbolic.
    pub fn eval_partial(&self, vals: &[(Var, Q)]) -> Poly {
        let subs: Vec<(Var, Poly)> = vals
            .iter()
            .map(|(v, c)| (*v, Poly::constant(c.clone())))
            .collect();
        self.substitute(&subs)
    }

    pub fn uses_only(&self, allowed: &[Var]) -> bool {
        let idx: Vec<usize> = allowed.iter().map(|v| v.index()).collect();
        self.terms
            .keys()
            .all(|m| m.iter().enumerate().all(|(i, &e)| e == 0 || idx.contains(&i)))
    }

    /// Parses the text syntax produced by `Display` (and a little more:
    /// parentheses, `v3`, and implicit products are not accepted, `*` is required).
    pub fn parse(src: &str) -> Result<Poly, String> {
        let mut p = Parser { s: src.as_bytes(), i: 0 };
        let r = p.expr()?;
        p.ws();
        if p.i != p.s.len() {
            return Err(format!("trailing input at byte {} in {src:?}", p.i));
        }
        Ok(r)
    }
}

struct Parser<'a> {
    s: &'a [u8],
    i: usize,
}

impl Parser<'_> {
    fn ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.i).copied()
    }

    fn expr(&mut self) -> Result<Poly, String> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.i += 1;
                -self.term()?
            }
            Some(b'+') => {
                self.i += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.i += 1;
                    acc += &self.term()?;
                }
                Some(b'-') => {
                    self.i += 1;
                    acc -= &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly, String> {
        let mut acc = self.power()?;
        while self.peek() == Some(b'*') {
            self.i += 1;
            acc = &acc * &self.power()?;
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<Poly, String> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.i += 1;
            let n = self.uint()?;
            return Ok(base.pow(n as u32));
        }
        Ok(base)
    }

    fn uint(&mut self) -> Result<u64, String> {
        self.ws();
        let start = self.i;
        while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
            self.i += 1;
        }
        if start == self.i {
            return Err(format!("expected integer at byte {start}"));
        }
        std::str::from_utf8(&self.s[start..self.i])
            .unwrap()
            .parse()
            .map_err(|e| format!("{e}"))
    }

    fn atom(&mut self) -> Result<Poly, String> {
        match self.peek() {
            Some(b'(') => {
                self.i += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err("missing ')'".into());
                }
                self.i += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.uint()?;
                if self.s.get(self.i) == Some(&b'/') {
                    self.i += 1;
                    let d = self.uint()?;
                    Ok(Poly::constant(Q::new(BigInt::from(n), BigInt::from(d))))
                } else {
                    Ok(Poly::constant(Q::from_integer(BigInt::from(n))))
                }
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.i;
                self.i += 1;
                while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
                    self.i += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.i]).unwrap();
                let idx = |t: &str| t.parse::<u8>().map_err(|e| format!("{name}: {e}"));
                match (&name[..1], &name[1..]) {
                    ("v", "1") => Ok(Poly::v(1)),
                    ("v", "2") => Ok(Poly::v(2)),
                    ("v", "3") => Ok(Poly::v(3)),
                    ("x", t) => {
                        let i = idx(t)?;
                        if !(1..=6).contains(&i) {
                            return Err(format!("unknown variable {name}"));
                        }
                        Ok(Poly::x(i))
                    }
                    ("b", t) => {
                        let i = idx(t)?;
                        if !(1..=NUM_FREE as u8).contains(&i) {
                            return Err(format!("unknown variable {name}"));
                        }
                        Ok(Poly::b(i))
                    }
                    ("s", "") => Ok(Poly::var(Var::S)),
                    ("a", "") => Ok(Poly::var(Var::A)),
                    _ => Err(format!("unknown variable {name}")),
                }
            }
            other => Err(format!("unexpected {:?} at byte {}", other.map(|c| c as char), self.i)),
        }
    }
}

fn fmt_mono(m: &Mono) -> String {
    let mut parts = Vec::new();
    for (i, &e) in m.iter().enumerate() {
        if e == 0 {
            continue;
        }
        let n = Var::from_index(i).name();
        if e == 1 {
            parts.push(n);
        } else {
            parts.push(format!("{n}^{e}"));
        }
    }
    parts.join("*")
}

impl fmt::Display for Poly {
    /// Canonical text: terms by descending total degree, then by variable
    /// order; coefficients as `p/q`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut ts: Vec<(&Mono, &Q)> = self.terms.iter().collect();
        ts.sort_by(|a, b| {
            let da: u32 = a.0.iter().map(|&e| e as u32).sum();
            let db: u32 = b.0.iter().map(|&e| e as u32).sum();
            db.cmp(&da).then_with(|| b.0.cmp(a.0))
        });
        for (k, (m, c)) in ts.into_iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let ms = fmt_mono(m);
            if ms.is_empty() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{ms}")?;
            } else {
                write!(f, "{a}*{ms}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

impl<'a> Add<&'a Poly> for &Poly {
    type Output = Poly;
    fn add(self, o: &'a Poly) -> Poly {
        let mut r = self.clone();
        r += o;
        r
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, o: Poly) -> Poly {
        self += &o;
        self
    }
}

impl<'a> AddAssign<&'a Poly> for Poly {
    fn add_assign(&mut self, o: &'a Poly) {
        for (m, c) in &o.terms {
            self.add_term(*m, c.clone());
        }
    }
}

impl<'a> SubAssign<&'a Poly> for Poly {
    fn sub_assign(&mut self, o: &'a Poly) {
        for (m, c) in &o.terms {
            self.add_term(*m, -c.clone());
        }
    }
}

impl<'a> Sub<&'a Poly> for &Poly {
    type Output = Poly;
    fn sub(self, o: &'a Poly) -> Poly {
        let mut r = self.clone();
        r -= o;
        r
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(mut self, o: Poly) -> Poly {
        self -= &o;
        self
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect(),
        }
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -self.clone()
    }
}

impl<'a> Mul<&'a Poly> for &Poly {
    type Output = Poly;
    fn mul(self, o: &'a Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let mut m = *m1;
                for i in 0..NVARS {
                    m[i] += m2[i];
                }
                out.add_term(m, c1 * c2);
            }
        }
        out
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, o: Poly) -> Poly {
        &self * &o
    }
}
