//! The identification `su(3) → Λ²₈`, the quadratic map `Q₀`, the cubic
//! obstruction integrand and its Haar Monte Carlo integral.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::Matrix3 as CMat;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::Calculus;
use crate::cone::{eta_metric_jet, eta_variation, ConeError};
use crate::forms::{
    eta, inner_perturbed, omega, phi7, project2, sum_forms, Form, Type2, E0, INNER_CONVENTION,
};
use crate::poly::{q, qf, Poly, Var, Q};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ObstructionError {
    #[error("*pi_8(eta1 ^ eta2) is not in the image of su(3)")]
    NotInImage,
    #[error("cubic integrand differs from the closed form by {0}")]
    ClosedFormMismatch(String),
    #[error("at least {0} samples are required")]
    TooFewSamples(usize),
    #[error(transparent)]
    Cone(#[from] ConeError),
}

// ---- Q(√3) ----

/// `a + b√3`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct QSqrt3 {
    pub a: Q,
    pub b: Q,
}

impl QSqrt3 {
    pub fn new(a: Q, b: Q) -> QSqrt3 {
        QSqrt3 { a, b }
    }

    pub fn rational(a: Q) -> QSqrt3 {
        QSqrt3 { a, b: Q::zero() }
    }

    pub fn int(n: i64) -> QSqrt3 {
        QSqrt3::rational(q(n))
    }

    /// `b√3`.
    pub fn sqrt3(b: Q) -> QSqrt3 {
        QSqrt3 { a: Q::zero(), b }
    }

    pub fn zero() -> QSqrt3 {
        QSqrt3 { a: Q::zero(), b: Q::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64().unwrap_or(f64::NAN) + self.b.to_f64().unwrap_or(f64::NAN) * 3f64.sqrt()
    }

    /// Multiplication by `√3`.
    pub fn times_sqrt3(&self) -> QSqrt3 {
        QSqrt3 { a: &self.b * q(3), b: self.a.clone() }
    }

    /// Division by `√3`.
    pub fn over_sqrt3(&self) -> QSqrt3 {
        QSqrt3 { a: self.b.clone(), b: &self.a * qf(1, 3) }
    }
}

impl Add for &QSqrt3 {
    type Output = QSqrt3;
    fn add(self, o: &QSqrt3) -> QSqrt3 {
        QSqrt3 { a: &self.a + &o.a, b: &self.b + &o.b }
    }
}

impl Sub for &QSqrt3 {
    type Output = QSqrt3;
    fn sub(self, o: &QSqrt3) -> QSqrt3 {
        QSqrt3 { a: &self.a - &o.a, b: &self.b - &o.b }
    }
}

impl Mul for &QSqrt3 {
    type Output = QSqrt3;
    fn mul(self, o: &QSqrt3) -> QSqrt3 {
        QSqrt3 {
            a: &self.a * &o.a + &self.b * &o.b * q(3),
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }
}

impl Neg for &QSqrt3 {
    type Output = QSqrt3;
    fn neg(self) -> QSqrt3 {
        QSqrt3 { a: -self.a.clone(), b: -self.b.clone() }
    }
}

impl fmt::Display for QSqrt3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (true, true) => write!(f, "0"),
            (false, true) => write!(f, "{}", self.a),
            (true, false) => write!(f, "{}*sqrt3", self.b),
            (false, false) => write!(f, "{} + {}*sqrt3", self.a, self.b),
        }
    }
}

// ---- deformation vectors ----

pub const BASIS_NAMES: [&str; 8] = ["H1", "H2", "e1", "e2", "e3", "e4", "e5", "e6"];

/// Coordinates over `{H1, H2, e1..e6}`, an orthonormal basis of `su(3)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeformationVector {
    pub c: [QSqrt3; 8],
}

impl DeformationVector {
    pub fn zero() -> DeformationVector {
        DeformationVector { c: std::array::from_fn(|_| QSqrt3::zero()) }
    }

    pub fn unit(k: usize) -> DeformationVector {
        let mut v = DeformationVector::zero();
        v.c[k] = QSqrt3::int(1);
        v
    }

    pub fn from_ints(c: [i64; 8]) -> DeformationVector {
        DeformationVector { c: c.map(QSqrt3::int) }
    }

    /// `e2 + e4 + e6`.
    pub fn v0() -> DeformationVector {
        DeformationVector::from_ints([0, 0, 0, 1, 0, 1, 0, 1])
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn scale(&self, s: &QSqrt3) -> DeformationVector {
        DeformationVector { c: std::array::from_fn(|k| &self.c[k] * s) }
    }

    pub fn add(&self, o: &DeformationVector) -> DeformationVector {
        DeformationVector { c: std::array::from_fn(|k| &self.c[k] + &o.c[k]) }
    }

    pub fn to_f64(&self) -> [f64; 8] {
        std::array::from_fn(|k| self.c[k].to_f64())
    }

    /// Coordinates over the rational basis `{H1, √3 H2, e1..e6}`.
    fn to_rational_basis(&self) -> [QSqrt3; 8] {
        let mut c = self.c.clone();
        c[1] = c[1].over_sqrt3();
        c
    }

    fn from_rational_basis(mut c: [QSqrt3; 8]) -> DeformationVector {
        c[1] = c[1].times_sqrt3();
        DeformationVector { c }
    }
}

impl fmt::Display for DeformationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.c.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c}){}", BASIS_NAMES[k])?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Images of `{H1, √3 H2, e1..e6}` in `Λ²₈`; all rational.
pub fn rational_images() -> [Form; 8] {
    let e = Form::e;
    [
        e(&[1, 2]) - e(&[3, 4]),
        e(&[1, 2]) + e(&[3, 4]) - e(&[5, 6]).scale_i(2),
        e(&[1, 3]) + e(&[2, 4]),
        e(&[1, 4]) - e(&[2, 3]),
        e(&[5, 1]) + e(&[6, 2]),
        e(&[5, 2]) - e(&[6, 1]),
        e(&[3, 5]) + e(&[4, 6]),
        e(&[3, 6]) - e(&[4, 5]),
    ]
}

/// `F0 + √3 F1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sqrt3Form {
    pub rational: Form,
    pub sqrt3: Form,
}

pub fn su3_to_lambda8(z: &DeformationVector) -> Sqrt3Form {
    let imgs = rational_images();
    let c = z.to_rational_basis();
    let mut r = Form::zero();
    let mut s = Form::zero();
    for k in 0..8 {
        r = r + imgs[k].scale_q(&c[k].a);
        s = s + imgs[k].scale_q(&c[k].b);
    }
    Sqrt3Form { rational: r, sqrt3: s }
}

/// Rational-basis coordinates of a rational `Λ²₈` form.
fn read_back(beta: &Form) -> Result<[Q; 8], ObstructionError> {
    let imgs = rational_images();
    let c: [Q; 8] = std::array::from_fn(|k| {
        let num = beta.inner(&imgs[k]).as_constant().unwrap_or_default();
        let den = imgs[k].norm2().as_constant().expect("constant image");
        num / den
    });
    let rebuilt = sum_forms((0..8).map(|k| imgs[k].scale_q(&c[k])));
    if rebuilt != *beta {
        return Err(ObstructionError::NotInImage);
    }
    Ok(c)
}

/// `*π₈(α ∧ β)` on `M`, polarized.
pub fn q0_forms(a: &Form, b: &Form) -> Form {
    let s = a.wedge(b).star6().expect("tangential 4-form");
    project2(&s, Type2::Eight)
}

/// `T[i][j]` = rational-basis coordinates of `Q₀(img_i, img_j)`.
pub fn q0_structure_tensor() -> Result<Vec<Vec<[Q; 8]>>, ObstructionError> {
    let imgs = rational_images();
    (0..8)
        .map(|i| (0..8).map(|j| read_back(&q0_forms(&imgs[i], &imgs[j]))).collect())
        .collect()
}

fn tensor() -> &'static Vec<Vec<[Q; 8]>> {
    static T: std::sync::OnceLock<Vec<Vec<[Q; 8]>>> = std::sync::OnceLock::new();
    T.get_or_init(|| q0_structure_tensor().expect("Q0 closes on the image"))
}

pub fn q0(z1: &DeformationVector, z2: &DeformationVector) -> DeformationVector {
    let t = tensor();
    let a = z1.to_rational_basis();
    let b = z2.to_rational_basis();
    let mut out: [QSqrt3; 8] = std::array::from_fn(|_| QSqrt3::zero());
    for i in 0..8 {
        if a[i].is_zero() {
            continue;
        }
        for j in 0..8 {
            if b[j].is_zero() {
                continue;
            }
            let ab = &a[i] * &b[j];
            for k in 0..8 {
                if !t[i][j][k].is_zero() {
                    out[k] = &out[k] + &(&ab * &QSqrt3::rational(t[i][j][k].clone()));
                }
            }
        }
    }
    DeformationVector::from_rational_basis(out)
}

/// Column `j` is `Q₀(v, basis_j)`.
pub fn q0_matrix(v: &DeformationVector) -> Vec<Vec<QSqrt3>> {
    let cols: Vec<DeformationVector> = (0..8).map(|j| q0(v, &DeformationVector::unit(j))).collect();
    (0..8).map(|i| (0..8).map(|j| cols[j].c[i].clone()).collect()).collect()
}

/// `T[i][j][k]` in the orthonormal basis as floats.
fn tensor_f64() -> &'static [[[f64; 8]; 8]; 8] {
    static T: std::sync::OnceLock<[[[f64; 8]; 8]; 8]> = std::sync::OnceLock::new();
    T.get_or_init(|| {
        let mut out = [[[0.0; 8]; 8]; 8];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let v = q0(&DeformationVector::unit(i), &DeformationVector::unit(j)).to_f64();
                *cell = v;
            }
        }
        out
    })
}

/// Float version of `Q₀` in the orthonormal basis.
pub fn q0_f64(a: &[f64; 8], b: &[f64; 8]) -> [f64; 8] {
    let t = tensor_f64();
    let mut out = [0.0; 8];
    for i in 0..8 {
        if a[i] == 0.0 {
            continue;
        }
        for j in 0..8 {
            let ab = a[i] * b[j];
            if ab == 0.0 {
                continue;
            }
            for (o, tk) in out.iter_mut().zip(&t[i][j]) {
                *o += ab * tk;
            }
        }
    }
    out
}

// ---- the cubic integrand ----

pub fn sum_v_cubed() -> Poly {
    (1..=3).map(|i| Poly::v(i).pow(3)).fold(Poly::zero(), |a, b| a + b)
}

/// The reference closed form `36 Σ v³ + 12 Re (x2 + i x1)(x4 + i x3)(x6 + i x5)`.
pub fn expected_cubic() -> Poly {
    sum_v_cubed().scale(&q(36)) + re_triple().scale(&q(12))
}

/// What the jet assembly produces: `36 Σ v³ + 6 Re (…)`. Frozen from an
/// independent dense-tensor computation, which rejects the coefficient 12.
pub fn assembled_cubic() -> Poly {
    sum_v_cubed().scale(&q(36)) + re_triple().scale(&q(6))
}

/// `Re (x2 + i x1)(x4 + i x3)(x6 + i x5)`.
pub fn re_triple() -> Poly {
    let x = Poly::x;
    &(&x(2) * &x(4)) * &x(6) - &(&x(2) * &x(3)) * &x(5) - &(&x(1) * &x(3)) * &x(6)
        - &(&x(1) * &x(4)) * &x(5)
}

/// `4 e0 ∧ η − dη`.
pub fn pairing_form(calc: &Calculus) -> Form {
    Form::e(&[E0]).wedge(&eta()).scale_i(4) - calc.d(&eta())
}

/// `s²` coefficient of `(φ + sψ₁, 4e0∧η − dη)` in the perturbed metric,
/// times the volume ratio.
pub fn cubic_integrand_raw(calc: &Calculus) -> Result<Poly, ObstructionError> {
    let jet = eta_metric_jet(calc)?;
    let beta = pairing_form(calc);
    let psi1 = eta_variation(calc);
    let i0 = inner_perturbed(&phi7(), &beta, &jet.ginv, &jet.volratio, INNER_CONVENTION)
        .map_err(ConeError::from)?;
    let i1 = inner_perturbed(&psi1, &beta, &jet.ginv, &jet.volratio, INNER_CONVENTION)
        .map_err(ConeError::from)?;
    Ok(&i0.c[2] + &i1.c[1])
}

pub fn cubic_integrand(calc: &Calculus) -> Result<Poly, ObstructionError> {
    let p = cubic_integrand_raw(calc)?;
    let r = &p - &expected_cubic();
    if !r.is_zero() {
        return Err(ObstructionError::ClosedFormMismatch(r.to_string()));
    }
    Ok(p)
}

/// `Σ_{i,l} B⁽¹⁾_{il} (e_i ⌟ ψ₁, e_l ⌟ (4e0∧η − dη))`.
pub fn first_order_sum(calc: &Calculus) -> Result<Poly, ObstructionError> {
    let jet = eta_metric_jet(calc)?;
    let b1 = jet.b1();
    let psi1 = eta_variation(calc);
    let beta = pairing_form(calc);
    let mut acc = Poly::zero();
    for (i, row) in b1.iter().enumerate() {
        for (l, b) in row.iter().enumerate() {
            if b.is_zero() {
                continue;
            }
            acc += &(b * &psi1.contract(i).inner(&beta.contract(l)));
        }
    }
    Ok(acc)
}

/// `(1,2) → (3,4) → (5,6)` on coordinates; `v3 → v2 → v1 → v3`.
pub fn cyclic_permutation(p: &Poly) -> Poly {
    let x = Poly::x;
    p.substitute(&[
        (Var::X(1), x(3)),
        (Var::X(2), x(4)),
        (Var::X(3), x(5)),
        (Var::X(4), x(6)),
        (Var::X(5), x(1)),
        (Var::X(6), x(2)),
        (Var::V1, Poly::v(3)),
        (Var::V2, Poly::v(1)),
    ])
}

/// Compiled evaluator for a polynomial in `v1, v2, x1..x6`.
#[derive(Clone, Debug)]
pub struct CubicEval {
    terms: Vec<([u8; 8], f64)>,
}

impl CubicEval {
    pub fn new(p: &Poly) -> CubicEval {
        let terms = p
            .terms()
            .map(|(m, c)| {
                let e: [u8; 8] = std::array::from_fn(|k| m[k]);
                (e, c.to_f64().unwrap_or(f64::NAN))
            })
            .collect();
        CubicEval { terms }
    }

    /// `vals = [v1, v2, x1..x6]`.
    pub fn eval(&self, vals: &[f64; 8]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(vals)
                    .fold(*c, |acc, (&k, &x)| if k == 0 { acc } else { acc * x.powi(k as i32) })
            })
            .sum()
    }
}

// ---- su(3) matrices and Haar sampling ----

pub type CMatrix = CMat<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `e1..e6, h1..h3` as complex matrices.
pub fn basis_matrices() -> &'static [CMatrix; 9] {
    static B: std::sync::OnceLock<[CMatrix; 9]> = std::sync::OnceLock::new();
    B.get_or_init(|| {
        crate::liealg::raw_basis().map(|m| {
            CMatrix::from_fn(|i, j| {
                c(m.m[i][j].re.to_f64().unwrap_or(0.0), m.m[i][j].im.to_f64().unwrap_or(0.0))
            })
        })
    })
}

fn ip(a: &CMatrix, b: &CMatrix) -> f64 {
    -0.5 * (a * b).trace().re
}

/// The orthonormal basis `{H1, H2, e1..e6}`.
pub fn deformation_basis() -> &'static [CMatrix; 8] {
    static D: std::sync::OnceLock<[CMatrix; 8]> = std::sync::OnceLock::new();
    D.get_or_init(|| {
        let b = basis_matrices();
        let h1 = b[6] - b[7];
        let h2 = (b[6] + b[7] - b[8] * c(2.0, 0.0)) / c(3f64.sqrt(), 0.0);
        [h1, h2, b[0], b[1], b[2], b[3], b[4], b[5]]
    })
}

pub fn to_matrix(z: &[f64; 8]) -> CMatrix {
    deformation_basis().iter().zip(z).fold(CMatrix::zeros(), |acc, (m, &x)| acc + m * c(x, 0.0))
}

pub fn from_matrix(a: &CMatrix) -> [f64; 8] {
    let b = deformation_basis();
    std::array::from_fn(|k| ip(a, &b[k]))
}

/// `[v1, v2, x1..x6]` of `A`: `x_i = ⟨A, e_i⟩`, `v_j = ⟨A, h_j⟩`.
pub fn coordinates_of(a: &CMatrix) -> [f64; 8] {
    let b = basis_matrices();
    [
        ip(a, &b[6]),
        ip(a, &b[7]),
        ip(a, &b[0]),
        ip(a, &b[1]),
        ip(a, &b[2]),
        ip(a, &b[3]),
        ip(a, &b[4]),
        ip(a, &b[5]),
    ]
}

pub fn adjoint(g: &CMatrix, a: &CMatrix) -> CMatrix {
    g * a * g.adjoint()
}

/// Haar-distributed element of SU(3).
pub fn haar_sample<R: rand::Rng + ?Sized>(rng: &mut R) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = CMatrix::from_fn(|_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re * s, im * s)
    });
    let qr = z.qr();
    let (mut qm, r) = (qr.q(), qr.r());
    for j in 0..3 {
        let d = r[(j, j)];
        let ph = d / d.norm();
        for i in 0..3 {
            qm[(i, j)] *= ph;
        }
    }
    let det = qm.determinant();
    let root = det.powf(1.0 / 3.0);
    qm / root
}

#[derive(Clone, Debug, Serialize)]
pub struct McEstimate {
    pub zeta: [f64; 8],
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
    pub mean: f64,
    pub stderr: f64,
    pub z_score: f64,
}

pub const MC_BLOCK: usize = 4096;
pub const MC_MIN_SAMPLES: usize = 1000;

fn block_rng(seed: u64, block: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Monte Carlo of `∫ P(Ad_{u⁻¹} ζ) du`. Independent of the thread count.
pub fn obstruction_integral(
    calc: &Calculus,
    zeta: &[f64; 8],
    n: usize,
    seed: u64,
) -> Result<McEstimate, ObstructionError> {
    if n < MC_MIN_SAMPLES {
        return Err(ObstructionError::TooFewSamples(MC_MIN_SAMPLES));
    }
    let p = CubicEval::new(&cubic_integrand_raw(calc)?);
    Ok(integrate_with(&p, zeta, n, seed))
}

pub fn integrate_with(p: &CubicEval, zeta: &[f64; 8], n: usize, seed: u64) -> McEstimate {
    let z = to_matrix(zeta);
    let nblocks = n.div_ceil(MC_BLOCK);
    let partial: Vec<(f64, f64)> = (0..nblocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b as u64);
            let len = MC_BLOCK.min(n - b * MC_BLOCK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..len {
                let u = haar_sample(&mut rng);
                let a = u.adjoint() * z * u;
                let val = p.eval(&coordinates_of(&a));
                s += val;
                s2 += val * val;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = partial.iter().fold((0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
    let nf = n as f64;
    let mean = s / nf;
    let var = ((s2 / nf - mean * mean) * nf / (nf - 1.0)).max(0.0);
    let stderr = (var / nf).sqrt();
    let z_score = if stderr > 0.0 { mean / stderr } else { 0.0 };
    McEstimate { zeta: *zeta, n, seed, mean, stderr, z_score }
}

/// Largest `|P(Ad_{u⁻¹}ζ) − P(ζ)|` over sampled `u`; zero would mean the
/// integrand is constant on orbits.
pub fn ad_invariance_defect(p: &CubicEval, zeta: &[f64; 8], samples: usize, seed: u64) -> f64 {
    let z = to_matrix(zeta);
    let p0 = p.eval(&coordinates_of(&z));
    let mut rng = block_rng(seed, u64::MAX);
    (0..samples)
        .map(|_| {
            let u = haar_sample(&mut rng);
            (p.eval(&coordinates_of(&(u.adjoint() * z * u))) - p0).abs()
        })
        .fold(0.0, f64::max)
}

/// `ζ = diag(i, i, −2i)` in the orthonormal basis.
pub fn diag_zeta() -> [f64; 8] {
    from_matrix(&CMatrix::from_diagonal(&nalgebra::Vector3::new(c(0.0, 1.0), c(0.0, 1.0), c(0.0, -2.0))))
}

pub fn omega_trace(f: &Form) -> Poly {
    f.inner(&omega())
}
