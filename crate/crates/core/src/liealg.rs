//! Exact u(3) matrices, the calibrated basis, structure constants and the
//! derivations of the coordinate functions `x_i`, `v_j`.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::calculus::Calculus;
use crate::forms::{eta, im_omega, omega, re_omega, Form};
use crate::poly::{q, qf, Poly, Var, Q};

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GaussRational {
    pub re: Q,
    pub im: Q,
}

impl GaussRational {
    pub fn new(re: Q, im: Q) -> Self {
        GaussRational { re, im }
    }
    pub fn zero() -> Self {
        GaussRational::new(Q::zero(), Q::zero())
    }
    pub fn real(n: i64) -> Self {
        GaussRational::new(q(n), Q::zero())
    }
    pub fn imag(n: i64) -> Self {
        GaussRational::new(Q::zero(), q(n))
    }
    pub fn conj(&self) -> Self {
        GaussRational::new(self.re.clone(), -self.im.clone())
    }
    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    pub fn inv(&self) -> Option<Self> {
        let n = &self.re * &self.re + &self.im * &self.im;
        if n.is_zero() {
            return None;
        }
        Some(GaussRational::new(&self.re / &n, -&self.im / &n))
    }
}

impl Add for &GaussRational {
    type Output = GaussRational;
    fn add(self, o: &GaussRational) -> GaussRational {
        GaussRational::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl Sub for &GaussRational {
    type Output = GaussRational;
    fn sub(self, o: &GaussRational) -> GaussRational {
        GaussRational::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl Mul for &GaussRational {
    type Output = GaussRational;
    fn mul(self, o: &GaussRational) -> GaussRational {
        GaussRational::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Neg for &GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        GaussRational::new(-self.re.clone(), -self.im.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Matrix3 {
    pub m: [[GaussRational; 3]; 3],
}

impl Matrix3 {
    pub fn zero() -> Matrix3 {
        Matrix3::default()
    }

    pub fn identity() -> Matrix3 {
        let mut r = Matrix3::zero();
        for i in 0..3 {
            r.m[i][i] = GaussRational::real(1);
        }
        r
    }

    /// `E_ij` with 1-based indices.
    pub fn unit(i: usize, j: usize) -> Matrix3 {
        let mut r = Matrix3::zero();
        r.m[i - 1][j - 1] = GaussRational::real(1);
        r
    }

    pub fn scale(&self, c: &GaussRational) -> Matrix3 {
        let mut r = Matrix3::zero();
        for i in 0..3 {
            for j in 0..3 {
                r.m[i][j] = &self.m[i][j] * c;
            }
        }
        r
    }

    pub fn scale_q(&self, c: &Q) -> Matrix3 {
        self.scale(&GaussRational::new(c.clone(), Q::zero()))
    }

    pub fn adjoint(&self) -> Matrix3 {
        let mut r = Matrix3::zero();
        for i in 0..3 {
            for j in 0..3 {
                r.m[i][j] = self.m[j][i].conj();
            }
        }
        r
    }

    pub fn trace(&self) -> GaussRational {
        &(&self.m[0][0] + &self.m[1][1]) + &self.m[2][2]
    }

    pub fn is_anti_hermitian(&self) -> bool {
        self.adjoint() == self.scale(&GaussRational::real(-1))
    }

    pub fn is_zero(&self) -> bool {
        self.m.iter().flatten().all(|x| x.is_zero())
    }
}

impl Add for &Matrix3 {
    type Output = Matrix3;
    fn add(self, o: &Matrix3) -> Matrix3 {
        let mut r = Matrix3::zero();
        for i in 0..3 {
            for j in 0..3 {
                r.m[i][j] = &self.m[i][j] + &o.m[i][j];
            }
        }
        r
    }
}

impl Sub for &Matrix3 {
    type Output = Matrix3;
    fn sub(self, o: &Matrix3) -> Matrix3 {
        let mut r = Matrix3::zero();
        for i in 0..3 {
            for j in 0..3 {
                r.m[i][j] = &self.m[i][j] - &o.m[i][j];
            }
        }
        r
    }
}

impl Mul for &Matrix3 {
    type Output = Matrix3;
    fn mul(self, o: &Matrix3) -> Matrix3 {
        let mut r = Matrix3::zero();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = GaussRational::zero();
                for k in 0..3 {
                    acc = &acc + &(&self.m[i][k] * &o.m[k][j]);
                }
                r.m[i][j] = acc;
            }
        }
        r
    }
}

pub fn bracket(a: &Matrix3, b: &Matrix3) -> Matrix3 {
    &(a * b) - &(b * a)
}

/// `⟨A, B⟩ = -½ Re tr(AB)`.
pub fn inner(a: &Matrix3, b: &Matrix3) -> Q {
    -(a * b).trace().re * qf(1, 2)
}

/// Uncalibrated basis matrices `e1..e6, h1, h2, h3`.
pub fn raw_basis() -> [Matrix3; 9] {
    let i = GaussRational::imag(1);
    let e = Matrix3::unit;
    [
        &e(1, 2) - &e(2, 1),
        (&e(1, 2) + &e(2, 1)).scale(&i),
        &e(3, 1) - &e(1, 3),
        (&e(3, 1) + &e(1, 3)).scale(&i),
        &e(2, 3) - &e(3, 2),
        (&e(2, 3) + &e(3, 2)).scale(&i),
        e(1, 1).scale(&i),
        e(2, 2).scale(&i),
        e(3, 3).scale(&i),
    ]
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieBasis {
    pub mats: [Matrix3; 9],
    /// Sign applied to each of `e1..e6` relative to `raw_basis`.
    pub sigma: [i8; 6],
    /// Maurer-Cartan sign: `de^k = mc · Σ_{a<b} c_{ab}^k e^{ab}`.
    pub mc: i8,
}

impl LieBasis {
    pub fn with_signs(sigma: [i8; 6], mc: i8) -> LieBasis {
        let mut mats = raw_basis();
        for k in 0..6 {
            if sigma[k] < 0 {
                mats[k] = mats[k].scale(&GaussRational::real(-1));
            }
        }
        LieBasis { mats, sigma, mc }
    }

    pub fn gram(&self) -> Vec<Vec<Q>> {
        (0..9)
            .map(|i| (0..9).map(|j| inner(&self.mats[i], &self.mats[j])).collect())
            .collect()
    }

    pub fn norm2(&self, k: usize) -> Q {
        if k < 6 {
            Q::one()
        } else {
            qf(1, 2)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureConstants {
    /// `c[i][j][k]`: `[b_i, b_j] = Σ_k c[i][j][k] b_k`.
    pub c: Vec<Vec<Vec<Q>>>,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum LieError {
    #[error("no sign assignment satisfies dω = 3ReΩ and dImΩ = -2ω²")]
    CalibrationFailed,
    #[error("bracket [b{0}, b{1}] is not in the span of the basis")]
    NotInSpan(usize, usize),
    #[error("malformed structure-constant table: {0}")]
    Malformed(String),
}

/// Expands a u(3) matrix in the basis, using orthogonality; errors if the
/// reconstruction is not exact.
pub fn coordinates(basis: &LieBasis, m: &Matrix3) -> Option<Vec<Q>> {
    let coeffs: Vec<Q> = (0..9)
        .map(|k| inner(m, &basis.mats[k]) / basis.norm2(k))
        .collect();
    let mut rec = Matrix3::zero();
    for k in 0..9 {
        rec = &rec + &basis.mats[k].scale_q(&coeffs[k]);
    }
    if &rec == m {
        Some(coeffs)
    } else {
        None
    }
}

pub fn structure_constants(basis: &LieBasis) -> Result<StructureConstants, LieError> {
    let mut c = vec![vec![vec![Q::zero(); 9]; 9]; 9];
    for i in 0..9 {
        for j in 0..9 {
            let br = bracket(&basis.mats[i], &basis.mats[j]);
            c[i][j] = coordinates(basis, &br).ok_or(LieError::NotInSpan(i, j))?;
        }
    }
    Ok(StructureConstants { c })
}

impl StructureConstants {
    /// Largest |Jacobi residual| over all index quadruples (0 when exact).
    pub fn jacobi_defect(&self) -> Q {
        let c = &self.c;
        let mut worst = Q::zero();
        for i in 0..9 {
            for j in 0..9 {
                for k in 0..9 {
                    for l in 0..9 {
                        let mut s = Q::zero();
                        for m in 0..9 {
                            s += &c[i][j][m] * &c[m][k][l]
                                + &c[j][k][m] * &c[m][i][l]
                                + &c[k][i][m] * &c[m][j][l];
                        }
                        let a = if s < Q::zero() { -s } else { s };
                        if a > worst {
                            worst = a;
                        }
                    }
                }
            }
        }
        worst
    }

    /// JSON table of the non-zero constants: `[i, j, k, num, den]`, 1-based.
    pub fn to_json(&self) -> serde_json::Value {
        let mut rows = Vec::new();
        for i in 0..9 {
            for j in 0..9 {
                for k in 0..9 {
                    let v = &self.c[i][j][k];
                    if !v.is_zero() {
                        rows.push(serde_json::json!([
                            i + 1,
                            j + 1,
                            k + 1,
                            v.numer().to_string(),
                            v.denom().to_string()
                        ]));
                    }
                }
            }
        }
        serde_json::json!({ "basis": ["e1","e2","e3","e4","e5","e6","h1","h2","h3"], "constants": rows })
    }

    /// Inverse of `to_json`; absent entries are zero.
    pub fn from_json(v: &serde_json::Value) -> Result<StructureConstants, LieError> {
        let bad = |m: String| LieError::Malformed(m);
        let rows = v.get("constants").and_then(|r| r.as_array()).ok_or_else(|| bad("missing constants".into()))?;
        let mut c = vec![vec![vec![Q::zero(); 9]; 9]; 9];
        for row in rows {
            let r = row.as_array().filter(|r| r.len() == 5).ok_or_else(|| bad(format!("bad row {row}")))?;
            let idx = |k: usize| {
                r[k].as_u64().filter(|&i| (1..=9).contains(&i)).map(|i| i as usize - 1).ok_or_else(|| bad(format!("bad index in {row}")))
            };
            let big = |k: usize| {
                r[k].as_str()
                    .and_then(|s| s.parse::<num_bigint::BigInt>().ok())
                    .ok_or_else(|| bad(format!("bad rational in {row}")))
            };
            let den = big(4)?;
            if den == num_bigint::BigInt::from(0) {
                return Err(bad(format!("zero denominator in {row}")));
            }
            c[idx(0)?][idx(1)?][idx(2)?] = Q::new(big(3)?, den);
        }
        Ok(StructureConstants { c })
    }

    /// Largest |c_ij^k + c_ji^k|.
    pub fn antisymmetry_defect(&self) -> Q {
        let mut worst = Q::zero();
        for i in 0..9 {
            for j in 0..9 {
                for k in 0..9 {
                    let s = &self.c[i][j][k] + &self.c[j][i][k];
                    let a = if s < Q::zero() { -s } else { s };
                    if a > worst {
                        worst = a;
                    }
                }
            }
        }
        worst
    }
}

/// Index of a coordinate function: `x1..x6` are 0..6, `v1..v3` are 6..9.
pub fn coordinate_poly(k: usize) -> Poly {
    if k < 6 {
        Poly::x(k as u8 + 1)
    } else {
        Poly::v(k as u8 - 5)
    }
}

/// Left-invariant derivations `b_j` acting on the coordinate functions.
#[derive(Clone, Debug)]
pub struct Derivations {
    /// `table[j][k] = b_j · coordinate_k`.
    pub table: Vec<Vec<Poly>>,
}

impl Derivations {
    pub fn new(sc: &StructureConstants) -> Derivations {
        let table = (0..9)
            .map(|j| {
                (0..9)
                    .map(|i| {
                        let mut p = Poly::zero();
                        for k in 0..9 {
                            p += &coordinate_poly(k).scale(&sc.c[j][i][k]);
                        }
                        p
                    })
                    .collect()
            })
            .collect();
        Derivations { table }
    }

    /// `b_j · P` by the chain rule over `v1, v2, x1..x6`.
    pub fn apply(&self, j: usize, p: &Poly) -> Poly {
        let mut out = Poly::zero();
        for var in Var::coordinates() {
            let dp = p.derivative(var);
            if dp.is_zero() {
                continue;
            }
            let k = match var {
                Var::V1 => 6,
                Var::V2 => 7,
                Var::X(i) => i as usize - 1,
                _ => unreachable!(),
            };
            out += &(&dp * &self.table[j][k]);
        }
        out
    }
}

/// Derivative of one coordinate function along one basis direction.
pub fn derive_coordinate(der: &Derivations, direction: usize, coordinate: usize) -> Poly {
    der.table[direction][coordinate].clone()
}

/// The `dη` display the calibrated basis has to reproduce.
pub fn expected_d_eta() -> Form {
    let x = |i: u8| Poly::x(i);
    let e = |i: usize| Form::e(&[i]);
    let one = |a: Form, b: Form, c: Form, d: Form| a + b + c + d;
    let t56 = one(e(3).scale(&x(4)), e(4).scale(&-x(3)), e(1).scale(&-x(2)), e(2).scale(&x(1)));
    let t34 = one(e(1).scale(&x(2)), e(2).scale(&-x(1)), e(5).scale(&-x(6)), e(6).scale(&x(5)));
    let t12 = one(e(5).scale(&x(6)), e(6).scale(&-x(5)), e(3).scale(&-x(4)), e(4).scale(&x(3)));
    t56.wedge(&Form::e(&[5, 6])) + t34.wedge(&Form::e(&[3, 4])) + t12.wedge(&Form::e(&[1, 2]))
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Assignment {
    pub sigma: [i8; 6],
    pub mc: i8,
    pub nearly_kahler: bool,
    pub d_eta_display: bool,
}

#[derive(Clone, Debug)]
pub struct Calibration {
    pub basis: LieBasis,
    pub sc: StructureConstants,
    pub searched: Vec<Assignment>,
}

fn check_assignment(sigma: [i8; 6], mc: i8) -> Option<(Assignment, LieBasis, StructureConstants)> {
    let basis = LieBasis::with_signs(sigma, mc);
    let sc = structure_constants(&basis).ok()?;
    let calc = Calculus::new(&sc, mc);
    let w = omega();
    let nk = calc.d(&w) == re_omega().scale_i(3) && calc.d(&im_omega()) == w.wedge(&w).scale_i(-2);
    let de = nk && calc.d(&eta()) == expected_d_eta();
    Some((
        Assignment { sigma, mc, nearly_kahler: nk, d_eta_display: de },
        basis,
        sc,
    ))
}

/// Exhaustive search over the sign of each `e_i` and the Maurer-Cartan
/// sign. Among assignments satisfying both nearly-Kähler identities and the
/// `dη` display, picks `mc = -1` and then the most `+1` signs (first in
/// lexicographic order on ties).
/// The search runs once per process.
pub fn calibrate() -> Result<Calibration, LieError> {
    static CAL: OnceLock<Result<Calibration, LieError>> = OnceLock::new();
    CAL.get_or_init(search).clone()
}

fn search() -> Result<Calibration, LieError> {
    let mut searched = Vec::new();
    let mut best: Option<(LieBasis, StructureConstants, (i32, i32))> = None;
    for mc in [-1i8, 1] {
        for bits in 0..64u32 {
            let mut sigma = [1i8; 6];
            for (k, s) in sigma.iter_mut().enumerate() {
                if bits & (1 << k) != 0 {
                    *s = -1;
                }
            }
            let Some((a, basis, sc)) = check_assignment(sigma, mc) else { continue };
            if a.d_eta_display {
                let score = (-(mc as i32), sigma.iter().map(|&s| s as i32).sum::<i32>());
                if best.as_ref().is_none_or(|b| score > b.2) {
                    best = Some((basis, sc, score));
                }
            }
            searched.push(a);
        }
    }
    let (basis, sc, _) = best.ok_or(LieError::CalibrationFailed)?;
    Ok(Calibration { basis, sc, searched })
}

/// The calibrated basis without the search bookkeeping.
pub fn calibrate_basis() -> Result<LieBasis, LieError> {
    calibrate().map(|c| c.basis)
}
