//! The G₂ cone over `M`: r-homogeneous forms, the cone operators, the
//! 3-form to metric jet, the `Λ²₁₄` parametrization and the linearization
//! identities.
//!
//! A piece `r^w F` stores `F` in the frame `{e0 = dr/r, e^1..e^6}`, so the
//! orthonormal coframe is `r e0, r e^i` and a k-form piece carries `r^{w-k}`
//! against it.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::Serialize;

use crate::calculus::{CalcError, Calculus, IdentityCheck, IdentityReport};
use crate::forms::{
    basis_masks, eta, j_one, omega, phi7, pi14_2, pi1_3, pi7_2, pi7_3, project2, psi7, re_omega,
    slots_of, Form, FormError, Jet2, Type2, CONE7, E0, VERTICAL,
};
use crate::poly::{q, qf, Poly, Var};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ConeError {
    #[error("form has components along the fibre directions h1..h3")]
    VerticalComponent,
    #[error("s^0 part of the 3-form does not give the identity frame metric")]
    NotUnitLeading,
    #[error("2-form is not primitive of type (1,1)")]
    NotPrimitive,
    #[error("degree mismatch")]
    DegreeMismatch,
    #[error("identity failed: {0}")]
    IdentityFailed(String),
}

impl From<FormError> for ConeError {
    fn from(e: FormError) -> Self {
        match e {
            FormError::DegreeMismatch(..) => ConeError::DegreeMismatch,
            _ => ConeError::VerticalComponent,
        }
    }
}

impl From<CalcError> for ConeError {
    fn from(e: CalcError) -> Self {
        match e {
            CalcError::IdentityFailed(s) => ConeError::IdentityFailed(s),
            _ => ConeError::VerticalComponent,
        }
    }
}

/// The exponent `n + m·a` of `r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Weight {
    pub n: i64,
    pub m: i64,
}

impl Weight {
    pub const fn int(n: i64) -> Weight {
        Weight { n, m: 0 }
    }

    pub const fn sym(n: i64, m: i64) -> Weight {
        Weight { n, m }
    }

    pub fn shift(self, k: i64) -> Weight {
        Weight { n: self.n + k, m: self.m }
    }

    pub fn plus(self, o: Weight) -> Weight {
        Weight { n: self.n + o.n, m: self.m + o.m }
    }

    /// `r ∂_r` eigenvalue on `r^w`.
    pub fn poly(self) -> Poly {
        Poly::int(self.n) + Poly::var(Var::A).scale(&q(self.m))
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.n, self.m) {
            (n, 0) => write!(f, "{n}"),
            (0, 1) => write!(f, "a"),
            (0, m) => write!(f, "{m}a"),
            (n, 1) => write!(f, "{n}+a"),
            (n, m) => write!(f, "{n}+{m}a"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Default)]
pub struct ConeForm {
    pieces: BTreeMap<Weight, Form>,
}

impl ConeForm {
    pub fn zero() -> ConeForm {
        ConeForm::default()
    }

    /// `r^w F`.
    pub fn piece(w: Weight, f: Form) -> ConeForm {
        let mut c = ConeForm::zero();
        c.add_piece(w, f);
        c
    }

    /// `r^w (e0 ∧ α + β)`.
    pub fn from_parts(w: Weight, alpha: &Form, beta: &Form) -> ConeForm {
        ConeForm::piece(w, Form::e(&[E0]).wedge(alpha) + beta.clone())
    }

    pub fn add_piece(&mut self, w: Weight, f: Form) {
        let cur = self.pieces.remove(&w).unwrap_or_default();
        let s = cur + f;
        if !s.is_zero() {
            self.pieces.insert(w, s);
        }
    }

    pub fn pieces(&self) -> impl Iterator<Item = (&Weight, &Form)> {
        self.pieces.iter()
    }

    pub fn get(&self, w: Weight) -> Form {
        self.pieces.get(&w).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn map_pieces<F: Fn(&Form) -> Form>(&self, f: F) -> ConeForm {
        let mut out = ConeForm::zero();
        for (w, p) in &self.pieces {
            out.add_piece(*w, f(p));
        }
        out
    }

    pub fn try_map_pieces<F: Fn(Weight, &Form) -> Result<(Weight, Form), ConeError>>(
        &self,
        f: F,
    ) -> Result<ConeForm, ConeError> {
        let mut out = ConeForm::zero();
        for (w, p) in &self.pieces {
            let (w2, g) = f(*w, p)?;
            out.add_piece(w2, g);
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Poly) -> ConeForm {
        self.map_pieces(|f| f.scale(c))
    }

    pub fn scale_i(&self, n: i64) -> ConeForm {
        self.map_pieces(|f| f.scale_i(n))
    }

    pub fn scale_q(&self, c: &crate::poly::Q) -> ConeForm {
        self.map_pieces(|f| f.scale_q(c))
    }

    pub fn wedge(&self, o: &ConeForm) -> ConeForm {
        let mut out = ConeForm::zero();
        for (w1, a) in &self.pieces {
            for (w2, b) in &o.pieces {
                out.add_piece(w1.plus(*w2), a.wedge(b));
            }
        }
        out
    }

    /// `d(r^w F) = r^w (w e0 ∧ F + dF)`.
    pub fn d(&self, calc: &Calculus) -> ConeForm {
        let e0 = Form::e(&[E0]);
        self.map_pieces_w(|w, f| e0.wedge(f).scale(&w.poly()) + calc.d(f))
    }

    fn map_pieces_w<F: Fn(Weight, &Form) -> Form>(&self, f: F) -> ConeForm {
        let mut out = ConeForm::zero();
        for (w, p) in &self.pieces {
            out.add_piece(*w, f(*w, p));
        }
        out
    }

    /// Hodge star of `dr² + r² h`, orientation `dr ∧ e^{123456}`.
    pub fn star(&self) -> Result<ConeForm, ConeError> {
        let mut out = ConeForm::zero();
        for (w, p) in &self.pieces {
            for k in 0..=7 {
                let pk = p.part(k);
                if pk.is_zero() {
                    continue;
                }
                if pk.support() & VERTICAL != 0 {
                    return Err(ConeError::VerticalComponent);
                }
                out.add_piece(w.shift(7 - 2 * k as i64), pk.star7()?);
            }
        }
        Ok(out)
    }

    /// `d* = (-1)^k * d *` on k-forms.
    pub fn codiff(&self, calc: &Calculus) -> Result<ConeForm, ConeError> {
        let mut out = ConeForm::zero();
        for k in 0..=7usize {
            let part = self.part(k);
            if part.is_zero() {
                continue;
            }
            let r = part.star()?.d(calc).star()?;
            let r = if k % 2 == 1 { -r } else { r };
            out = out + r;
        }
        Ok(out)
    }

    pub fn laplacian(&self, calc: &Calculus) -> Result<ConeForm, ConeError> {
        Ok(self.codiff(calc)?.d(calc) + self.d(calc).codiff(calc)?)
    }

    pub fn part(&self, k: usize) -> ConeForm {
        self.map_pieces(|f| f.part(k))
    }

    /// Pointwise inner product of two k-forms, as a 0-form with weights.
    pub fn inner(&self, o: &ConeForm, k: usize) -> ConeForm {
        let mut out = ConeForm::zero();
        for (w1, a) in &self.pieces {
            for (w2, b) in &o.pieces {
                let c = a.inner(b);
                if !c.is_zero() {
                    out.add_piece(w1.plus(*w2).shift(-2 * k as i64), Form::scalar(c));
                }
            }
        }
        out
    }

    /// Interior product with the metric dual of the 1-form `v`.
    pub fn contract_dual(&self, v: &ConeForm) -> ConeForm {
        let mut out = ConeForm::zero();
        for (w1, x) in &v.pieces {
            for (w2, f) in &self.pieces {
                out.add_piece(w1.plus(*w2).shift(-2), f.contract_vec(x));
            }
        }
        out
    }

    pub fn has_vertical(&self) -> bool {
        self.pieces.values().any(|f| f.has_vertical())
    }

    /// Sets `a` to a rational value and merges pieces.
    pub fn eval_a(&self, a: i64) -> ConeForm {
        let mut out = ConeForm::zero();
        for (w, f) in &self.pieces {
            let w2 = Weight::int(w.n + w.m * a);
            out.add_piece(w2, f.map_coeffs(|p| p.eval_partial(&[(Var::A, q(a))])));
        }
        out
    }
}

impl fmt::Display for ConeForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pieces.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (w, p) in &self.pieces {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "r^({w})[{p}]")?;
        }
        Ok(())
    }
}

impl fmt::Debug for ConeForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Add for ConeForm {
    type Output = ConeForm;
    fn add(mut self, o: ConeForm) -> ConeForm {
        for (w, p) in o.pieces {
            self.add_piece(w, p);
        }
        self
    }
}

impl Sub for ConeForm {
    type Output = ConeForm;
    fn sub(self, o: ConeForm) -> ConeForm {
        self + (-o)
    }
}

impl Neg for ConeForm {
    type Output = ConeForm;
    fn neg(self) -> ConeForm {
        self.map_pieces(|f| -f.clone())
    }
}

/// `φ = r³(e0 ∧ ω + ReΩ)`.
pub fn cone_phi() -> ConeForm {
    ConeForm::piece(Weight::int(3), phi7())
}

/// `*φ = r⁴(ω²/2 − e0 ∧ ImΩ)`.
pub fn cone_psi() -> ConeForm {
    ConeForm::piece(Weight::int(4), psi7())
}

// ---- projections, applied piecewise on the flat frame form ----

pub fn pi7_2_cone(x: &ConeForm) -> ConeForm {
    x.map_pieces(pi7_2)
}

pub fn pi14_2_cone(x: &ConeForm) -> ConeForm {
    x.map_pieces(pi14_2)
}

pub fn pi1_3_cone(x: &ConeForm) -> ConeForm {
    x.map_pieces(pi1_3)
}

pub fn pi7_3_cone(x: &ConeForm) -> ConeForm {
    x.map_pieces(pi7_3)
}

// ---- Λ²₁₄ ----

/// `r^{3+w}(e0 ∧ JX + ½(X ⌟ ReΩ + η₈))`, weight `w` relative to `r³`.
pub fn lambda14_embed_weighted(x: &Form, eta8: &Form, w: Weight) -> Result<ConeForm, ConeError> {
    if project2(eta8, Type2::Eight) != *eta8 {
        return Err(ConeError::NotPrimitive);
    }
    let y = re_omega().contract_vec(x) + eta8.clone();
    Ok(ConeForm::from_parts(w.shift(3), &j_one(x), &y.scale_q(&qf(1, 2))))
}

pub fn lambda14_embed(x: &Form, eta8: &Form) -> Result<ConeForm, ConeError> {
    lambda14_embed_weighted(x, eta8, Weight::int(0))
}

/// Generic `Λ²₇` element `r³(Y ⌟ ReΩ − e0 ∧ Y ⌟ ω)`.
pub fn lambda7_generator(y: &Form) -> ConeForm {
    ConeForm::from_parts(Weight::int(3), &-omega().contract_vec(y), &re_omega().contract_vec(y))
}

// ---- metric from a perturbed 3-form ----

/// Inverse-metric jet, metric jet and determinant jet in the frame
/// `{e0, ẽ1..ẽ6}`.
#[derive(Clone, Debug)]
pub struct MetricJet {
    pub b: Vec<Vec<Jet2>>,
    pub g: Vec<Vec<Jet2>>,
    pub ginv: Vec<Vec<Jet2>>,
    pub det: Jet2,
    pub volratio: Jet2,
}

impl MetricJet {
    pub fn b1(&self) -> Vec<Vec<Poly>> {
        self.b.iter().map(|r| r.iter().map(|j| j.c[1].clone()).collect()).collect()
    }

    pub fn b2(&self) -> Vec<Vec<Poly>> {
        self.b.iter().map(|r| r.iter().map(|j| j.c[2].clone()).collect()).collect()
    }

    /// `B⁽¹⁾B⁽¹⁾ − B⁽²⁾`.
    pub fn combined(&self) -> Vec<Vec<Poly>> {
        let b1 = self.b1();
        let b2 = self.b2();
        (0..7)
            .map(|i| {
                (0..7)
                    .map(|j| {
                        let mut acc = Poly::zero();
                        for k in 0..7 {
                            acc += &(&b1[i][k] * &b1[k][j]);
                        }
                        acc - b2[i][j].clone()
                    })
                    .collect()
            })
            .collect()
    }
}

/// `r^{-3} d(r³η) = dη + 3 e0 ∧ η` as a flat-frame 3-form.
pub fn eta_variation(calc: &Calculus) -> Form {
    ConeForm::piece(Weight::int(3), eta()).d(calc).get(Weight::int(3))
}

fn top_coeff(f: &Form) -> Poly {
    f.get(CONE7)
}

/// `B_ij = (e_i ⌟ ψ ∧ e_j ⌟ ψ ∧ ψ) / (6 vol)` for `ψ = ψ0 + s ψ1`, to `O(s²)`.
pub fn metric_from_3form(psi0: &Form, psi1: &Form) -> Result<MetricJet, ConeError> {
    if psi0.has_vertical() || psi1.has_vertical() {
        return Err(ConeError::VerticalComponent);
    }
    let c0: Vec<Form> = (0..7).map(|i| psi0.contract(i)).collect();
    let c1: Vec<Form> = (0..7).map(|i| psi1.contract(i)).collect();
    let sixth = qf(1, 6);
    let tri = |a: &Form, b: &Form, c: &Form| top_coeff(&a.wedge(b).wedge(c)).scale(&sixth);
    let mut b = vec![vec![Jet2::zero(); 7]; 7];
    for i in 0..7 {
        for j in i..7 {
            let j0 = tri(&c0[i], &c0[j], psi0);
            let j1 = tri(&c1[i], &c0[j], psi0) + tri(&c0[i], &c1[j], psi0) + tri(&c0[i], &c0[j], psi1);
            let j2 = tri(&c1[i], &c1[j], psi0) + tri(&c1[i], &c0[j], psi1) + tri(&c0[i], &c1[j], psi1);
            let e = Jet2::new(j0, j1, j2);
            b[i][j] = e.clone();
            b[j][i] = e;
        }
    }
    for (i, row) in b.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            let want = if i == j { Poly::one() } else { Poly::zero() };
            if e.c[0] != want {
                return Err(ConeError::NotUnitLeading);
            }
        }
    }
    let b1: Vec<Vec<Poly>> = b.iter().map(|r| r.iter().map(|e| e.c[1].clone()).collect()).collect();
    let b2: Vec<Vec<Poly>> = b.iter().map(|r| r.iter().map(|e| e.c[2].clone()).collect()).collect();
    let b1sq: Vec<Vec<Poly>> = (0..7)
        .map(|i| {
            (0..7)
                .map(|j| {
                    let mut acc = Poly::zero();
                    for k in 0..7 {
                        acc += &(&b1[i][k] * &b1[k][j]);
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let tr = |m: &Vec<Vec<Poly>>| {
        let mut acc = Poly::zero();
        for (i, row) in m.iter().enumerate() {
            acc += &row[i];
        }
        acc
    };
    let t1 = tr(&b1);
    let det2 = tr(&b2) - tr(&b1sq).scale(&qf(1, 2)) + (&t1 * &t1).scale(&qf(1, 2));
    let det = Jet2::new(Poly::one(), t1, det2);
    let dm19 = det.pow_q(&qf(-1, 9)).ok_or(ConeError::NotUnitLeading)?;
    let dp19 = det.pow_q(&qf(1, 9)).ok_or(ConeError::NotUnitLeading)?;
    let mut g = vec![vec![Jet2::zero(); 7]; 7];
    let mut ginv = vec![vec![Jet2::zero(); 7]; 7];
    for i in 0..7 {
        for j in 0..7 {
            g[i][j] = b[i][j].mul(&dm19);
            let id = if i == j { Poly::one() } else { Poly::zero() };
            let binv = Jet2::new(id, -b1[i][j].clone(), b1sq[i][j].clone() - b2[i][j].clone());
            ginv[i][j] = binv.mul(&dp19);
        }
    }
    Ok(MetricJet { b, g, ginv, det, volratio: dp19 })
}

/// The metric jet of `φ + s r^{-3} d(r³η)`.
pub fn eta_metric_jet(calc: &Calculus) -> Result<MetricJet, ConeError> {
    metric_from_3form(&phi7(), &eta_variation(calc))
}

// ---- linearization ----

/// Test data for the symbolic linearization: free symbols `b1..b5`.
pub fn linearization_test_data() -> (Form, Form) {
    let k = crate::forms::killing_k();
    let jk = j_one(&k);
    let v1 = Poly::v(1);
    let x = k.scale(&Poly::b(1)) + jk.scale(&Poly::b(2)) + k.scale(&(&Poly::b(5) * &v1));
    let e = eta();
    let eta8 = e.scale(&Poly::b(3)) + e.scale(&(&Poly::b(4) * &v1));
    (x, eta8)
}

fn check(name: &str, r: Result<ConeForm, ConeError>) -> IdentityCheck {
    match r {
        Ok(f) if f.is_zero() => IdentityCheck::new(name, Ok(Form::zero())),
        Ok(f) => IdentityCheck {
            identity: name.into(),
            status: "fail".into(),
            residual: Some(f.to_string()),
        },
        Err(e) => IdentityCheck {
            identity: name.into(),
            status: "fail".into(),
            residual: Some(format!("error: {e}")),
        },
    }
}

/// Projection identities and the reduction of the linearized operator to
/// the Hodge Laplacian for `ξ = lambda14_embed(X, η₈)` at weight `r^{3+a}`.
pub fn linearization_report(calc: &Calculus, x: &Form, eta8: &Form) -> IdentityReport {
    let xi = match lambda14_embed_weighted(x, eta8, Weight::sym(0, 1)) {
        Ok(xi) => xi,
        Err(e) => {
            return IdentityReport {
                suite: "linearization".into(),
                checks: vec![check("xi in Lambda^2_14", Err(e))],
            }
        }
    };
    let phi = cone_phi();
    let dxi = xi.d(calc);
    let cod = xi.codiff(calc);
    let mut checks = vec![
        check("pi_14(xi) = xi", Ok(pi14_2_cone(&xi) - xi.clone())),
        check("pi_1(d xi) = 0", Ok(pi1_3_cone(&dxi))),
        check(
            "pi_7(d xi) + 1/4 (d* xi) _| *phi = 0",
            cod.clone().map(|c| {
                pi7_3_cone(&dxi) + cone_psi().contract_dual(&c).scale_q(&qf(1, 4))
            }),
        ),
    ];
    let lin = (|| -> Result<ConeForm, ConeError> {
        let ddxi = cod.clone()?.d(calc);
        let dsd = dxi.codiff(calc)?;
        let twist = ddxi.wedge(&phi).star()?.scale_q(&qf(1, 2));
        let op = dsd.clone() + twist + ddxi.scale_q(&qf(3, 2));
        Ok(pi14_2_cone(&op) - (dsd + ddxi))
    })();
    checks.push(check(
        "pi_14(-*d*d xi + 1/2 *(dd* xi ^ phi) + 3/2 dd* xi) = (d*d + dd*) xi",
        lin,
    ));
    checks.push(check(
        "pi_7(Laplacian xi) = 0",
        xi.laplacian(calc).map(|l| pi7_2_cone(&l)),
    ));
    IdentityReport { suite: "linearization".into(), checks }
}

/// `Δ_φ ξ` split into the `e0 ∧` part and the tangential part at weight
/// `r^{a+1}`, together with the closed-form prediction in terms of the
/// Laplacian on `M`.
#[derive(Clone, Debug)]
pub struct LaplacianDisplay {
    pub radial: Form,
    pub tangential: Form,
    pub radial_expected: Form,
    pub tangential_expected: Form,
}

impl LaplacianDisplay {
    pub fn matches(&self) -> bool {
        self.radial == self.radial_expected && self.tangential == self.tangential_expected
    }
}

/// `-a(a-1) - 8a`, the radial operator `-r²∂²_r - 8r∂_r` on `r^a`.
pub fn radial_symbol() -> Poly {
    let a = Poly::var(Var::A);
    -(&a * &(&a - &Poly::one())) - a.scale(&q(8))
}

pub fn laplacian14_display(calc: &Calculus, x: &Form, eta8: &Form) -> Result<LaplacianDisplay, ConeError> {
    let xi = lambda14_embed_weighted(x, eta8, Weight::sym(0, 1))?;
    let lap = xi.laplacian(calc)?;
    let w = Weight::sym(1, 1);
    if lap.pieces().any(|(pw, _)| *pw != w) {
        return Err(ConeError::IdentityFailed("unexpected weight in Laplacian".into()));
    }
    let (radial, tangential) = lap.get(w).split_radial();
    let jx = j_one(x);
    let y = re_omega().contract_vec(x) + eta8.clone();
    let rs = radial_symbol();
    let radial_expected = jx.scale(&(&rs - &Poly::int(6))) + calc.laplacian(&jx)? - calc.codiff(&y)?;
    let tangential_expected = (y.scale(&(&rs - &Poly::int(12))) + calc.laplacian(&y)?
        - calc.d(&jx).scale_i(4))
    .scale_q(&qf(1, 2));
    Ok(LaplacianDisplay { radial, tangential, radial_expected, tangential_expected })
}

/// Substituting `r = e^{-t}`: `r^a = e^{-at}` and `-∂²_t + 7∂_t` acts by
/// `-a² - 7a`, which is the radial symbol.
pub fn t_substitution_symbol() -> Poly {
    let a = Poly::var(Var::A);
    -(&a * &a) - a.scale(&q(7))
}

// ---- pointwise quadratic identity on 2-forms ----

/// Generic constant 2-form on the cone frame with symbols `b1..b21`.
pub fn generic_two_form() -> Form {
    let mut f = Form::zero();
    for (k, m) in basis_masks(CONE7, 2).into_iter().enumerate() {
        f.add_term(m, Poly::b(k as u8 + 1));
    }
    f
}

/// `β ∧ β ∧ φ − (2|π₇β|² − |π₁₄β|²) vol`.
pub fn two_form_quadratic_residual(beta: &Form) -> Form {
    let lhs = beta.wedge(beta).wedge(&phi7());
    let p7 = pi7_2(beta);
    let p14 = pi14_2(beta);
    let c = p7.norm2().scale(&q(2)) - p14.norm2();
    lhs - Form::mono(CONE7, c)
}

pub fn two_form_quadratic_identity(beta: &Form) -> IdentityReport {
    let mut checks = vec![IdentityCheck::new(
        "beta^beta^phi = (2|pi_7 beta|^2 - |pi_14 beta|^2) vol",
        Ok(two_form_quadratic_residual(beta)),
    )];
    checks.extend(twist_projector_checks());
    IdentityReport { suite: "quadratic-identity".into(), checks }
}

/// Matrices of `π₇`, `π₁₄` on constant 2-forms of the cone frame.
pub fn twist_projectors() -> (Vec<Vec<crate::poly::Q>>, Vec<Vec<crate::poly::Q>>) {
    use crate::forms::{linear_map_matrix, CONE7};
    (linear_map_matrix(CONE7, 2, 2, pi7_2), linear_map_matrix(CONE7, 2, 2, pi14_2))
}

fn mat_mul(a: &[Vec<crate::poly::Q>], b: &[Vec<crate::poly::Q>]) -> Vec<Vec<crate::poly::Q>> {
    let n = b[0].len();
    a.iter()
        .map(|row| (0..n).map(|j| row.iter().zip(b).map(|(x, br)| x * &br[j]).sum()).collect())
        .collect()
}

/// Ranks 7 and 14, idempotence, `π₇ + π₁₄ = 1`, and `*(φ∧·)` acting by
/// `2` and `−1` on the two images.
fn twist_projector_checks() -> Vec<IdentityCheck> {
    use crate::forms::{g2_twist, linear_map_matrix, rank_q, CONE7};
    let (p7, p14) = twist_projectors();
    let tw = linear_map_matrix(CONE7, 2, 2, g2_twist);
    let n = p7.len();
    let (r7, r14) = (rank_q(p7.clone()), rank_q(p14.clone()));
    let ident = |i: usize, j: usize| if i == j { q(1) } else { q(0) };
    let sum_is_one = (0..n).all(|i| (0..n).all(|j| &p7[i][j] + &p14[i][j] == ident(i, j)));
    let scaled = |m: &[Vec<crate::poly::Q>], c: i64| -> Vec<Vec<crate::poly::Q>> {
        m.iter().map(|r| r.iter().map(|x| x * q(c)).collect()).collect()
    };
    vec![
        IdentityCheck::from_bool("rank pi_7 = 7", r7 == 7, || format!("rank {r7}")),
        IdentityCheck::from_bool("rank pi_14 = 14", r14 == 14, || format!("rank {r14}")),
        IdentityCheck::from_bool("pi_7, pi_14 idempotent", mat_mul(&p7, &p7) == p7 && mat_mul(&p14, &p14) == p14, String::new),
        IdentityCheck::from_bool("pi_7 + pi_14 = 1", sum_is_one, String::new),
        IdentityCheck::from_bool(
            "*(phi ^ .) = 2 on the image of pi_7, -1 on the image of pi_14",
            mat_mul(&tw, &p7) == scaled(&p7, 2) && mat_mul(&tw, &p14) == scaled(&p14, -1),
            String::new,
        ),
    ]
}

/// The wedge vanishings behind `B⁽¹⁾_{0i} = 0`, each reported separately.
pub fn wedge_vanishing_report(calc: &Calculus) -> IdentityReport {
    let e = eta();
    let w = omega();
    let de = calc.d(&e);
    let checks = [
        ("omega^2 ^ eta = 0", w.wedge(&w).wedge(&e)),
        ("eta ^ Re Omega = 0", e.wedge(&re_omega())),
        ("eta ^ Im Omega = 0", e.wedge(&crate::forms::im_omega())),
        ("omega ^ d eta = 0", w.wedge(&de)),
    ]
    .into_iter()
    .map(|(n, f)| IdentityCheck::new(n, Ok(f)))
    .collect();
    IdentityReport { suite: "wedge-vanishing".into(), checks }
}

/// Row and column order of the metric table fixtures.
pub const TABLE_ORDER: [usize; 7] = [0, 1, 3, 5, 2, 4, 6];

/// Helper for reports: slot list of a mask.
pub fn mask_slots(m: u16) -> Vec<usize> {
    slots_of(m)
}
