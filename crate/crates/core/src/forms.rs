//! Exterior algebra on a fixed coframe with polynomial coefficients.
//!
//! Slots: 0 is the radial `e0 = dr/r` of the cone, 1..=6 are `e^1..e^6`
//! and 7..=9 are `h^1..h^3`. A basis monomial is a bit mask over slots;
//! antisymmetry is structural.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_traits::{One, Zero};

use crate::poly::{q, qf, Poly, Var, Q};

pub const NSLOTS: usize = 10;
pub const E0: usize = 0;

pub fn h_slot(j: usize) -> usize {
    6 + j
}

pub const TANGENT6: u16 = 0b000_0111_1110;
pub const CONE7: u16 = 0b000_0111_1111;
pub const VERTICAL: u16 = 0b11_1000_0000;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum FormError {
    #[error("form has components along the fibre directions h1..h3")]
    VerticalComponent,
    #[error("form has components outside the slots of the requested star")]
    OutsideStarSlots,
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
}

/// Sign of `e^A ∧ e^B` relative to `e^{A∪B}` for disjoint masks.
pub fn wedge_sign(a: u16, b: u16) -> i32 {
    let mut inv = 0u32;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        bb &= bb - 1;
        let above = if j >= 15 { 0 } else { a & !((1u16 << (j + 1)) - 1) };
        inv += above.count_ones();
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn slots_of(mask: u16) -> Vec<usize> {
    (0..NSLOTS).filter(|&i| mask & (1 << i) != 0).collect()
}

fn slot_name(i: usize) -> String {
    if i <= 6 {
        format!("{i}")
    } else {
        format!("h{}", i - 6)
    }
}

#[derive(Clone, PartialEq, Eq, Default)]
pub struct Form {
    terms: BTreeMap<u16, Poly>,
}

impl Form {
    pub fn zero() -> Form {
        Form { terms: BTreeMap::new() }
    }

    pub fn scalar(p: Poly) -> Form {
        let mut f = Form::zero();
        f.add_term(0, p);
        f
    }

    /// `e^{i1} ∧ e^{i2} ∧ ...` in the given (possibly unsorted) order.
    pub fn e(slots: &[usize]) -> Form {
        let mut f = Form::scalar(Poly::one());
        for &s in slots {
            f = f.wedge(&Form::mono(1 << s, Poly::one()));
        }
        f
    }

    pub fn mono(mask: u16, c: Poly) -> Form {
        let mut f = Form::zero();
        f.add_term(mask, c);
        f
    }

    pub fn add_term(&mut self, mask: u16, c: Poly) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&mask) {
            Some(e) => {
                *e += &c;
                if e.is_zero() {
                    self.terms.remove(&mask);
                }
            }
            None => {
                self.terms.insert(mask, c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&u16, &Poly)> {
        self.terms.iter()
    }

    pub fn get(&self, mask: u16) -> Poly {
        self.terms.get(&mask).cloned().unwrap_or_else(Poly::zero)
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

    /// Degree of a homogeneous non-zero form.
    pub fn degree(&self) -> Option<usize> {
        let mut it = self.terms.keys().map(|m| m.count_ones() as usize);
        let d = it.next()?;
        if it.all(|e| e == d) {
            Some(d)
        } else {
            None
        }
    }

    pub fn support(&self) -> u16 {
        self.terms.keys().fold(0, |a, m| a | m)
    }

    pub fn has_vertical(&self) -> bool {
        self.support() & VERTICAL != 0
    }

    pub fn scale(&self, c: &Poly) -> Form {
        let mut out = Form::zero();
        for (m, p) in &self.terms {
            out.add_term(*m, p * c);
        }
        out
    }

    pub fn scale_q(&self, c: &Q) -> Form {
        let mut out = Form::zero();
        for (m, p) in &self.terms {
            out.add_term(*m, p.scale(c));
        }
        out
    }

    pub fn scale_i(&self, n: i64) -> Form {
        self.scale_q(&q(n))
    }

    pub fn map_coeffs<F: Fn(&Poly) -> Poly>(&self, f: F) -> Form {
        let mut out = Form::zero();
        for (m, p) in &self.terms {
            out.add_term(*m, f(p));
        }
        out
    }

    /// Keeps only the terms of the given degree.
    pub fn part(&self, k: usize) -> Form {
        let mut out = Form::zero();
        for (m, p) in &self.terms {
            if m.count_ones() as usize == k {
                out.add_term(*m, p.clone());
            }
        }
        out
    }

    pub fn wedge(&self, o: &Form) -> Form {
        let mut out = Form::zero();
        for (a, pa) in &self.terms {
            for (b, pb) in &o.terms {
                if a & b != 0 {
                    continue;
                }
                let prod = pa * pb;
                let prod = if wedge_sign(*a, *b) < 0 { -prod } else { prod };
                out.add_term(a | b, prod);
            }
        }
        out
    }

    /// Interior product with the frame vector dual to slot `i`.
    pub fn contract(&self, i: usize) -> Form {
        let bit = 1u16 << i;
        let mut out = Form::zero();
        for (m, p) in &self.terms {
            if m & bit == 0 {
                continue;
            }
            let before = (m & (bit - 1)).count_ones();
            let c = if before % 2 == 0 { p.clone() } else { -p };
            out.add_term(m & !bit, c);
        }
        out
    }

    /// Interior product with a vector given by its frame components
    /// (a 1-form read through the frame metric).
    pub fn contract_vec(&self, v: &Form) -> Form {
        let mut out = Form::zero();
        for (m, c) in &v.terms {
            debug_assert_eq!(m.count_ones(), 1);
            out = out + self.contract(m.trailing_zeros() as usize).scale(c);
        }
        out
    }

    /// Hodge star in the orthonormal frame on the slot set `space`,
    /// oriented by the increasing wedge of those slots.
    pub fn star_on(&self, space: u16) -> Result<Form, FormError> {
        if self.support() & !space != 0 {
            return Err(if self.has_vertical() {
                FormError::VerticalComponent
            } else {
                FormError::OutsideStarSlots
            });
        }
        let mut out = Form::zero();
        for (m, p) in &self.terms {
            let c = space & !m;
            let s = wedge_sign(*m, c);
            out.add_term(c, if s > 0 { p.clone() } else { -p });
        }
        Ok(out)
    }

    /// Star on `M` with orientation `e^{123456}`.
    pub fn star6(&self) -> Result<Form, FormError> {
        self.star_on(TANGENT6)
    }

    /// Star on the cone frame with orientation `e^{0123456}`.
    pub fn star7(&self) -> Result<Form, FormError> {
        self.star_on(CONE7)
    }

    /// Frame inner product, orthonormal basis monomials (unit convention:
    /// `(e^I, e^I) = 1` for increasing multi-indices).
    pub fn inner(&self, o: &Form) -> Poly {
        let mut acc = Poly::zero();
        for (m, p) in &self.terms {
            if let Some(r) = o.terms.get(m) {
                acc += &(p * r);
            }
        }
        acc
    }

    pub fn norm2(&self) -> Poly {
        self.inner(self)
    }

    /// Left-multiplication of every coefficient by `e0`-free exterior calculus
    /// helper: splits `F = e0 ∧ α + β` into `(α, β)`.
    pub fn split_radial(&self) -> (Form, Form) {
        let alpha = self.contract(E0);
        let mut beta = Form::zero();
        for (m, p) in &self.terms {
            if m & 1 == 0 {
                beta.add_term(*m, p.clone());
            }
        }
        (alpha, beta)
    }

    /// Evaluates the coefficients numerically.
    pub fn eval_f64(&self, vals: &[f64; crate::poly::NVARS]) -> Vec<(u16, f64)> {
        self.terms
            .iter()
            .map(|(m, p)| (*m, p.eval_f64(vals)))
            .collect()
    }

    /// Canonical text, one term per basis monomial in mask order.
    pub fn to_canonical(&self) -> String {
        format!("{self}")
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        let mut keys: Vec<&u16> = self.terms.keys().collect();
        keys.sort_by_key(|m| (m.count_ones(), slots_of(**m)));
        for m in keys {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let name: Vec<String> = slots_of(*m).into_iter().map(slot_name).collect();
            if name.is_empty() {
                write!(f, "({})", self.terms[m])?;
            } else {
                write!(f, "({}) e{}", self.terms[m], name.join("."))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Form[{self}]")
    }
}

impl Add for Form {
    type Output = Form;
    fn add(mut self, o: Form) -> Form {
        for (m, p) in o.terms {
            self.add_term(m, p);
        }
        self
    }
}

impl Add<&Form> for &Form {
    type Output = Form;
    fn add(self, o: &Form) -> Form {
        self.clone() + o.clone()
    }
}

impl Sub for Form {
    type Output = Form;
    fn sub(self, o: Form) -> Form {
        self + (-o)
    }
}

impl Sub<&Form> for &Form {
    type Output = Form;
    fn sub(self, o: &Form) -> Form {
        self.clone() - o.clone()
    }
}

impl Neg for Form {
    type Output = Form;
    fn neg(self) -> Form {
        Form {
            terms: self.terms.into_iter().map(|(m, p)| (m, -p)).collect(),
        }
    }
}

pub fn sum_forms<I: IntoIterator<Item = Form>>(it: I) -> Form {
    it.into_iter().fold(Form::zero(), |a, b| a + b)
}

// ---- the SU(3)-structure on M and the G2 structure on the cone frame ----

pub fn omega() -> Form {
    Form::e(&[1, 2]) + Form::e(&[3, 4]) + Form::e(&[5, 6])
}

pub fn re_omega() -> Form {
    Form::e(&[2, 4, 6]) - Form::e(&[1, 3, 6]) - Form::e(&[2, 3, 5]) - Form::e(&[1, 4, 5])
}

pub fn im_omega() -> Form {
    Form::e(&[1, 3, 5]) - Form::e(&[2, 4, 5]) - Form::e(&[1, 4, 6]) - Form::e(&[2, 3, 6])
}

/// `η = v1 e^{56} + v2 e^{34} + v3 e^{12}`.
pub fn eta() -> Form {
    Form::e(&[5, 6]).scale(&Poly::v(1))
        + Form::e(&[3, 4]).scale(&Poly::v(2))
        + Form::e(&[1, 2]).scale(&Poly::v(3))
}

/// `K = Σ x_i e^i`.
pub fn killing_k() -> Form {
    sum_forms((1..=6).map(|i| Form::e(&[i]).scale(&Poly::x(i as u8))))
}

/// `φ = e0 ∧ ω + ReΩ` in the orthonormal cone frame.
pub fn phi7() -> Form {
    Form::e(&[E0]).wedge(&omega()) + re_omega()
}

/// `*φ = ω²/2 − e0 ∧ ImΩ` in the orthonormal cone frame.
pub fn psi7() -> Form {
    omega().wedge(&omega()).scale_q(&qf(1, 2)) - Form::e(&[E0]).wedge(&im_omega())
}

/// Almost complex structure on 1-forms: `J e^1 = e^2`, `J e^2 = -e^1`, and
/// likewise on the planes (3,4), (5,6).
pub fn j_one(alpha: &Form) -> Form {
    let mut out = Form::zero();
    for (m, p) in alpha.terms() {
        let i = m.trailing_zeros() as usize;
        assert!(m.count_ones() == 1 && (1..=6).contains(&i), "J acts on tangential 1-forms");
        let (target, sign) = if i % 2 == 1 { (i + 1, 1) } else { (i - 1, -1) };
        let c = if sign > 0 { p.clone() } else { -p };
        out.add_term(1 << target, c);
    }
    out
}

/// The dual action `J* = -J`.
pub fn j_star(alpha: &Form) -> Form {
    -j_one(alpha)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Type2 {
    One,
    Six,
    Eight,
}

/// Normalization of `alpha_op`; pinned by `α(dJK) = -6K`.
pub const ALPHA_KAPPA: i64 = 1;

/// `α(β) = κ⁻¹ Σ (β, e_i ⌟ ReΩ) e^i`.
pub fn alpha_op(beta: &Form) -> Form {
    let ro = re_omega();
    let k = qf(1, ALPHA_KAPPA);
    sum_forms((1..=6).map(|i| Form::e(&[i]).scale(&beta.inner(&ro.contract(i)).scale(&k))))
}

pub fn project2(beta: &Form, c: Type2) -> Form {
    let w = omega();
    let p1 = w.scale(&beta.inner(&w).scale(&qf(1, 3)));
    let ro = re_omega();
    let p6 = sum_forms((1..=6).map(|i| {
        let g = ro.contract(i);
        g.scale(&beta.inner(&g).scale(&qf(1, 2)))
    }));
    match c {
        Type2::One => p1,
        Type2::Six => p6,
        Type2::Eight => beta - &p1 - p6,
    }
}

// ---- G2 type decompositions on the cone frame (slots 0..=6) ----

/// `β ↦ *(φ ∧ β)` on 2-forms.
pub fn g2_twist(beta: &Form) -> Form {
    phi7().wedge(beta).star7().expect("cone-frame 2-form")
}

pub fn pi7_2(beta: &Form) -> Form {
    (beta + &g2_twist(beta)).scale_q(&qf(1, 3))
}

pub fn pi14_2(beta: &Form) -> Form {
    (beta.scale_i(2) - g2_twist(beta)).scale_q(&qf(1, 3))
}

/// Component along `φ` of a 3-form.
pub fn pi1_3(gamma: &Form) -> Form {
    phi7().scale(&gamma.inner(&phi7()).scale(&qf(1, 7)))
}

/// Component in `{X ⌟ *φ}` of a 3-form.
pub fn pi7_3(gamma: &Form) -> Form {
    let psi = psi7();
    sum_forms((0..=6).map(|i| {
        let g = psi.contract(i);
        g.scale(&gamma.inner(&g).scale(&qf(1, 4)))
    }))
}

// ---- second-order jets in s ----

/// `c0 + c1 s + c2 s²` with polynomial coefficients, truncated at `s²`.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Jet2 {
    pub c: [Poly; 3],
}

impl Jet2 {
    pub fn new(c0: Poly, c1: Poly, c2: Poly) -> Jet2 {
        Jet2 { c: [c0, c1, c2] }
    }

    pub fn zero() -> Jet2 {
        Jet2::new(Poly::zero(), Poly::zero(), Poly::zero())
    }

    pub fn one() -> Jet2 {
        Jet2::constant(Poly::one())
    }

    pub fn constant(p: Poly) -> Jet2 {
        Jet2::new(p, Poly::zero(), Poly::zero())
    }

    /// Reads the `s`-expansion of a polynomial, dropping `s³` and above.
    pub fn from_poly(p: &Poly) -> Jet2 {
        Jet2::new(p.coeff(Var::S, 0), p.coeff(Var::S, 1), p.coeff(Var::S, 2))
    }

    pub fn to_poly(&self) -> Poly {
        let s = Poly::var(Var::S);
        &self.c[0] + &(&(&s * &self.c[1]) + &(&(&s * &s) * &self.c[2]))
    }

    pub fn add(&self, o: &Jet2) -> Jet2 {
        Jet2::new(&self.c[0] + &o.c[0], &self.c[1] + &o.c[1], &self.c[2] + &o.c[2])
    }

    pub fn sub(&self, o: &Jet2) -> Jet2 {
        Jet2::new(&self.c[0] - &o.c[0], &self.c[1] - &o.c[1], &self.c[2] - &o.c[2])
    }

    pub fn neg(&self) -> Jet2 {
        Jet2::new(-&self.c[0], -&self.c[1], -&self.c[2])
    }

    pub fn mul(&self, o: &Jet2) -> Jet2 {
        let a = &self.c;
        let b = &o.c;
        Jet2::new(
            &a[0] * &b[0],
            &(&a[0] * &b[1]) + &(&a[1] * &b[0]),
            &(&(&a[0] * &b[2]) + &(&a[1] * &b[1])) + &(&a[2] * &b[0]),
        )
    }

    pub fn scale(&self, p: &Poly) -> Jet2 {
        Jet2::new(&self.c[0] * p, &self.c[1] * p, &self.c[2] * p)
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|p| p.is_zero())
    }

    /// `(c0 + c1 s + c2 s²)^r` for rational `r`; requires `c0 = 1`.
    pub fn pow_q(&self, r: &Q) -> Option<Jet2> {
        if self.c[0] != Poly::one() {
            return None;
        }
        let half = qf(1, 2);
        let c1 = self.c[1].scale(r);
        let c2 = &self.c[2].scale(r) + &(&self.c[1] * &self.c[1]).scale(&(r * (r - Q::one()) * half));
        Some(Jet2::new(Poly::one(), c1, c2))
    }
}

/// Determinant of a square matrix of jets by cofactor expansion.
pub fn jet_det(m: &[Vec<Jet2>]) -> Jet2 {
    let n = m.len();
    match n {
        0 => Jet2::one(),
        1 => m[0][0].clone(),
        _ => {
            let mut acc = Jet2::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Jet2>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(k, _)| *k != j)
                            .map(|(_, x)| x.clone())
                            .collect()
                    })
                    .collect();
                let t = m[0][j].mul(&jet_det(&minor));
                acc = if j % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
            }
            acc
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerConvention {
    /// `(e^I, e^I) = 1` for increasing multi-indices.
    Unit,
    /// `k!` times the unit convention.
    Factorial,
}

/// Frozen convention; it reproduces the first-order pairing table.
pub const INNER_CONVENTION: InnerConvention = InnerConvention::Unit;

/// Inner product of two cone-frame k-forms in a perturbed metric given by the
/// inverse-metric jet `ginv` (7×7 over slots 0..=6), times the volume-ratio jet.
pub fn inner_perturbed(
    alpha: &Form,
    beta: &Form,
    ginv: &[Vec<Jet2>],
    volratio: &Jet2,
    conv: InnerConvention,
) -> Result<Jet2, FormError> {
    let ka = alpha.degree().unwrap_or(0);
    let kb = beta.degree().unwrap_or(0);
    if !alpha.is_zero() && !beta.is_zero() && ka != kb {
        return Err(FormError::DegreeMismatch(ka, kb));
    }
    let mut acc = Jet2::zero();
    for (ma, pa) in alpha.terms() {
        let ia = slots_of(*ma);
        for (mb, pb) in beta.terms() {
            let ib = slots_of(*mb);
            let minor: Vec<Vec<Jet2>> = ia
                .iter()
                .map(|&i| ib.iter().map(|&j| ginv[i][j].clone()).collect())
                .collect();
            let d = jet_det(&minor);
            if d.is_zero() {
                continue;
            }
            acc = acc.add(&d.scale(&(pa * pb)));
        }
    }
    let mut out = acc.mul(volratio);
    if conv == InnerConvention::Factorial {
        let f: i64 = (1..=ka as i64).product();
        out = out.scale(&Poly::int(f));
    }
    Ok(out)
}

/// Exact rank of a rational matrix (row reduction).
pub fn rank_q(mut rows: Vec<Vec<Q>>) -> usize {
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, piv);
        let p = rows[rank][col].clone();
        for c in col..ncols {
            rows[rank][c] = &rows[rank][c] / &p;
        }
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let f = rows[r][col].clone();
                for c in col..ncols {
                    let t = &rows[rank][c] * &f;
                    rows[r][c] -= t;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// All increasing k-subsets of the given slot mask, as masks.
pub fn basis_masks(space: u16, k: usize) -> Vec<u16> {
    let mut out: Vec<u16> = (0u16..1 << NSLOTS)
        .filter(|m| m & !space == 0 && m.count_ones() as usize == k)
        .collect();
    out.sort_by_key(|m| slots_of(*m));
    out
}

/// Matrix of a linear map on constant-coefficient forms, in the basis
/// `basis_masks(space, k)`; column j is the image of basis element j.
pub fn linear_map_matrix<F: Fn(&Form) -> Form>(space: u16, k: usize, kout: usize, f: F) -> Vec<Vec<Q>> {
    let inb = basis_masks(space, k);
    let outb = basis_masks(space, kout);
    let mut m = vec![vec![Q::zero(); inb.len()]; outb.len()];
    for (j, &mj) in inb.iter().enumerate() {
        let img = f(&Form::mono(mj, Poly::one()));
        for (i, &mi) in outb.iter().enumerate() {
            let c = img.get(mi);
            m[i][j] = c.as_constant().expect("constant-coefficient image");
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e1_wedge_e1_vanishes() {
        assert!(Form::e(&[1]).wedge(&Form::e(&[1])).is_zero());
    }

    #[test]
    fn omega_cubed() {
        let w = omega();
        assert_eq!(w.wedge(&w).wedge(&w), Form::e(&[1, 2, 3, 4, 5, 6]).scale_i(6));
    }

    #[test]
    fn contract_examples() {
        assert_eq!(Form::e(&[1, 2]).contract(1), Form::e(&[2]));
        assert_eq!(re_omega().contract(1), -Form::e(&[3, 6]) - Form::e(&[4, 5]));
    }

    #[test]
    fn star6_examples() {
        let vol = Form::e(&[1, 2, 3, 4, 5, 6]);
        assert_eq!(Form::scalar(Poly::one()).star6().unwrap(), vol);
        assert_eq!(vol.star6().unwrap(), Form::scalar(Poly::one()));
        let w = omega();
        assert_eq!(w.star6().unwrap(), w.wedge(&w).scale_q(&qf(1, 2)));
        assert_eq!(Form::e(&[7]).star6(), Err(FormError::VerticalComponent));
    }

    #[test]
    fn omega_sq_wedge_eta_vanishes() {
        let w = omega();
        assert!(w.wedge(&w).scale_q(&qf(1, 2)).wedge(&eta()).is_zero());
    }

    #[test]
    fn basis_masks_counts() {
        assert_eq!(basis_masks(TANGENT6, 2).len(), 15);
        assert_eq!(basis_masks(CONE7, 3).len(), 35);
        assert_eq!(basis_masks(CONE7, 0), vec![0]);
    }

    #[test]
    fn projections_on_generators() {
        assert_eq!(project2(&omega(), Type2::One), omega());
        assert_eq!(project2(&eta(), Type2::Eight), eta());
        let g = re_omega().contract(1);
        assert_eq!(project2(&g, Type2::Six), g);
    }

    #[test]
    fn alpha_of_contracted_re_omega() {
        let g = re_omega().contract(3);
        assert_eq!(alpha_op(&g), Form::e(&[3]).scale_i(2));
        assert!(alpha_op(&eta()).is_zero());
    }

    #[test]
    fn jet_pow_ninth() {
        let j = Jet2::new(Poly::one(), Poly::x(1), Poly::x(2));
        let r = j.pow_q(&qf(-1, 9)).unwrap();
        let mut p = Jet2::one();
        for _ in 0..9 {
            p = p.mul(&r);
        }
        assert_eq!(p.mul(&j), Jet2::one());
    }

    #[test]
    fn identity_metric_inner() {
        let id: Vec<Vec<Jet2>> = (0..7)
            .map(|i| (0..7).map(|j| if i == j { Jet2::one() } else { Jet2::zero() }).collect())
            .collect();
        let e12 = Form::e(&[1, 2]);
        let r = inner_perturbed(&e12, &e12, &id, &Jet2::one(), InnerConvention::Unit).unwrap();
        assert_eq!(r, Jet2::one());
    }
}
