//! Exterior derivative, codifferential and Laplacian for invariant-coefficient
//! forms on SU(3), and their restriction to forms projectable to `M`.

use std::sync::OnceLock;

use serde::Serialize;

use crate::forms::{
    alpha_op, eta, j_one, killing_k, project2, re_omega, slots_of, Form, Type2, NSLOTS, VERTICAL,
};
use crate::liealg::{calibrate, Derivations, LieBasis, StructureConstants};
use crate::poly::{Poly, Q};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum CalcError {
    #[error("form has components along the fibre directions h1..h3")]
    VerticalComponent,
    #[error("form is not projectable to M")]
    NotProjectable,
    #[error("identity failed: {0}")]
    IdentityFailed(String),
}

#[derive(Clone, Debug)]
pub struct Calculus {
    pub der: Derivations,
    /// `d(e^I)` for every basis mask.
    d_mono: Vec<Form>,
}

impl Calculus {
    /// Slot `k+1` carries the coframe dual to basis element `k`; slot 0
    /// (the cone's `e0`) is closed.
    pub fn new(sc: &StructureConstants, mc: i8) -> Calculus {
        let mut de1 = vec![Form::zero(); NSLOTS];
        for k in 0..9 {
            let mut f = Form::zero();
            for a in 0..9 {
                for b in (a + 1)..9 {
                    let c = &sc.c[a][b][k];
                    if *c != Q::from_integer(0.into()) {
                        let coeff = if mc < 0 { -c.clone() } else { c.clone() };
                        f = f + Form::e(&[a + 1, b + 1]).scale(&Poly::constant(coeff));
                    }
                }
            }
            de1[k + 1] = f;
        }
        let mut d_mono = vec![Form::zero(); 1 << NSLOTS];
        for mask in 1u16..(1 << NSLOTS) {
            let i = mask.trailing_zeros() as usize;
            let rest = mask & (mask - 1);
            let e_rest = Form::mono(rest, Poly::one());
            let first = de1[i].wedge(&e_rest);
            let second = Form::e(&[i]).wedge(&d_mono[rest as usize]);
            d_mono[mask as usize] = first - second;
        }
        Calculus { der: Derivations::new(sc), d_mono }
    }

    /// The calibrated calculus, built once.
    pub fn calibrated() -> &'static Calculus {
        static CALC: OnceLock<Calculus> = OnceLock::new();
        CALC.get_or_init(|| {
            let cal = calibrate().expect("calibration");
            Calculus::new(&cal.sc, cal.basis.mc)
        })
    }

    pub fn d_fn(&self, p: &Poly) -> Form {
        let mut out = Form::zero();
        for j in 0..9 {
            let c = self.der.apply(j, p);
            if !c.is_zero() {
                out.add_term(1 << (j + 1), c);
            }
        }
        out
    }

    pub fn d(&self, f: &Form) -> Form {
        let mut out = Form::zero();
        for (m, p) in f.terms() {
            let dp = self.d_fn(p);
            if !dp.is_zero() {
                out = out + dp.wedge(&Form::mono(*m, Poly::one()));
            }
            let dm = &self.d_mono[*m as usize];
            if !dm.is_zero() {
                out = out + dm.scale(p);
            }
        }
        out
    }

    /// No `h` components and annihilated by the Lie derivatives along `h_j`.
    pub fn is_projectable(&self, f: &Form) -> bool {
        if f.has_vertical() || f.support() & 1 != 0 {
            return false;
        }
        let df = self.d(f);
        (7..=9).all(|s| df.contract(s).is_zero())
    }

    fn require_projectable(&self, f: &Form) -> Result<(), CalcError> {
        if f.has_vertical() {
            return Err(CalcError::VerticalComponent);
        }
        if !self.is_projectable(f) {
            return Err(CalcError::NotProjectable);
        }
        Ok(())
    }

    /// `d* = -*d*` on `M`.
    pub fn codiff(&self, f: &Form) -> Result<Form, CalcError> {
        self.require_projectable(f)?;
        let s = f.star6().map_err(|_| CalcError::VerticalComponent)?;
        let ds = self.d(&s);
        if ds.support() & VERTICAL != 0 {
            return Err(CalcError::NotProjectable);
        }
        Ok(-ds.star6().map_err(|_| CalcError::VerticalComponent)?)
    }

    /// `Δ = dd* + d*d` on `M`.
    pub fn laplacian(&self, f: &Form) -> Result<Form, CalcError> {
        let a = self.d(&self.codiff(f)?);
        let b = self.codiff(&self.d(f))?;
        Ok(a + b)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub identity: String,
    /// `"pass"` or `"fail"`.
    pub status: String,
    /// Canonical serialization of the residual form when the check failed.
    pub residual: Option<String>,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.status == "pass"
    }

    /// Check whose residual is a plain description.
    pub fn from_bool(identity: &str, ok: bool, residual: impl FnOnce() -> String) -> IdentityCheck {
        IdentityCheck {
            identity: identity.into(),
            status: if ok { "pass" } else { "fail" }.into(),
            residual: if ok { None } else { Some(residual()) },
        }
    }

    pub fn new(identity: &str, residual: Result<Form, CalcError>) -> IdentityCheck {
        match residual {
            Ok(r) if r.is_zero() => IdentityCheck { identity: identity.into(), status: "pass".into(), residual: None },
            Ok(r) => IdentityCheck {
                identity: identity.into(),
                status: "fail".into(),
                residual: Some(r.to_canonical()),
            },
            Err(e) => IdentityCheck {
                identity: identity.into(),
                status: "fail".into(),
                residual: Some(format!("error: {e}")),
            },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub suite: String,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }

    pub fn first_failure(&self) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| !c.passed())
    }

    pub fn into_result(self) -> Result<IdentityReport, CalcError> {
        match self.first_failure() {
            Some(c) => Err(CalcError::IdentityFailed(c.identity.clone())),
            None => Ok(self),
        }
    }
}

/// Basis and structure-constant facts. `sc` may come from an external table;
/// it is compared against the brackets of `basis`.
pub fn lie_report(basis: &LieBasis, sc: &StructureConstants) -> IdentityReport {
    use crate::liealg::{bracket, inner, GaussRational, Matrix3};
    let zero = Q::from_integer(0.into());
    let m = &basis.mats;
    let combo = |coeffs: &[Q]| {
        let mut acc = Matrix3::zero();
        for (k, c) in coeffs.iter().enumerate() {
            acc = &acc + &m[k].scale_q(c);
        }
        acc
    };
    let mut bracket_ok = true;
    let mut first_bad = String::new();
    for i in 0..9 {
        for j in 0..9 {
            if bracket(&m[i], &m[j]) != combo(&sc.c[i][j]) {
                if bracket_ok {
                    first_bad = format!("[b{}, b{}]", i + 1, j + 1);
                }
                bracket_ok = false;
            }
        }
    }
    let gram_ok = (0..9).all(|i| {
        (0..9).all(|j| {
            let want = if i != j {
                zero.clone()
            } else {
                basis.norm2(i)
            };
            inner(&m[i], &m[j]) == want
        })
    });
    let h_sum = &(&m[6] + &m[7]) + &m[8];
    let e12 = bracket(&m[0], &m[1]);
    let two = GaussRational::real(2);
    let der = Derivations::new(sc);
    let trace_poly = Poly::var(crate::poly::Var::V1) + Poly::var(crate::poly::Var::V2) + Poly::v(3);
    let checks = vec![
        IdentityCheck::from_bool("c antisymmetric", sc.antisymmetry_defect() == zero, || {
            format!("defect {}", sc.antisymmetry_defect())
        }),
        IdentityCheck::from_bool("Jacobi identity", sc.jacobi_defect() == zero, || {
            format!("defect {}", sc.jacobi_defect())
        }),
        IdentityCheck::from_bool("constants reproduce the matrix brackets", bracket_ok, || format!("first mismatch at {first_bad}")),
        IdentityCheck::from_bool("[e1, e2] = 2(h1 - h2)", e12 == (&m[6] - &m[7]).scale(&two), || format!("{e12:?}")),
        IdentityCheck::from_bool("[h1, h2] = 0", bracket(&m[6], &m[7]).is_zero(), String::new),
        IdentityCheck::from_bool("basis anti-Hermitian", m.iter().all(|x| x.is_anti_hermitian()), String::new),
        IdentityCheck::from_bool("h1 + h2 + h3 = i Id", h_sum == Matrix3::identity().scale(&GaussRational::imag(1)), String::new),
        IdentityCheck::from_bool("Gram matrix diag(1,1,1,1,1,1,1/2,1/2,1/2)", gram_ok, String::new),
        IdentityCheck::from_bool("derivatives of v1+v2+v3 vanish", (0..9).all(|j| der.apply(j, &trace_poly).is_zero()), String::new),
    ];
    IdentityReport { suite: "lie".into(), checks }
}

/// The nearly-Kähler identities and the `η` facts.
pub fn nk_report(c: &Calculus) -> IdentityReport {
    let w = crate::forms::omega();
    let im = crate::forms::im_omega();
    let e = eta();
    let checks = vec![
        IdentityCheck::new("d omega = 3 Re Omega", Ok(c.d(&w) - re_omega().scale_i(3))),
        IdentityCheck::new("d Im Omega = -2 omega^2", Ok(c.d(&im) + w.wedge(&w).scale_i(2))),
        IdentityCheck::new("d eta display", Ok(c.d(&e) - crate::liealg::expected_d_eta())),
        IdentityCheck::new("d* eta = 0", c.codiff(&e)),
        IdentityCheck::new("Laplacian eta = 12 eta", c.laplacian(&e).map(|l| l - e.scale_i(12))),
        IdentityCheck::new("eta primitive (1,1)", Ok(project2(&e, Type2::Eight) - e.clone())),
    ];
    IdentityReport { suite: "nk".into(), checks }
}

/// The Killing-field identities for `K = Σ x_i e^i`. The coordinate
/// functions are linear in the generator, so this covers every ζ.
pub fn killing_identity_report(c: &Calculus) -> IdentityReport {
    let k = killing_k();
    let jk = j_one(&k);
    let djk = c.d(&jk);
    let ro = re_omega();
    let k_ro = k_contract_re_omega(&k, &ro);
    let step3 = (|| -> Result<Form, CalcError> {
        let lap = c.laplacian(&jk)?;
        Ok(lap - c.codiff(&k_ro)? - jk.scale_i(24))
    })();
    let checks = vec![
        IdentityCheck::new("d* K = 0", c.codiff(&k)),
        IdentityCheck::new("d* (JK) = 0", c.codiff(&jk)),
        IdentityCheck::new("alpha(dJK) = -6K", Ok(alpha_op(&djk) + k.scale_i(6))),
        IdentityCheck::new("pi_8(dJK) = 0", Ok(project2(&djk, Type2::Eight))),
        IdentityCheck::new("Laplacian(JK) = 18 JK", c.laplacian(&jk).map(|l| l - jk.scale_i(18))),
        IdentityCheck::new("(dd*+d*d)(JK) - d*(K _| Re Omega) = 24 JK", step3),
        IdentityCheck::new(
            "dJK = -(1/3)(d*K) omega + (1/2) alpha(dJK) _| Re Omega + pi_8(dJK)",
            c.codiff(&k).map(|dk| {
                let dk0 = dk.get(0);
                let w = crate::forms::omega();
                let rhs = w.scale(&dk0).scale_q(&crate::poly::qf(-1, 3))
                    + k_contract_re_omega(&alpha_op(&djk), &ro).scale_q(&crate::poly::qf(1, 2))
                    + project2(&djk, Type2::Eight);
                djk.clone() - rhs
            }),
        ),
    ];
    IdentityReport { suite: "killing".into(), checks }
}

/// `X ⌟ ReΩ` for a tangential 1-form `X` read as a vector.
pub fn k_contract_re_omega(x: &Form, ro: &Form) -> Form {
    ro.contract_vec(x)
}

/// `d*αdJ = -4d*` applied to a projectable 1-form.
pub fn alpha_dj_identity(c: &Calculus, x: &Form) -> Result<Form, CalcError> {
    let lhs = c.codiff(&alpha_op(&c.d(&j_one(x))))?;
    let rhs = c.codiff(x)?.scale_i(-4);
    Ok(lhs - rhs)
}

/// Slot list helper for reports.
pub fn describe_mask(m: u16) -> Vec<usize> {
    slots_of(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{im_omega, omega};

    #[test]
    fn calibration_is_all_plus_with_negative_mc() {
        let cal = calibrate().unwrap();
        assert_eq!(cal.basis.sigma, [1; 6]);
        assert_eq!(cal.basis.mc, -1);
    }

    #[test]
    fn lie_report_passes_and_detects_corruption() {
        let cal = calibrate().unwrap();
        let r = lie_report(&cal.basis, &cal.sc);
        assert!(r.passed(), "{:?}", r.first_failure());
        let mut bad = cal.sc.clone();
        bad.c[0][1][6] = -bad.c[0][1][6].clone();
        assert!(!lie_report(&cal.basis, &bad).passed());
    }

    #[test]
    fn nearly_kahler_and_eta() {
        let r = nk_report(Calculus::calibrated());
        assert!(r.passed(), "{:?}", r.first_failure());
    }

    #[test]
    fn killing_report_passes() {
        let r = killing_identity_report(Calculus::calibrated());
        assert!(r.passed(), "{:?}", r.first_failure());
    }

    #[test]
    fn d_squared_on_structure_forms() {
        let c = Calculus::calibrated();
        for f in [omega(), im_omega(), eta(), killing_k(), j_one(&killing_k())] {
            assert!(c.d(&c.d(&f)).is_zero());
        }
    }

    #[test]
    fn projectability_examples() {
        let c = Calculus::calibrated();
        assert!(c.is_projectable(&omega()));
        assert!(c.is_projectable(&eta()));
        assert!(c.is_projectable(&killing_k()));
        assert!(!c.is_projectable(&Form::e(&[1]).scale(&Poly::x(1))));
        assert_eq!(c.codiff(&Form::e(&[7])), Err(CalcError::VerticalComponent));
    }

    #[test]
    fn constant_forms() {
        let c = Calculus::calibrated();
        assert!(c.codiff(&omega().scale_i(5)).unwrap().is_zero());
        assert!(c.laplacian(&Form::scalar(Poly::one())).unwrap().is_zero());
    }

    #[test]
    fn alpha_dj_on_killing() {
        let c = Calculus::calibrated();
        assert!(alpha_dj_identity(c, &killing_k()).unwrap().is_zero());
    }
}
