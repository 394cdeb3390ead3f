use g2cone::calculus::Calculus;
use g2cone::cone::{ConeForm, Weight};
use g2cone::forms::{phi7, CONE7, TANGENT6, VERTICAL};
use g2cone::forms::Form;
use g2cone::obstruction::{
    adjoint, assembled_cubic, cyclic_permutation, from_matrix, haar_sample, q0, q0_f64, to_matrix, DeformationVector,
    QSqrt3,
};
use g2cone::poly::{Poly, Var, NVARS};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Small polynomial in `v1, v2, x1..x6` of degree ≤ 2.
fn poly() -> impl Strategy<Value = Poly> {
    let atom = (0u8..9).prop_map(|k| match k {
        0 => Poly::one(),
        1 => Poly::v(1),
        2 => Poly::v(2),
        k => Poly::x(k - 2),
    });
    prop::collection::vec((-3i64..=3, atom.clone(), atom), 1..4)
        .prop_map(|ts| ts.into_iter().fold(Poly::zero(), |acc, (c, a, b)| acc + (&a * &b).scale(&g2cone::poly::q(c))))
}

/// Form of degree `k` supported in `space`.
fn form(space: u16, k: usize) -> impl Strategy<Value = Form> {
    let masks = g2cone::forms::basis_masks(space, k);
    prop::collection::vec((prop::sample::select(masks), poly()), 1..4).prop_map(|ts| {
        let mut f = Form::zero();
        for (m, p) in ts {
            f.add_term(m, p);
        }
        f
    })
}

fn constant_form(space: u16, k: usize) -> impl Strategy<Value = Form> {
    let masks = g2cone::forms::basis_masks(space, k);
    prop::collection::vec((prop::sample::select(masks), -5i64..=5), 1..6).prop_map(|ts| {
        let mut f = Form::zero();
        for (m, c) in ts {
            f.add_term(m, Poly::int(c));
        }
        f
    })
}

fn deformation() -> impl Strategy<Value = DeformationVector> {
    prop::array::uniform8(-3i64..=3).prop_map(DeformationVector::from_ints)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn d_squared_vanishes(f in (0usize..4).prop_flat_map(|k| form(TANGENT6 | VERTICAL, k))) {
        let c = Calculus::calibrated();
        prop_assert!(c.d(&c.d(&f)).is_zero());
    }

    #[test]
    fn leibniz_rule(a in form(TANGENT6, 1), b in form(TANGENT6, 2)) {
        let c = Calculus::calibrated();
        let lhs = c.d(&a.wedge(&b));
        let rhs = c.d(&a).wedge(&b) - a.wedge(&c.d(&b));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn derivations_obey_the_product_rule(j in 0usize..9, p in poly(), q in poly()) {
        let der = &Calculus::calibrated().der;
        let lhs = der.apply(j, &(&p * &q));
        let rhs = &der.apply(j, &p) * &q + &p * &der.apply(j, &q);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn cone_d_squared_vanishes(n in -3i64..6, m in 0i64..2, f in (0usize..4).prop_flat_map(|k| form(CONE7, k))) {
        let c = Calculus::calibrated();
        let x = ConeForm::piece(Weight::sym(n, m), f);
        prop_assert!(x.d(c).d(c).is_zero());
    }

    #[test]
    fn star7_is_an_isometric_involution(b in (0usize..8).prop_flat_map(|k| constant_form(CONE7, k))) {
        let s = b.star7().unwrap();
        prop_assert_eq!(s.norm2(), b.norm2());
        prop_assert_eq!(s.star7().unwrap(), b.clone());
        prop_assert_eq!(b.wedge(&s), Form::mono(CONE7, b.norm2()));
    }

    #[test]
    fn q0_is_symmetric(a in deformation(), b in deformation()) {
        prop_assert_eq!(q0(&a, &b), q0(&b, &a));
    }

    #[test]
    fn q0_is_bilinear(a in deformation(), b in deformation(), c in deformation(), k in -4i64..=4) {
        let s = QSqrt3::int(k);
        prop_assert_eq!(q0(&a.scale(&s).add(&b), &c), q0(&a, &c).scale(&s).add(&q0(&b, &c)));
    }

    #[test]
    fn q0_is_ad_equivariant(a in prop::array::uniform8(-1.0f64..1.0), b in prop::array::uniform8(-1.0f64..1.0), seed in any::<u64>()) {
        let g = haar_sample(&mut ChaCha8Rng::seed_from_u64(seed));
        let ad = |z: &[f64; 8]| from_matrix(&adjoint(&g, &to_matrix(z)));
        let lhs = q0_f64(&ad(&a), &ad(&b));
        let rhs = ad(&q0_f64(&a, &b));
        for k in 0..8 {
            prop_assert!((lhs[k] - rhs[k]).abs() < 1e-12, "{} vs {}", lhs[k], rhs[k]);
        }
    }

    #[test]
    fn cubic_is_invariant_under_the_cyclic_symmetry(vals in prop::array::uniform8(-2.0f64..2.0)) {
        let p = assembled_cubic();
        prop_assert_eq!(cyclic_permutation(&p), p.clone());
        let at = |v1: f64, v2: f64, x: [f64; 6]| {
            let mut point = [0.0; NVARS];
            point[Var::V1.index()] = v1;
            point[Var::V2.index()] = v2;
            for k in 0..6 {
                point[Var::X(k as u8 + 1).index()] = x[k];
            }
            p.eval_f64(&point)
        };
        let [v1, v2, x1, x2, x3, x4, x5, x6] = vals;
        // (x1,x2) -> (x3,x4) -> (x5,x6), v1 -> v3 -> v2 -> v1.
        let a = at(v1, v2, [x1, x2, x3, x4, x5, x6]);
        let b = at(-v1 - v2, v1, [x3, x4, x5, x6, x1, x2]);
        prop_assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()), "{} vs {}", a, b);
    }
}

#[test]
fn phi_has_unit_norm_squared_seven() {
    assert_eq!(phi7().norm2(), Poly::int(7));
}
