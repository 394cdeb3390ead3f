mod common;

use g2cone::calculus::Calculus;
use g2cone::obstruction::{assembled_cubic, cubic_integrand_raw, expected_cubic};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn dense_tensor_oracle_reproduces_the_assembled_cubic() {
    let calc = Calculus::calibrated();
    let p = cubic_integrand_raw(calc).unwrap();
    assert_eq!(p, assembled_cubic());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..4 {
        let x: [f64; 6] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let vals = common::point(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), x);
        let oracle = common::cubic_oracle(calc, &vals);
        let sym = p.eval_f64(&vals);
        assert!((oracle - sym).abs() < 1e-6 * (1.0 + sym.abs()), "oracle {oracle} vs {sym}");
    }
}

#[test]
fn oracle_separates_the_two_closed_forms() {
    // On a point with v = 0 only the triple product survives, where the
    // candidates differ by a factor of two.
    let calc = Calculus::calibrated();
    let vals = common::point(0.0, 0.0, [0.3, -0.7, 0.5, 0.2, -0.4, 0.9]);
    let oracle = common::cubic_oracle(calc, &vals);
    let ours = assembled_cubic().eval_f64(&vals);
    let other = expected_cubic().eval_f64(&vals);
    assert!(ours.abs() > 1e-2);
    assert!((oracle - ours).abs() < 1e-6);
    assert!((oracle - other).abs() > 0.5 * ours.abs());
}
