use g2cone::calculus::Calculus;
use g2cone::obstruction::{
    adjoint, diag_zeta, from_matrix, haar_sample, obstruction_integral, to_matrix, ObstructionError, MC_MIN_SAMPLES,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const N: usize = 200_000;

#[test]
fn zero_zeta_gives_exactly_zero() {
    let e = obstruction_integral(Calculus::calibrated(), &[0.0; 8], 5_000, 1).unwrap();
    assert_eq!(e.mean, 0.0);
    assert_eq!(e.stderr, 0.0);
    assert_eq!(e.z_score, 0.0);
}

#[test]
fn too_few_samples_is_an_error() {
    let r = obstruction_integral(Calculus::calibrated(), &diag_zeta(), MC_MIN_SAMPLES - 1, 1);
    assert!(matches!(r, Err(ObstructionError::TooFewSamples(_))));
}

#[test]
fn result_is_independent_of_thread_count() {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| obstruction_integral(Calculus::calibrated(), &diag_zeta(), 50_000, 99).unwrap())
    };
    let (a, b) = (run(1), run(3));
    assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
}

#[test]
fn default_zeta_is_nonzero_and_conjugation_invariant() {
    let calc = Calculus::calibrated();
    let z = diag_zeta();
    let a = obstruction_integral(calc, &z, N, 7).unwrap();
    assert!(a.z_score.abs() > 5.0, "{a:?}");
    let g = haar_sample(&mut ChaCha8Rng::seed_from_u64(5));
    let zg = from_matrix(&adjoint(&g, &to_matrix(&z)));
    let b = obstruction_integral(calc, &zg, N, 8).unwrap();
    let sigma = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
    assert!((a.mean - b.mean).abs() < 5.0 * sigma, "{} vs {} (σ {sigma})", a.mean, b.mean);
}
