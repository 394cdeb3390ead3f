mod common;

use common::{norm_constant, oracle_step3, oracle_step4, oracle_step5, prefix, random_forcing, sup_diff};
use g2cone::spectral_ode::{
    left_derivatives, solve_scalar, solve_step4, solve_step5, GridFunction, Kind, ModeSpec, OdeError,
    Robin,
};

const H: f64 = 0.01;
const TMAX: f64 = 30.0;
const SEEDS: [u64; 5] = [11, 12, 13, 14, 15];

#[test]
fn step3_matches_fd_oracle() {
    for mu in [18.0, 6.0] {
        for (k, seed) in SEEDS.iter().enumerate() {
            let f = random_forcing(*seed, H, TMAX);
            let bc = if k % 2 == 0 { Some(0.3 * k as f64 - 0.5) } else { None };
            let u = solve_scalar(mu, &f, bc.map(Robin::step3)).unwrap();
            let o = oracle_step3(mu, f.values(), H, bc);
            let err = sup_diff(u.values(), &o);
            assert!(err <= 10.0 * H * H, "mu {mu} seed {seed}: {err:e}");
            if let Some(g) = bc {
                let [u0, u1, _] = left_derivatives(u.values(), H);
                assert!((-9.0 * u0 + u1 - g).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn step4_matches_fd_oracle_on_both_branches() {
    for lambda in [10.0, 30.0] {
        for (k, seed) in SEEDS.iter().enumerate() {
            let f = random_forcing(*seed, H, TMAX);
            let datum = 0.25 * k as f64 - 0.4;
            let w = solve_step4(lambda, &f, datum).unwrap();
            let o = oracle_step4(lambda, f.values(), H, datum);
            let err = sup_diff(w.values(), &o);
            assert!(err <= 10.0 * H * H, "lambda {lambda} seed {seed}: {err:e}");
            let [w0, w1, w2] = left_derivatives(w.values(), H);
            let b = (lambda - 18.0) * w0 - w2 + 9.0 * w1;
            assert!((b - datum).abs() < 1e-8, "boundary functional {b} vs {datum}");
        }
    }
}

#[test]
fn step5_matches_fd_oracle_on_both_branches() {
    for lambda in [6.0, 22.0] {
        for seed in SEEDS {
            let f = random_forcing(seed, H, TMAX);
            let w = solve_step5(lambda, &f).unwrap();
            let o = oracle_step5(lambda, f.values(), H);
            let err = sup_diff(w.values(), &o);
            assert!(err <= 10.0 * H * H, "lambda {lambda} seed {seed}: {err:e}");
        }
    }
}

#[test]
fn oracle_error_is_second_order() {
    // Halving δ divides the kernel/oracle gap by about four.
    let gap = |h: f64| {
        let f = GridFunction::from_fn(h, GridFunction::points_for(TMAX, h), |t| (-1.3 * t).exp() * (2.0 * t).cos());
        let w = solve_step5(22.0, &f).unwrap();
        sup_diff(w.values(), &oracle_step5(22.0, f.values(), h))
    };
    let ratio = gap(0.02) / gap(0.01);
    assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn resonance_fires_exactly_at_18_and_12() {
    let f = random_forcing(1, H, TMAX);
    assert_eq!(ModeSpec::new(18.0, Kind::Step4), Err(OdeError::Resonance(18.0)));
    assert_eq!(ModeSpec::new(12.0, Kind::Step5), Err(OdeError::Resonance(12.0)));
    assert!(ModeSpec::new(18.0, Kind::Step5).is_ok());
    assert!(ModeSpec::new(12.0, Kind::Step4).is_ok());
    assert_eq!(solve_step4(18.0, &f, 0.0), Err(OdeError::Resonance(18.0)));
    assert_eq!(solve_step5(12.0, &f), Err(OdeError::Resonance(12.0)));
    for eps in [1e-3, -1e-3] {
        assert!(solve_step4(18.0 + eps, &f, 0.0).is_ok());
        assert!(solve_step5(12.0 + eps, &f).is_ok());
    }
}

#[test]
fn norm_constants_are_stable_in_t() {
    let q = 1.25;
    for (kind, lambda) in [(Kind::Step3, 18.0), (Kind::Step4, 10.0), (Kind::Step4, 30.0), (Kind::Step5, 6.0), (Kind::Step5, 22.0)] {
        let cs: Vec<f64> = [10.0, 20.0, 40.0, 80.0].iter().map(|&t| norm_constant(kind, lambda, t, q)).collect();
        let (lo, hi) = cs.iter().fold((f64::MAX, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
        assert!(hi / lo < 1.2, "{kind:?} {lambda}: {cs:?}");
    }
}

#[test]
fn window_norms_decay() {
    // sup over windows starting at t₀ tends to zero as t₀ grows.
    let f = GridFunction::from_fn(0.02, GridFunction::points_for(200.0, 0.02), |t| (10.0 + t).powf(-1.25));
    let u = solve_step5(22.0, &f).unwrap_err();
    assert!(matches!(u, OdeError::TailTruncation { .. }));
    let opts = g2cone::spectral_ode::SolveOptions { tail_tol: None };
    let u = g2cone::spectral_ode::solve_step5_with(22.0, &f, &opts).unwrap();
    let u = prefix(&u, 150.0);
    let w: Vec<f64> = [0.0, 25.0, 50.0, 100.0].iter().map(|&s| g2cone::spectral_ode::weighted_norm_from(&u, 0.0, 10.0, s)).collect();
    assert!(w.windows(2).all(|p| p[1] < p[0]), "{w:?}");
    assert!(w[3] < 0.2 * w[0]);
}
