//! Acceptance gate: one line per criterion. Exits non-zero when a criterion
//! outside `KNOWN_RED` fails.

mod common;

use std::time::{Duration, Instant};

use common::{norm_constant, oracle_step3, oracle_step4, oracle_step5, random_forcing, sup_diff};
use g2cone::adams_simon::{fixed_point_solve, scalar_model_collocation, slow_rate_report, AsConfig};
use g2cone::calculus::{killing_identity_report, lie_report, nk_report, Calculus, IdentityReport};
use g2cone::cone::{
    generic_two_form, laplacian14_display, linearization_report, linearization_test_data, two_form_quadratic_identity,
};
use g2cone::liealg::calibrate;
use g2cone::obstruction::{adjoint, diag_zeta, from_matrix, haar_sample, obstruction_integral, to_matrix};
use g2cone::spectral_ode::{left_derivatives, solve_scalar, solve_step4, solve_step5, Kind, ModeSpec, OdeError, Robin};
use g2cone::tables::{tables_report, Fixtures};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The cubic closed form disagrees with two independent evaluations.
const KNOWN_RED: [u32; 1] = [3];

type Outcome = Result<String, String>;

fn suites(reports: &[IdentityReport]) -> Outcome {
    let total: usize = reports.iter().map(|r| r.checks.len()).sum();
    match reports.iter().find_map(|r| r.first_failure().map(|c| (r.suite.clone(), c))) {
        None => Ok(format!("{total} exact identities")),
        Some((suite, c)) => Err(format!("{suite}: {} ({})", c.identity, c.residual.as_deref().unwrap_or(""))),
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion1() -> Outcome {
    let cal = calibrate().map_err(|e| e.to_string())?;
    let calc = Calculus::calibrated();
    suites(&[lie_report(&cal.basis, &cal.sc), nk_report(calc), killing_identity_report(calc)])
}

fn criterion2() -> Outcome {
    let mut r = tables_report(Calculus::calibrated(), &Fixtures::builtin());
    r.checks.retain(|c| c.identity != "cubic integrand");
    ensure(r.checks.len() == 7, || format!("expected 7 table checks, found {}", r.checks.len()))?;
    suites(&[r])
}

fn criterion3() -> Outcome {
    let r = tables_report(Calculus::calibrated(), &Fixtures::builtin());
    let cubic = r.checks.iter().find(|c| c.identity == "cubic integrand").ok_or("cubic check missing")?;
    ensure(cubic.passed(), || format!("residual {}", cubic.residual.as_deref().unwrap_or("")))?;
    Ok("zero polynomial residual".into())
}

fn criterion4() -> Outcome {
    let calc = Calculus::calibrated();
    let (x, eta8) = linearization_test_data();
    let d = laplacian14_display(calc, &x, &eta8).map_err(|e| e.to_string())?;
    ensure(d.matches(), || "Laplacian display differs".into())?;
    suites(&[linearization_report(calc, &x, &eta8)]).map(|s| s + " + display")
}

fn criterion5() -> Outcome {
    let r = two_form_quadratic_identity(&generic_two_form());
    ensure(r.checks.iter().any(|c| c.identity == "rank pi_7 = 7"), || "rank check missing".into())?;
    suites(&[r])
}

fn criterion6() -> Outcome {
    let (h, tmax) = (0.01, 30.0);
    let tol = 10.0 * h * h;
    let mut worst: f64 = 0.0;
    let mut bc_worst: f64 = 0.0;
    for seed in 11..16u64 {
        let f = random_forcing(seed, h, tmax);
        for mu in [18.0, 6.0] {
            let g = 0.1 * seed as f64 - 1.0;
            let u = solve_scalar(mu, &f, Some(Robin::step3(g))).map_err(|e| e.to_string())?;
            worst = worst.max(sup_diff(u.values(), &oracle_step3(mu, f.values(), h, Some(g))));
            let [u0, u1, _] = left_derivatives(u.values(), h);
            bc_worst = bc_worst.max((-9.0 * u0 + u1 - g).abs());
        }
        for lambda in [10.0, 30.0] {
            let datum = 0.05 * seed as f64 - 0.6;
            let w = solve_step4(lambda, &f, datum).map_err(|e| e.to_string())?;
            worst = worst.max(sup_diff(w.values(), &oracle_step4(lambda, f.values(), h, datum)));
            let [w0, w1, w2] = left_derivatives(w.values(), h);
            bc_worst = bc_worst.max(((lambda - 18.0) * w0 - w2 + 9.0 * w1 - datum).abs());
        }
        for lambda in [6.0, 22.0] {
            let w = solve_step5(lambda, &f).map_err(|e| e.to_string())?;
            worst = worst.max(sup_diff(w.values(), &oracle_step5(lambda, f.values(), h)));
        }
    }
    ensure(worst <= tol, || format!("oracle sup-error {worst:.2e} > {tol:.0e}"))?;
    ensure(bc_worst <= 1e-8, || format!("boundary residual {bc_worst:.2e}"))?;
    ensure(
        ModeSpec::new(18.0, Kind::Step4) == Err(OdeError::Resonance(18.0))
            && ModeSpec::new(12.0, Kind::Step5) == Err(OdeError::Resonance(12.0))
            && ModeSpec::new(18.0 + 1e-3, Kind::Step4).is_ok()
            && ModeSpec::new(12.0 - 1e-3, Kind::Step5).is_ok(),
        || "resonance detection".into(),
    )?;
    let mut spread: f64 = 0.0;
    for (kind, lambda) in [(Kind::Step3, 18.0), (Kind::Step4, 10.0), (Kind::Step4, 30.0), (Kind::Step5, 6.0), (Kind::Step5, 22.0)] {
        let cs: Vec<f64> = [10.0, 20.0, 40.0, 80.0].iter().map(|&t| norm_constant(kind, lambda, t, 1.25)).collect();
        let (lo, hi) = cs.iter().fold((f64::MAX, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
        spread = spread.max(hi / lo - 1.0);
    }
    ensure(spread < 0.2, || format!("norm constant variation {:.1}%", 100.0 * spread))?;
    Ok(format!(
        "sup-error {worst:.2e} <= {tol:.0e}, boundary {bc_worst:.1e}, resonance at 18/12, C variation {:.1}%",
        100.0 * spread
    ))
}

fn criterion7() -> Outcome {
    let calc = Calculus::calibrated();
    let (n, seed) = (1_000_000, 20240601);
    let z = diag_zeta();
    let a = obstruction_integral(calc, &z, n, seed).map_err(|e| e.to_string())?;
    ensure(a.mean.abs() > 5.0 * a.stderr, || format!("mean {} stderr {}", a.mean, a.stderr))?;
    let g = haar_sample(&mut ChaCha8Rng::seed_from_u64(1));
    let zg = from_matrix(&adjoint(&g, &to_matrix(&z)));
    let b = obstruction_integral(calc, &zg, n, seed + 1).map_err(|e| e.to_string())?;
    let sigma = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
    let dev = (a.mean - b.mean).abs() / sigma;
    ensure(dev < 5.0, || format!("conjugated mean differs by {dev:.1}σ"))?;
    let zero = obstruction_integral(calc, &[0.0; 8], n, seed).map_err(|e| e.to_string())?;
    ensure(zero.mean == 0.0, || format!("ζ = 0 mean {}", zero.mean))?;
    Ok(format!("mean {:.4} ± {:.4} (z = {:.0}), conjugate within {dev:.2}σ, ζ = 0 exact", a.mean, a.stderr, a.z_score))
}

fn criterion8() -> Outcome {
    let (t0, tmax, h) = (50.0, 200.0, 0.05);
    let u = scalar_model_collocation(t0, tmax, h).map_err(|e| e.to_string())?;
    let idx = |s: f64| ((s - t0) / h).round() as usize;
    let at200 = 200.0 * u[idx(200.0)];
    ensure((at200 - 7.0).abs() <= 0.5, || format!("t·u(200) = {at200}"))?;
    let growth: Vec<f64> = (idx(100.0)..=idx(200.0)).map(|i| (t0 + i as f64 * h).powf(1.1) * u[i]).collect();
    ensure(growth.windows(2).all(|p| p[1] > p[0]), || "t^1.1 u not increasing on [100, 200]".into())?;
    let mut lips = Vec::new();
    for t in [50.0, 100.0] {
        let fp = fixed_point_solve(&AsConfig { t0: t, ..AsConfig::default() }).map_err(|e| e.to_string())?;
        ensure(fp.lipschitz < 1.0, || format!("T = {t}: contraction {}", fp.lipschitz))?;
        ensure(fp.residual_sup <= 1e-6, || format!("T = {t}: residual {:.2e}", fp.residual_sup))?;
        lips.push(fp.lipschitz);
    }
    let coarse = slow_rate_report(&AsConfig::default()).map_err(|e| e.to_string())?.report;
    let fine = slow_rate_report(&AsConfig { grid: 0.025, ..AsConfig::default() }).map_err(|e| e.to_string())?.report;
    ensure((coarse.t_times_u_at_200 - 7.0).abs() <= 0.5, || format!("fixed point t·U(200) = {}", coarse.t_times_u_at_200))?;
    ensure(coarse.polynomial_rate_excluded, || "fixed point t^1.1 U not increasing".into())?;
    let refine = coarse.rate_table.iter().zip(&fine.rate_table).map(|(a, b)| (a.t_times_u - b.t_times_u).abs()).fold(0.0, f64::max);
    ensure(refine < 1e-3, || format!("grid refinement change {refine:.2e}"))?;
    Ok(format!(
        "t·u(200) = {at200:.4}, t^1.1 u increasing, contraction {:.1e}/{:.1e} at T = 50/100, refinement {refine:.1e}",
        lips[0], lips[1]
    ))
}

fn main() {
    let criteria: [(u32, &str, u64, fn() -> Outcome); 8] = [
        (1, "symbolic exactness", 10, criterion1),
        (2, "tables", 60, criterion2),
        (3, "cubic integrand", 60, criterion3),
        (4, "linearization", 60, criterion4),
        (5, "pointwise quadratic identity", 60, criterion5),
        (6, "ODE kernels", 120, criterion6),
        (7, "obstruction integral", 60, criterion7),
        (8, "slow rate", 120, criterion8),
    ];
    let mut unexpected = Vec::new();
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(d) if elapsed > Duration::from_secs(budget) => Err(format!("{d}; over the {budget} s budget")),
            o => o,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d.as_str()),
            Err(e) => ("FAIL", e.as_str()),
        };
        let note = if outcome.is_err() && KNOWN_RED.contains(&id) { " [known red]" } else { "" };
        println!("criterion {id} {tag}{note}: {name}: {detail} ({:.2} s / {budget} s)", elapsed.as_secs_f64());
        if outcome.is_err() && !KNOWN_RED.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        println!("acceptance: unexpected failures in criteria {unexpected:?}");
        std::process::exit(1);
    }
}
