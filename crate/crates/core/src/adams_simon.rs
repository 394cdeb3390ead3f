//! Galerkin-reduced slow-decay system: the resonant 𝒟 ≅ su(3) block with
//! profile `7(T+t)⁻¹v`, a finite list of perpendicular modes, the
//! contraction-mapping fixed point, and the `(T+t)⁻¹` rate of the scalar
//! model `−u'' + 7u' + u² = 0`.
//!
//! Time is the shifted variable `s = T + t`. Rates are reported in `s` and in
//! the coefficient of `v`, which makes them independent of `c`.

use nalgebra::{DMatrix, DVector, SMatrix, SymmetricEigen};
use serde::Serialize;

use crate::band::{BandError, BandMatrix};
use crate::obstruction::{q0, q0_f64, DeformationVector, QSqrt3};
use crate::poly::Q;
use crate::spectral_ode::{solve_step5_with, weighted_norm, GridFunction, OdeError, SolveOptions};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum AsError {
    #[error("no contraction: measured Lipschitz factor {0:.3} >= 1 (T too small)")]
    NoContraction(f64),
    #[error("fixed-point iteration diverged at iteration {0}")]
    Diverged(usize),
    #[error("rate mismatch: {0}")]
    RateMismatch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Band(#[from] BandError),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsConfig {
    #[serde(rename = "T")]
    pub t0: f64,
    pub tmax: f64,
    pub grid: f64,
    pub q: f64,
    /// `Q = c·Q₀`; `c = 0` keeps the linearization about the `c = 1` profile
    /// and drops `Q(w, w)`.
    pub c: f64,
    pub perp_lambdas: Vec<f64>,
    /// Synthetic coupling `κ_j`: forcing `κ_j|U|²` on mode `j` and
    /// `Σ κ_j w⊥_j U` in the 𝒟 equation.
    pub coupling: Vec<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub min_t: f64,
}

impl Default for AsConfig {
    fn default() -> Self {
        AsConfig {
            t0: 50.0,
            tmax: 200.0,
            grid: 0.05,
            q: 1.25,
            c: 1.0,
            perp_lambdas: vec![6.0, 22.0, 30.0],
            coupling: vec![0.0; 3],
            tol: 1e-12,
            max_iter: 200,
            min_t: 5.0,
        }
    }
}

impl AsConfig {
    /// 𝒟 block only.
    pub fn scalar(t0: f64) -> AsConfig {
        AsConfig { t0, perp_lambdas: vec![], coupling: vec![], ..AsConfig::default() }
    }

    pub fn validate(&self) -> Result<(), AsError> {
        let bad = |m: &str| Err(AsError::InvalidConfig(m.into()));
        if !(self.q > 1.0 && self.q < 1.5) {
            return bad("q must lie in (1, 3/2)");
        }
        if !(self.t0 >= self.min_t) {
            return bad("T below the configured minimum");
        }
        if !(self.grid > 0.0 && self.tmax > 0.0) || self.tmax / self.grid < 16.0 {
            return bad("grid too coarse for tmax");
        }
        if self.coupling.len() != self.perp_lambdas.len() {
            return bad("coupling and perp_lambdas differ in length");
        }
        if self.perp_lambdas.iter().any(|&l| l == 12.0 || l < 0.0) {
            return bad("perpendicular eigenvalues must be >= 0 and != 12");
        }
        if !self.c.is_finite() {
            return bad("c must be finite");
        }
        Ok(())
    }

    pub fn points(&self) -> usize {
        GridFunction::points_for(self.tmax, self.grid)
    }
}

/// `v = v₀/(2c)` with `v₀ = e2+e4+e6`, so that `c·Q₀(v, v) = v`; `v₀/2` when
/// `c = 0`.
pub fn profile_v(c: f64) -> [f64; 8] {
    let v0 = DeformationVector::v0().to_f64();
    let k = if c == 0.0 { 0.5 } else { 0.5 / c };
    v0.map(|x| k * x)
}

/// Coefficient of `(T+t)⁻²` in the bare-profile residual, exactly:
/// `−49 v + 49 c Q₀(v, v)`.
pub fn profile_order2_coefficient(c: &Q) -> DeformationVector {
    let inv = QSqrt3::rational(Q::from_integer(1.into()) / (c * Q::from_integer(2.into())));
    let v = DeformationVector::v0().scale(&inv);
    let qvv = q0(&v, &v).scale(&QSqrt3::rational(c * Q::from_integer(49.into())));
    qvv.add(&v.scale(&QSqrt3::int(-49)))
}

/// `M = Q(v, ·) = ½Q₀(v₀, ·)` as a symmetric matrix.
pub fn linear_coupling_matrix() -> SMatrix<f64, 8, 8> {
    let v0 = DeformationVector::v0().to_f64();
    let mut m = SMatrix::<f64, 8, 8>::zeros();
    for j in 0..8 {
        let mut e = [0.0; 8];
        e[j] = 1.0;
        let col = q0_f64(&v0, &e);
        for i in 0..8 {
            m[(i, j)] = 0.5 * col[i];
        }
    }
    (m + m.transpose()) * 0.5
}

#[derive(Clone, Debug)]
struct Modes {
    mu: [f64; 8],
    vecs: [[f64; 8]; 8],
}

impl Modes {
    fn new() -> Modes {
        let e = SymmetricEigen::new(linear_coupling_matrix());
        let mu = std::array::from_fn(|k| e.eigenvalues[k]);
        let vecs = std::array::from_fn(|k| std::array::from_fn(|i| e.eigenvectors[(i, k)]));
        Modes { mu, vecs }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReducedState {
    #[serde(rename = "wT")]
    pub w_t: GridFunction,
    #[serde(rename = "wPerp")]
    pub w_perp: GridFunction,
    #[serde(rename = "T")]
    pub t0: f64,
    pub c: f64,
    pub v: [f64; 8],
    pub perp_lambdas: Vec<f64>,
    pub coupling: Vec<f64>,
}

fn point(g: &GridFunction, i: usize) -> [f64; 8] {
    std::array::from_fn(|k| g.comps[k][i])
}

fn dot(a: &[f64; 8], b: &[f64; 8]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl ReducedState {
    pub fn zero(cfg: &AsConfig) -> ReducedState {
        let n = cfg.points();
        ReducedState {
            w_t: GridFunction::zeros(cfg.grid, n, 8),
            w_perp: GridFunction::zeros(cfg.grid, n, cfg.perp_lambdas.len()),
            t0: cfg.t0,
            c: cfg.c,
            v: profile_v(cfg.c),
            perp_lambdas: cfg.perp_lambdas.clone(),
            coupling: cfg.coupling.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.w_t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn s(&self, i: usize) -> f64 {
        self.t0 + self.w_t.t(i)
    }

    /// `U = 7s⁻¹v + wT`.
    pub fn total(&self, i: usize) -> [f64; 8] {
        let w = point(&self.w_t, i);
        let s = self.s(i);
        std::array::from_fn(|k| 7.0 * self.v[k] / s + w[k])
    }

    /// Coefficient of `v` in `U`.
    pub fn normalized_u(&self, i: usize) -> f64 {
        dot(&self.total(i), &self.v) / dot(&self.v, &self.v)
    }

    /// `‖w⊥‖_{q+1/2} + ‖wT‖_q + ‖∂ₜwT‖_{q+1}`.
    pub fn norm(&self, q: f64) -> f64 {
        weighted_norm(&self.w_perp, q + 0.5, self.t0)
            + weighted_norm(&self.w_t, q, self.t0)
            + weighted_norm(&self.w_t.derivative(1), q + 1.0, self.t0)
    }

    /// `‖·‖` without the derivative terms: `sup (T+t)^{q+1/2}|w⊥| + sup (T+t)^q|wT|`.
    pub fn value_norm(&self, q: f64) -> f64 {
        let weighted = |g: &GridFunction, p: f64| {
            (0..g.len())
                .map(|i| self.s(i).powf(p) * g.comps.iter().map(|c| c[i].abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max)
        };
        weighted(&self.w_perp, q + 0.5) + weighted(&self.w_t, q)
    }

    fn difference(&self, o: &ReducedState) -> ReducedState {
        ReducedState {
            w_t: self.w_t.zip(&o.w_t, |a, b| a - b),
            w_perp: self.w_perp.zip(&o.w_perp, |a, b| a - b),
            ..self.clone()
        }
    }

    fn quad(&self, a: &[f64; 8], b: &[f64; 8]) -> [f64; 8] {
        q0_f64(a, b).map(|x| self.c * x)
    }

    /// `14 s⁻³ v − Q(wT, wT) − Σ κ_j w⊥_j U` at node `i`.
    fn t_forcing(&self, i: usize) -> [f64; 8] {
        let s = self.s(i);
        let w = point(&self.w_t, i);
        let qww = self.quad(&w, &w);
        let u = self.total(i);
        let k: f64 = self.coupling.iter().enumerate().map(|(j, kj)| kj * self.w_perp.comps[j][i]).sum();
        std::array::from_fn(|m| 14.0 * self.v[m] / (s * s * s) - qww[m] - k * u[m])
    }

    /// `κ_j |U|²` at node `i`.
    fn perp_forcing(&self, j: usize, i: usize) -> f64 {
        let u = self.total(i);
        self.coupling[j] * dot(&u, &u)
    }
}

/// Residuals of the 𝒟 equation
/// `−wT'' + 7wT' + 14s⁻¹Q(v, wT) + Q(wT, wT) + R − 14s⁻³v` and of the
/// perpendicular equations `−w'' + 7w' + (λ−12)w − κ|U|²`, with derivatives by
/// fourth-order finite differences. `R` holds the coupling and the exact
/// difference between `c·Q₀(U, U)` and its modeled expansion.
pub fn reduced_residual(state: &ReducedState) -> (GridFunction, GridFunction) {
    let n = state.len();
    let m = linear_coupling_matrix();
    let d1 = state.w_t.derivative(1);
    let d2 = state.w_t.derivative(2);
    let mut rt = GridFunction::zeros(state.w_t.delta, n, 8);
    for i in 0..n {
        let s = state.s(i);
        let w = point(&state.w_t, i);
        let mw = m * nalgebra::SVector::<f64, 8>::from(w);
        let forcing = state.t_forcing(i);
        let qww = state.quad(&w, &w);
        let r13: [f64; 8] = if state.c == 0.0 {
            [0.0; 8]
        } else {
            let u = state.total(i);
            let full = state.quad(&u, &u);
            std::array::from_fn(|k| full[k] - 49.0 * state.v[k] / (s * s) - 14.0 * mw[k] / s - qww[k])
        };
        for k in 0..8 {
            // forcing = 14s⁻³v − Q(w,w) − R₂.
            rt.comps[k][i] = -d2.comps[k][i] + 7.0 * d1.comps[k][i] + 14.0 * mw[k] / s + r13[k] - forcing[k];
        }
    }
    let np = state.perp_lambdas.len();
    let mut rp = GridFunction::zeros(state.w_t.delta, n, np);
    if np > 0 && n >= 6 {
        let p1 = state.w_perp.derivative(1);
        let p2 = state.w_perp.derivative(2);
        for j in 0..np {
            let lam = state.perp_lambdas[j];
            for i in 0..n {
                let w = state.w_perp.comps[j][i];
                rp.comps[j][i] = -p2.comps[j][i] + 7.0 * p1.comps[j][i] + (lam - 12.0) * w - state.perp_forcing(j, i);
            }
        }
    }
    (rt, rp)
}

/// Solves `−w'' + 7w' + 14μ s⁻¹ w = f` on the grid. When `2μ > q` the slow
/// homogeneous solution `s^{-2μ}` is admissible and `w(0) = 0` fixes it;
/// otherwise both conditions sit at the right end.
fn solve_d_mode(mu: f64, f: &[f64], t0: f64, h: f64, q: f64) -> Result<Vec<f64>, AsError> {
    let n = f.len();
    let s = |i: usize| t0 + i as f64 * h;
    let (lo, di, up) = (-1.0 / (h * h) - 3.5 / h, 2.0 / (h * h), -1.0 / (h * h) + 3.5 / h);
    let last = n - 1;
    if 2.0 * mu > q {
        let mut a = BandMatrix::new(n, 2, 1);
        let mut b = vec![0.0; n];
        a.set(0, 0, 1.0)?;
        for i in 1..last {
            a.set(i, i - 1, lo)?;
            a.set(i, i, di + 14.0 * mu / s(i))?;
            a.set(i, i + 1, up)?;
            b[i] = f[i];
        }
        // Slow balance at the right end: 7w' + 14μ s⁻¹ w = f.
        a.set(last, last - 2, 3.5 / h)?;
        a.set(last, last - 1, -14.0 / h)?;
        a.set(last, last, 10.5 / h + 14.0 * mu / s(last))?;
        b[last] = f[last];
        Ok(a.solve(b)?)
    } else {
        // Rows 0..n-3 hold the equation centred at node i+1.
        let mut a = BandMatrix::new(n, 1, 2);
        let mut b = vec![0.0; n];
        for r in 0..n - 2 {
            let i = r + 1;
            a.set(r, i - 1, lo)?;
            a.set(r, i, di + 14.0 * mu / s(i))?;
            a.set(r, i + 1, up)?;
            b[r] = f[i];
        }
        a.set(n - 2, last - 2, 3.5 / h)?;
        a.set(n - 2, last - 1, -14.0 / h)?;
        a.set(n - 2, last, 10.5 / h + 14.0 * mu / s(last))?;
        b[n - 2] = f[last];
        // Tail value from f ~ s^{-p}: w ~ f s / (7(1-p) + 14μ).
        let (fb, p) = (f[last], tail_exponent(f, t0, h));
        let den = 7.0 * (1.0 - p) + 14.0 * mu;
        a.set(last, last, 1.0)?;
        b[last] = if den.abs() > 1e-12 { fb * s(last) / den } else { 0.0 };
        Ok(a.solve(b)?)
    }
}

/// Length of the extension past `tmax` on which the perpendicular modes are
/// solved, so the truncation layer of the backward kernels lies outside the
/// window.
const PERP_PAD: f64 = 10.0;

/// Slope `p` of `f ~ s^{-p}` from the last two samples; 2 when the tail
/// changes sign or vanishes.
fn tail_exponent(f: &[f64], t0: f64, h: f64) -> f64 {
    let n = f.len();
    let (fa, fb) = (f[n - 2], f[n - 1]);
    let (sa, sb) = (t0 + (n - 2) as f64 * h, t0 + (n - 1) as f64 * h);
    if fa != 0.0 && fb != 0.0 && fa.signum() == fb.signum() {
        (fa / fb).ln() / (sb / sa).ln()
    } else {
        2.0
    }
}

/// `f` followed by `pad` samples of its fitted power-law tail.
fn extend_power_law(f: &[f64], t0: f64, h: f64, pad: usize) -> Vec<f64> {
    let n = f.len();
    let p = tail_exponent(f, t0, h);
    let sb = t0 + (n - 1) as f64 * h;
    let mut out = f.to_vec();
    out.extend((1..=pad).map(|k| f[n - 1] * (sb / (sb + k as f64 * h)).powf(p)));
    out
}

fn apply_map(state: &ReducedState, modes: &Modes, q: f64) -> Result<ReducedState, AsError> {
    let n = state.len();
    let h = state.w_t.delta;
    let forcing: Vec<[f64; 8]> = (0..n).map(|i| state.t_forcing(i)).collect();
    let mut w_t = GridFunction::zeros(h, n, 8);
    for k in 0..8 {
        let e = &modes.vecs[k];
        let fk: Vec<f64> = forcing.iter().map(|f| dot(f, e)).collect();
        if fk.iter().all(|x| *x == 0.0) {
            continue;
        }
        let wk = solve_d_mode(modes.mu[k], &fk, state.t0, h, q)?;
        for (m, comp) in w_t.comps.iter_mut().enumerate() {
            for i in 0..n {
                comp[i] += wk[i] * e[m];
            }
        }
    }
    let opts = SolveOptions { tail_tol: None };
    let pad = (PERP_PAD / h).round() as usize;
    let mut w_perp = GridFunction::zeros(h, n, state.perp_lambdas.len());
    for (j, &lam) in state.perp_lambdas.iter().enumerate() {
        if state.coupling[j] == 0.0 {
            continue;
        }
        let g: Vec<f64> = (0..n).map(|i| -state.perp_forcing(j, i)).collect();
        let padded = GridFunction::scalar(h, extend_power_law(&g, state.t0, h, pad));
        let mut wj = solve_step5_with(lam, &padded, &opts)?.comps.remove(0);
        wj.truncate(n);
        w_perp.comps[j] = wj;
    }
    Ok(ReducedState { w_t, w_perp, ..state.clone() })
}

#[derive(Clone, Debug, Serialize)]
pub struct FixedPoint {
    pub state: ReducedState,
    pub iterations: usize,
    /// Largest ratio of successive update norms above the roundoff floor.
    pub lipschitz: f64,
    pub ratios: Vec<f64>,
    pub residual_sup: f64,
    pub w_norm: f64,
    /// `value_norm` of the final update.
    pub last_update: f64,
}

/// Updates below this fraction of `‖w‖` sit at the finite-difference
/// roundoff floor of the derivative terms and are not used as contraction
/// ratios.
const RATIO_FLOOR: f64 = 1e-6;

/// `w_{n+1} = F(w_n)` from `w₀ = 0`; converged when the weighted sup of the
/// update is below `tol` relative to that of `w`.
pub fn fixed_point_solve(cfg: &AsConfig) -> Result<FixedPoint, AsError> {
    cfg.validate()?;
    let modes = Modes::new();
    let mut w = ReducedState::zero(cfg);
    let mut prev: Option<f64> = None;
    let mut ratios = Vec::new();
    for it in 1..=cfg.max_iter {
        let next = apply_map(&w, &modes, cfg.q)?;
        let step = next.difference(&w);
        let diff = step.norm(cfg.q);
        let value_diff = step.value_norm(cfg.q);
        if !diff.is_finite() || !next.w_t.is_finite() || !next.w_perp.is_finite() {
            return Err(AsError::Diverged(it));
        }
        let floor = RATIO_FLOOR * next.norm(cfg.q);
        if let Some(p) = prev {
            if p > floor && diff > floor {
                ratios.push(diff / p);
            }
        }
        w = next;
        let lipschitz = ratios.iter().copied().fold(0.0, f64::max);
        if lipschitz >= 1.0 {
            return Err(AsError::NoContraction(lipschitz));
        }
        if value_diff <= cfg.tol * w.value_norm(cfg.q).max(1.0) {
            let (rt, rp) = reduced_residual(&w);
            return Ok(FixedPoint {
                iterations: it,
                lipschitz,
                ratios,
                residual_sup: rt.sup().max(rp.sup()),
                w_norm: w.norm(cfg.q),
                last_update: value_diff,
                state: w,
            });
        }
        prev = Some(diff);
    }
    Err(AsError::Diverged(cfg.max_iter))
}

/// Newton solve of `−U'' + 7U' + U² = 0` on `s ∈ [T, T+tmax]` with
/// `U(T) = 7/T` and the slow balance `7U' + U² = 14s⁻³` at the right end.
pub fn scalar_model_collocation(t0: f64, tmax: f64, h: f64) -> Result<Vec<f64>, AsError> {
    let n = GridFunction::points_for(tmax, h);
    let s = |i: usize| t0 + i as f64 * h;
    let mut u: Vec<f64> = (0..n).map(|i| 7.0 / s(i)).collect();
    let last = n - 1;
    for _ in 0..50 {
        let mut a = BandMatrix::new(n, 2, 1);
        let mut f = vec![0.0; n];
        a.set(0, 0, 1.0)?;
        f[0] = -(u[0] - 7.0 / t0);
        for i in 1..last {
            let r = -(u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h) + 3.5 * (u[i + 1] - u[i - 1]) / h + u[i] * u[i];
            a.set(i, i - 1, -1.0 / (h * h) - 3.5 / h)?;
            a.set(i, i, 2.0 / (h * h) + 2.0 * u[i])?;
            a.set(i, i + 1, -1.0 / (h * h) + 3.5 / h)?;
            f[i] = -r;
        }
        let sn = s(last);
        let r = 3.5 * (3.0 * u[last] - 4.0 * u[last - 1] + u[last - 2]) / h + u[last] * u[last] - 14.0 / (sn * sn * sn);
        a.set(last, last - 2, 3.5 / h)?;
        a.set(last, last - 1, -14.0 / h)?;
        a.set(last, last, 10.5 / h + 2.0 * u[last])?;
        f[last] = -r;
        let du = a.solve(f)?;
        let step = du.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (x, d) in u.iter_mut().zip(&du) {
            *x += d;
        }
        if step < 1e-15 {
            return Ok(u);
        }
    }
    Ok(u)
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct RateEntry {
    pub t: f64,
    pub t_times_u: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RateReport {
    pub schema_version: u32,
    #[serde(rename = "T")]
    pub t0: f64,
    pub q: f64,
    pub c: f64,
    pub tmax: f64,
    pub grid: f64,
    pub perp_lambdas: Vec<f64>,
    pub coupling: Vec<f64>,
    pub iterations: usize,
    pub lipschitz: f64,
    pub residual_sup: f64,
    pub w_norm: f64,
    /// `s·U(s)` at `s = 200`.
    pub t_times_u_at_200: f64,
    /// `L` in the least-squares fit `sU = L + (a ln s + b)/s` on `[100, T+tmax]`.
    pub fitted_limit: f64,
    /// `lim s·U` as a 𝒟-vector, `L·v`.
    pub xi_limit: [f64; 8],
    /// `s^{1.1}U(s)` strictly increasing on `[100, 200]`.
    pub polynomial_rate_excluded: bool,
    /// Largest gap between the fixed point's `v`-coefficient and the
    /// independent Newton collocation of the scalar model.
    pub collocation_max_diff: f64,
    pub rate_table: Vec<RateEntry>,
}

pub struct SlowRate {
    pub report: RateReport,
    pub fixed_point: FixedPoint,
    /// Normalized scalar profile `U` of the fixed point.
    pub u: GridFunction,
}

/// Fixed point plus the scalar-model rate analysis on `s ∈ [T, T+tmax]`.
pub fn slow_rate_report(cfg: &AsConfig) -> Result<SlowRate, AsError> {
    cfg.validate()?;
    if cfg.t0 > 100.0 || cfg.t0 + cfg.tmax < 200.0 {
        return Err(AsError::InvalidConfig("the window [T, T+tmax] must contain [100, 200]".into()));
    }
    let fp = fixed_point_solve(cfg)?;
    let colloc = scalar_model_collocation(cfg.t0, cfg.tmax, cfg.grid)?;
    let st = &fp.state;
    let n = colloc.len();
    let u: Vec<f64> = (0..n).map(|i| st.normalized_u(i)).collect();
    let collocation_max_diff = u.iter().zip(&colloc).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let ug = GridFunction::scalar(cfg.grid, u.clone());
    let su = |s: f64| s * ug.at(0, s - cfg.t0);

    let end = cfg.t0 + cfg.tmax;
    let mut table = Vec::new();
    let mut s = (cfg.t0 / 10.0).ceil() * 10.0;
    while s <= end + 1e-9 {
        table.push(RateEntry { t: s, t_times_u: su(s) });
        s += 10.0;
    }
    if table.last().map(|e| (e.t - end).abs() > 1e-9).unwrap_or(true) {
        table.push(RateEntry { t: end, t_times_u: su(end) });
    }

    let window: Vec<usize> = (0..n).filter(|&i| (100.0..=200.0).contains(&(cfg.t0 + i as f64 * cfg.grid))).collect();
    let growth: Vec<f64> = window.iter().map(|&i| (cfg.t0 + i as f64 * cfg.grid).powf(1.1) * u[i]).collect();
    let polynomial_rate_excluded = growth.windows(2).all(|w| w[1] > w[0]);

    let fit_idx: Vec<usize> = (0..n).filter(|&i| cfg.t0 + i as f64 * cfg.grid >= 100.0).collect();
    let mut a = DMatrix::<f64>::zeros(fit_idx.len(), 3);
    let mut b = DVector::<f64>::zeros(fit_idx.len());
    for (r, &i) in fit_idx.iter().enumerate() {
        let s = cfg.t0 + i as f64 * cfg.grid;
        a[(r, 0)] = 1.0;
        a[(r, 1)] = s.ln() / s;
        a[(r, 2)] = 1.0 / s;
        b[r] = s * u[i];
    }
    let coef = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| AsError::RateMismatch(format!("fit failed: {e}")))?;
    let fitted_limit = coef[0];
    let at200 = su(200.0);
    if (at200 - 7.0).abs() > 0.5 || (fitted_limit - 7.0).abs() > 0.5 {
        return Err(AsError::RateMismatch(format!("s·u(200) = {at200:.4}, fitted limit {fitted_limit:.4}")));
    }
    let report = RateReport {
        schema_version: SCHEMA_VERSION,
        t0: cfg.t0,
        q: cfg.q,
        c: cfg.c,
        tmax: cfg.tmax,
        grid: cfg.grid,
        perp_lambdas: cfg.perp_lambdas.clone(),
        coupling: cfg.coupling.clone(),
        iterations: fp.iterations,
        lipschitz: fp.lipschitz,
        residual_sup: fp.residual_sup,
        w_norm: fp.w_norm,
        t_times_u_at_200: at200,
        fitted_limit,
        xi_limit: st.v.map(|x| fitted_limit * x),
        polynomial_rate_excluded,
        collocation_max_diff,
        rate_table: table,
    };
    Ok(SlowRate { report, fixed_point: fp, u: ug })
}

/// Columns `t, s, u, wT0..wT7, wPerp0..`.
pub fn write_state_csv<W: std::io::Write>(state: &ReducedState, u: &GridFunction, mut w: W) -> std::io::Result<()> {
    let mut header = vec!["t".to_string(), "s".into(), "u".into()];
    header.extend((0..8).map(|k| format!("wT{k}")));
    header.extend((0..state.w_perp.dim()).map(|k| format!("wPerp{k}")));
    writeln!(w, "{}", header.join(","))?;
    for i in 0..state.len() {
        let mut row = vec![format!("{}", state.w_t.t(i)), format!("{}", state.s(i)), format!("{:e}", u.comps[0][i])];
        row.extend(state.w_t.comps.iter().map(|c| format!("{:e}", c[i])));
        row.extend(state.w_perp.comps.iter().map(|c| format!("{:e}", c[i])));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}
