//! Decaying-solution kernels for the separated ODEs in `t = -ln r`, their
//! boundary adjustments, the exponents `γ`, and discrete weighted norms.
//!
//! Every second-order factor is written `(D² − 7D − c)u = g` with roots
//! `r± = (7 ± √(49+4c))/2`; the growing root is integrated backward from
//! `T_max` and the other one forward from 0 (or backward if it also grows).

use std::io::{BufRead, Write};

use serde::Serialize;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("resonant mode: decaying characteristic root is zero (lambda = {0})")]
    Resonance(f64),
    #[error("forcing tail {estimate:.3e} at T_max exceeds tolerance {tol:.1e}")]
    TailTruncation { estimate: f64, tol: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid needs at least 5 points")]
    GridTooShort,
    #[error("malformed CSV: {0}")]
    Csv(String),
}

/// Uniformly sampled function on `[0, (n-1)δ]` with vector values, stored
/// component-major.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridFunction {
    pub delta: f64,
    pub comps: Vec<Vec<f64>>,
}

impl GridFunction {
    pub fn scalar(delta: f64, values: Vec<f64>) -> GridFunction {
        GridFunction { delta, comps: vec![values] }
    }

    pub fn from_fn<F: Fn(f64) -> f64>(delta: f64, n: usize, f: F) -> GridFunction {
        GridFunction::scalar(delta, (0..n).map(|i| f(i as f64 * delta)).collect())
    }

    pub fn zeros(delta: f64, n: usize, dim: usize) -> GridFunction {
        GridFunction { delta, comps: vec![vec![0.0; n]; dim] }
    }

    /// Grid with `n = round(tmax/δ) + 1` points.
    pub fn points_for(tmax: f64, delta: f64) -> usize {
        (tmax / delta).round() as usize + 1
    }

    pub fn len(&self) -> usize {
        self.comps.first().map(|c| c.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn t(&self, i: usize) -> f64 {
        i as f64 * self.delta
    }

    pub fn tmax(&self) -> f64 {
        self.t(self.len().saturating_sub(1))
    }

    pub fn values(&self) -> &[f64] {
        &self.comps[0]
    }

    pub fn component(&self, k: usize) -> GridFunction {
        GridFunction::scalar(self.delta, self.comps[k].clone())
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().flatten().all(|x| x.is_finite())
    }

    pub fn map<F: Fn(f64, f64) -> f64>(&self, f: F) -> GridFunction {
        GridFunction {
            delta: self.delta,
            comps: self
                .comps
                .iter()
                .map(|c| c.iter().enumerate().map(|(i, &x)| f(i as f64 * self.delta, x)).collect())
                .collect(),
        }
    }

    pub fn zip<F: Fn(f64, f64) -> f64>(&self, o: &GridFunction, f: F) -> GridFunction {
        GridFunction {
            delta: self.delta,
            comps: self
                .comps
                .iter()
                .zip(&o.comps)
                .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect())
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> GridFunction {
        self.map(|_, x| s * x)
    }

    pub fn sup(&self) -> f64 {
        self.comps.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Finite-difference derivative of the given order (1 or 2), fourth
    /// order in the interior and one-sided fourth order at the ends.
    pub fn derivative(&self, order: usize) -> GridFunction {
        GridFunction {
            delta: self.delta,
            comps: self.comps.iter().map(|c| fd_derivative(c, self.delta, order)).collect(),
        }
    }

    /// Every `k`-th sample.
    pub fn subsample(&self, k: usize) -> GridFunction {
        GridFunction {
            delta: self.delta * k as f64,
            comps: self.comps.iter().map(|c| c.iter().step_by(k).copied().collect()).collect(),
        }
    }

    /// Linear interpolation at `t`.
    pub fn at(&self, comp: usize, t: f64) -> f64 {
        let c = &self.comps[comp];
        let x = (t / self.delta).clamp(0.0, (c.len() - 1) as f64);
        let i = (x.floor() as usize).min(c.len() - 2);
        let w = x - i as f64;
        c[i] * (1.0 - w) + c[i + 1] * w
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header = vec!["t".to_string()];
        header.extend((0..self.dim()).map(|k| format!("u{k}")));
        writeln!(w, "{}", header.join(","))?;
        for i in 0..self.len() {
            let mut row = vec![format!("{}", self.t(i))];
            row.extend(self.comps.iter().map(|c| format!("{:e}", c[i])));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<GridFunction, OdeError> {
        let mut ts = Vec::new();
        let mut comps: Vec<Vec<f64>> = Vec::new();
        for (ln, line) in r.lines().enumerate() {
            let line = line.map_err(|e| OdeError::Csv(e.to_string()))?;
            if ln == 0 || line.trim().is_empty() {
                continue;
            }
            let vals: Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
            let vals = vals.map_err(|e| OdeError::Csv(format!("line {}: {e}", ln + 1)))?;
            if comps.is_empty() {
                comps = vec![Vec::new(); vals.len() - 1];
            }
            if vals.len() != comps.len() + 1 {
                return Err(OdeError::Csv(format!("line {}: ragged row", ln + 1)));
            }
            ts.push(vals[0]);
            for (k, v) in vals[1..].iter().enumerate() {
                comps[k].push(*v);
            }
        }
        if ts.len() < 2 {
            return Err(OdeError::Csv("need at least two rows".into()));
        }
        let delta = ts[1] - ts[0];
        for w in ts.windows(2) {
            if ((w[1] - w[0]) - delta).abs() > 1e-9 * delta.max(1.0) {
                return Err(OdeError::Csv("grid is not uniform".into()));
            }
        }
        Ok(GridFunction { delta, comps })
    }
}

/// Finite-difference weights (Fornberg) for derivatives `0..=m` at `x0`.
pub fn fd_weights(nodes: &[f64], x0: f64, m: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] *= c4 / c3;
        }
        c1 = c2;
    }
    c
}

fn fd_derivative(c: &[f64], h: f64, order: usize) -> Vec<f64> {
    let n = c.len();
    assert!(n >= 6, "derivative needs 6 points");
    assert!(order == 1 || order == 2, "derivative order must be 1 or 2");
    let central: [f64; 5] = if order == 1 {
        [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0]
    } else {
        [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0]
    };
    let nodes: Vec<f64> = (0..6).map(|k| k as f64).collect();
    let scale = h.powi(order as i32);
    let mut out = vec![0.0; n];
    for i in 0..n {
        out[i] = if i >= 2 && i + 2 < n {
            (0..5).map(|k| central[k] * c[i + k - 2]).sum::<f64>() / scale
        } else {
            let st = if i < 2 { 0 } else { n - 6 };
            let w = fd_weights(&nodes, (i - st) as f64, order);
            (0..6).map(|k| w[order][k] * c[st + k]).sum::<f64>() / scale
        };
    }
    out
}

// ---- exponential-weighted quadrature ----

/// Gauss–Legendre nodes and weights on `[0, 1]`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push(((1.0 - x) / 2.0, w / 2.0));
    }
    out
}

const STENCIL: usize = 7;

/// `weights[p][j] = ∫_0^δ kern(σ) L_j(p + σ/δ) dσ` for the Lagrange basis on
/// nodes `0..STENCIL` and an interval starting at node `p`.
fn interval_weights<K: Fn(f64) -> f64>(delta: f64, kern: K) -> [[f64; STENCIL]; STENCIL - 1] {
    let gl = gauss_legendre(12);
    let mut w = [[0.0; STENCIL]; STENCIL - 1];
    for (p, row) in w.iter_mut().enumerate() {
        for &(x, gw) in &gl {
            let sigma = x * delta;
            let pos = p as f64 + x;
            let k = kern(sigma) * gw * delta;
            for (j, slot) in row.iter_mut().enumerate() {
                let mut l = 1.0;
                for m in 0..STENCIL {
                    if m != j {
                        l *= (pos - m as f64) / (j as f64 - m as f64);
                    }
                }
                *slot += k * l;
            }
        }
    }
    w
}

fn stencil_start(i: usize, n: usize) -> usize {
    i.saturating_sub(3).min(n - STENCIL)
}

/// `B_a[g](t) = ∫_t^{T_max} e^{-a(τ-t)} g(τ) dτ` for `a > 0`.
pub fn backward_conv(g: &[f64], delta: f64, a: f64) -> Vec<f64> {
    let n = g.len();
    let w = interval_weights(delta, |s| (-a * s).exp());
    let decay = (-a * delta).exp();
    let mut y = vec![0.0; n];
    for i in (0..n - 1).rev() {
        let st = stencil_start(i, n);
        let p = i - st;
        let local: f64 = (0..STENCIL).map(|j| w[p][j] * g[st + j]).sum();
        y[i] = decay * y[i + 1] + local;
    }
    y
}

/// `F_k[g](t) = ∫_0^t e^{-k(t-s)} g(s) ds` for `k > 0`.
pub fn forward_conv(g: &[f64], delta: f64, k: f64) -> Vec<f64> {
    let n = g.len();
    let w = interval_weights(delta, |s| (-k * (delta - s)).exp());
    let decay = (-k * delta).exp();
    let mut z = vec![0.0; n];
    for i in 0..n - 1 {
        let st = stencil_start(i, n);
        let p = i - st;
        let local: f64 = (0..STENCIL).map(|j| w[p][j] * g[st + j]).sum();
        z[i + 1] = decay * z[i] + local;
    }
    z
}

/// Roots `(r+, r-)` of `r² − 7r − c = 0`.
pub fn char_roots(c: f64) -> Result<(f64, f64), OdeError> {
    let disc = 49.0 + 4.0 * c;
    if disc <= 0.0 {
        return Err(OdeError::InvalidParameter(format!("complex characteristic roots for c = {c}")));
    }
    let s = disc.sqrt();
    Ok(((7.0 + s) / 2.0, (7.0 - s) / 2.0))
}

/// Decaying solution of `(D² − 7D − c)u = g` plus `α e^{r- t}` when `r- < 0`.
#[derive(Clone, Debug)]
pub struct FactorSolution {
    pub u: Vec<f64>,
    /// `y = (D − r-)u` at `t = 0`.
    pub y0: f64,
    pub r_minus: f64,
}

pub fn solve_factor(c: f64, g: &[f64], delta: f64, alpha: f64, lambda: f64) -> Result<FactorSolution, OdeError> {
    let (rp, rm) = char_roots(c)?;
    if rm.abs() < 1e-12 {
        return Err(OdeError::Resonance(lambda));
    }
    let y: Vec<f64> = backward_conv(g, delta, rp).into_iter().map(|x| -x).collect();
    let u = if rm < 0.0 {
        let z = forward_conv(&y, delta, -rm);
        z.iter().enumerate().map(|(i, &zi)| zi + alpha * (rm * i as f64 * delta).exp()).collect()
    } else {
        backward_conv(&y, delta, rm).into_iter().map(|x| -x).collect()
    };
    Ok(FactorSolution { u, y0: y[0], r_minus: rm })
}

// ---- public kernels ----

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Step3,
    Step4,
    Step5,
}

impl std::str::FromStr for Kind {
    type Err = OdeError;
    fn from_str(s: &str) -> Result<Kind, OdeError> {
        match s {
            "step3" => Ok(Kind::Step3),
            "step4" => Ok(Kind::Step4),
            "step5" => Ok(Kind::Step5),
            _ => Err(OdeError::InvalidParameter(format!("unknown kind {s}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModeSpec {
    pub lambda: f64,
    pub kind: Kind,
}

impl ModeSpec {
    pub fn new(lambda: f64, kind: Kind) -> Result<ModeSpec, OdeError> {
        if lambda < 0.0 {
            return Err(OdeError::InvalidParameter("lambda must be >= 0".into()));
        }
        let resonant = match kind {
            Kind::Step4 => lambda == 18.0,
            Kind::Step5 => lambda == 12.0,
            Kind::Step3 => false,
        };
        if resonant {
            return Err(OdeError::Resonance(lambda));
        }
        Ok(ModeSpec { lambda, kind })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Gammas {
    Pair { minus: f64, plus: f64 },
    Single(f64),
}

/// `γ± = -7/2 + (√(4λ+9) ± 2)/2` for Step 4, `γ = -7/2 + √(4λ+1)/2` for
/// Step 5 and `γ = -7/2 + √(49+4λ)/2` for the scalar Step 3 operator.
pub fn gamma_exponents(lambda: f64, kind: Kind) -> Gammas {
    match kind {
        Kind::Step4 => {
            let s = (4.0 * lambda + 9.0).sqrt();
            Gammas::Pair { minus: (s - 9.0) / 2.0, plus: (s - 5.0) / 2.0 }
        }
        Kind::Step5 => Gammas::Single(((4.0 * lambda + 1.0).sqrt() - 7.0) / 2.0),
        Kind::Step3 => Gammas::Single(((49.0 + 4.0 * lambda).sqrt() - 7.0) / 2.0),
    }
}

/// `p·u(0) + q·u'(0) = g`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Robin {
    pub p: f64,
    pub q: f64,
    pub g: f64,
}

impl Robin {
    /// `−9u(0) + u'(0) = g`.
    pub fn step3(g: f64) -> Robin {
        Robin { p: -9.0, q: 1.0, g }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    /// Largest admissible `|f|` over the last unit of the grid; `None`
    /// accepts any tail.
    pub tail_tol: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tail_tol: Some(1e-9) }
    }
}

fn check_grid(f: &GridFunction, opts: &SolveOptions) -> Result<(), OdeError> {
    if f.len() < STENCIL + 1 {
        return Err(OdeError::GridTooShort);
    }
    if let Some(tol) = opts.tail_tol {
        let n = f.len();
        let w = ((1.0 / f.delta).round() as usize).clamp(1, n);
        let est = f.comps.iter().flat_map(|c| c[n - w..].iter()).fold(0.0f64, |m, x| m.max(x.abs()));
        if est > tol {
            return Err(OdeError::TailTruncation { estimate: est, tol });
        }
    }
    Ok(())
}

/// Decaying solution of `(μ − D² + 7D)u = f`, with the homogeneous
/// coefficient fixed by `bc` when given (zero otherwise).
pub fn solve_scalar(mu: f64, f: &GridFunction, bc: Option<Robin>) -> Result<GridFunction, OdeError> {
    solve_scalar_with(mu, f, bc, &SolveOptions::default())
}

pub fn solve_scalar_with(
    mu: f64,
    f: &GridFunction,
    bc: Option<Robin>,
    opts: &SolveOptions,
) -> Result<GridFunction, OdeError> {
    check_grid(f, opts)?;
    let (_, rm) = char_roots(mu)?;
    let mut comps = Vec::with_capacity(f.dim());
    for c in &f.comps {
        let g: Vec<f64> = c.iter().map(|x| -x).collect();
        let base = solve_factor(mu, &g, f.delta, 0.0, mu)?;
        let alpha = match bc {
            None => 0.0,
            Some(b) => {
                if rm > 0.0 {
                    return Err(OdeError::InvalidParameter("no decaying homogeneous mode for the boundary condition".into()));
                }
                let den = b.p + b.q * rm;
                if den.abs() < 1e-14 {
                    return Err(OdeError::InvalidParameter("boundary functional vanishes on the decaying mode".into()));
                }
                (b.g - b.q * base.y0) / den
            }
        };
        let u = if alpha == 0.0 {
            base.u
        } else {
            base.u.iter().enumerate().map(|(i, &x)| x + alpha * (rm * i as f64 * f.delta).exp()).collect()
        };
        comps.push(u);
    }
    Ok(GridFunction { delta: f.delta, comps })
}

/// `B(w) = (λ − 18)w(0) − w''(0) + 9w'(0)` on the exact pieces.
fn step4_functional(lambda: f64, w0: f64, w1: f64, w2: f64) -> f64 {
    (lambda - 18.0) * w0 - w2 + 9.0 * w1
}

/// Solution of `¼(D²−7D−λ+9+s)(D²−7D−λ+9−s)w = f`, `s = √(4λ+9)`, with
/// `B(w) = datum`.
pub fn solve_step4(lambda: f64, f: &GridFunction, datum: f64) -> Result<GridFunction, OdeError> {
    solve_step4_with(lambda, f, datum, &SolveOptions::default())
}

pub fn solve_step4_with(lambda: f64, f: &GridFunction, datum: f64, opts: &SolveOptions) -> Result<GridFunction, OdeError> {
    if lambda < 5.0 {
        return Err(OdeError::InvalidParameter("step4 requires lambda >= 5".into()));
    }
    if lambda == 18.0 {
        return Err(OdeError::Resonance(lambda));
    }
    check_grid(f, opts)?;
    let s = (4.0 * lambda + 9.0).sqrt();
    let c_plus = lambda - 9.0 + s;
    let c_minus = lambda - 9.0 - s;
    let gp = (s - 5.0) / 2.0;
    let h = f.delta;
    let mut comps = Vec::with_capacity(f.dim());
    for c in &f.comps {
        let g: Vec<f64> = c.iter().map(|x| 4.0 * x).collect();
        let v = solve_factor(c_plus, &g, h, 0.0, lambda)?;
        let w = solve_factor(c_minus, &v.u, h, 0.0, lambda)?;
        // w(0), w'(0), w''(0) of the particular part from the factor structure:
        // w' = r w + y, y' = a y − v with a + r = 7.
        let (r, y0) = (w.r_minus, w.y0);
        let w0 = w.u[0];
        let w1 = r * w0 + y0;
        let a = 7.0 - r;
        let w2 = r * w1 + (a * y0 - v.u[0]);
        let bw = step4_functional(lambda, w0, w1, w2);
        let beta = (datum - bw) / (-4.0 - 2.0 * s);
        comps.push(w.u.iter().enumerate().map(|(i, &x)| x + beta * (-gp * i as f64 * h).exp()).collect());
    }
    Ok(GridFunction { delta: f.delta, comps })
}

/// Decaying solution of `(D² − 7D − λ + 12)w = f` without boundary data.
pub fn solve_step5(lambda: f64, f: &GridFunction) -> Result<GridFunction, OdeError> {
    solve_step5_with(lambda, f, &SolveOptions::default())
}

pub fn solve_step5_with(lambda: f64, f: &GridFunction, opts: &SolveOptions) -> Result<GridFunction, OdeError> {
    if lambda == 12.0 {
        return Err(OdeError::Resonance(lambda));
    }
    check_grid(f, opts)?;
    let comps = f
        .comps
        .iter()
        .map(|c| solve_factor(lambda - 12.0, c, f.delta, 0.0, lambda).map(|s| s.u))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GridFunction { delta: f.delta, comps })
}

/// Dispatch by kind; `bc` is the Robin datum for Step 3 (`−9u(0)+u'(0)`)
/// and the boundary functional value for Step 4.
pub fn solve_mode(mode: ModeSpec, f: &GridFunction, bc: Option<f64>, opts: &SolveOptions) -> Result<GridFunction, OdeError> {
    match mode.kind {
        Kind::Step3 => solve_scalar_with(mode.lambda, f, bc.map(Robin::step3), opts),
        Kind::Step4 => solve_step4_with(mode.lambda, f, bc.unwrap_or(0.0), opts),
        Kind::Step5 => solve_step5_with(mode.lambda, f, opts),
    }
}

// ---- residuals ----

/// Eighth-order central stencils for the first four derivatives.
const D1_8: [f64; 9] = [1.0 / 280.0, -4.0 / 105.0, 1.0 / 5.0, -4.0 / 5.0, 0.0, 4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
const D2_8: [f64; 9] = [-1.0 / 560.0, 8.0 / 315.0, -1.0 / 5.0, 8.0 / 5.0, -205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];
fn stencil_apply(c: &[f64], i: usize, st: &[f64], h: f64, order: i32) -> f64 {
    let m = st.len() / 2;
    st.iter().enumerate().map(|(k, w)| w * c[i + k - m]).sum::<f64>() / h.powi(order)
}

/// Sup of `|(D² − 7D − c)u − g|` on the interior, evaluated with eighth-order
/// stencils on the subsampled grid of spacing `stride·δ`.
pub fn second_order_residual(u: &[f64], g: &[f64], delta: f64, c: f64, stride: usize, t_hi: f64) -> f64 {
    let us: Vec<f64> = u.iter().step_by(stride).copied().collect();
    let gs: Vec<f64> = g.iter().step_by(stride).copied().collect();
    let h = delta * stride as f64;
    let mut worst = 0.0f64;
    for i in 4..us.len().saturating_sub(4) {
        if i as f64 * h > t_hi {
            break;
        }
        let r = stencil_apply(&us, i, &D2_8, h, 2) - 7.0 * stencil_apply(&us, i, &D1_8, h, 1) - c * us[i] - gs[i];
        worst = worst.max(r.abs());
    }
    worst
}

/// Sup of the Step 4 quartic residual on the interior, computed by applying
/// the second-order factors successively with eighth-order stencils.
pub fn step4_residual(lambda: f64, w: &[f64], f: &[f64], delta: f64, stride: usize, t_hi: f64) -> f64 {
    let s = (4.0 * lambda + 9.0).sqrt();
    let (cp, cm) = (lambda - 9.0 + s, lambda - 9.0 - s);
    let ws: Vec<f64> = w.iter().step_by(stride).copied().collect();
    let fs: Vec<f64> = f.iter().step_by(stride).copied().collect();
    let h = delta * stride as f64;
    let apply = |u: &[f64], c: f64| -> Vec<f64> {
        let mut out = vec![f64::NAN; u.len()];
        for i in 4..u.len().saturating_sub(4) {
            out[i] = stencil_apply(u, i, &D2_8, h, 2) - 7.0 * stencil_apply(u, i, &D1_8, h, 1) - c * u[i];
        }
        out
    };
    let inner = apply(&ws, cp);
    let outer = apply(&inner, cm);
    let mut worst = 0.0f64;
    for i in 8..ws.len().saturating_sub(8) {
        if i as f64 * h > t_hi {
            break;
        }
        worst = worst.max((0.25 * outer[i] - fs[i]).abs());
    }
    worst
}

/// `[u(0), u'(0), u''(0)]` from the first nine samples.
pub fn left_derivatives(u: &[f64], delta: f64) -> [f64; 3] {
    let nodes: Vec<f64> = (0..9).map(|k| k as f64).collect();
    let w = fd_weights(&nodes, 0.0, 2);
    let d = |k: usize| (0..9).map(|j| w[k][j] * u[j]).sum::<f64>();
    [u[0], d(1) / delta, d(2) / (delta * delta)]
}

// ---- weighted norms ----

/// `sup_τ (T+τ)^q (sup|u| + sup|u'| + sup|u''|)` over unit windows `[τ, τ+1]`.
pub fn weighted_norm(u: &GridFunction, q: f64, t0: f64) -> f64 {
    weighted_norm_from(u, q, t0, 0.0)
}

/// As `weighted_norm`, restricted to windows starting at or after `from`.
pub fn weighted_norm_from(u: &GridFunction, q: f64, t0: f64, from: f64) -> f64 {
    if u.len() < 6 {
        return u.sup();
    }
    let d1 = u.derivative(1);
    let d2 = u.derivative(2);
    let n = u.len();
    let per = ((1.0 / u.delta).round() as usize).max(1);
    let mut best = 0.0f64;
    let mut start = ((from / u.delta).round() as usize).min(n - 1);
    while start < n {
        let end = (start + per).min(n - 1);
        let sup = |g: &GridFunction| {
            g.comps.iter().map(|c| c[start..=end].iter().fold(0.0f64, |m, x| m.max(x.abs()))).fold(0.0, f64::max)
        };
        let val = sup(u) + sup(&d1) + sup(&d2);
        best = best.max((t0 + u.t(start)).powf(q) * val);
        if end == n - 1 {
            break;
        }
        start += per;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(tmax: f64, h: f64, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction::from_fn(h, GridFunction::points_for(tmax, h), f)
    }

    #[test]
    fn gammas() {
        assert_eq!(gamma_exponents(18.0, Kind::Step4), Gammas::Pair { minus: 0.0, plus: 2.0 });
        assert_eq!(gamma_exponents(12.0, Kind::Step5), Gammas::Single(0.0));
        if let Gammas::Pair { plus, .. } = gamma_exponents(5.0, Kind::Step4) {
            assert!((plus - (-3.5 + (29f64.sqrt() + 2.0) / 2.0)).abs() < 1e-15);
            assert!((plus - 0.1926).abs() < 1e-4);
        }
    }

    #[test]
    fn scalar_particular() {
        let f = grid(40.0, 0.01, |t| (-t).exp());
        let u = solve_scalar(18.0, &f, None).unwrap();
        let err = u.values().iter().enumerate().skip(1).map(|(i, x)| {
            let t = i as f64 * 0.01;
            // Particular e^{-t}/10 minus the homogeneous part fixed by u(0)=0.
            (x - ((-t).exp() - (-2.0 * t).exp()) / 10.0).abs()
        });
        assert!(err.fold(0.0, f64::max) < 1e-10);
    }

    #[test]
    fn scalar_robin_homogeneous() {
        let f = grid(20.0, 0.01, |_| 0.0);
        let u = solve_scalar(18.0, &f, Some(Robin::step3(-11.0))).unwrap();
        for (i, x) in u.values().iter().enumerate() {
            assert!((x - (-2.0 * i as f64 * 0.01).exp()).abs() < 1e-13);
        }
        let z = solve_scalar(18.0, &f, Some(Robin::step3(0.0))).unwrap();
        assert_eq!(z.sup(), 0.0);
    }

    #[test]
    fn resonances() {
        let f = grid(40.0, 0.01, |t| (-t).exp());
        assert_eq!(solve_step4(18.0, &f, 0.0), Err(OdeError::Resonance(18.0)));
        assert_eq!(solve_step5(12.0, &f), Err(OdeError::Resonance(12.0)));
        assert!(solve_step4(18.0 + 1e-6, &f, 0.0).is_ok());
        assert!(solve_step5(12.0 - 1e-6, &f).is_ok());
    }

    #[test]
    fn tail_truncation() {
        let f = grid(20.0, 0.01, |t| 1.0 / (1.0 + t));
        assert!(matches!(solve_step5(6.0, &f), Err(OdeError::TailTruncation { .. })));
    }

    #[test]
    fn step4_quartic_residual() {
        let f = grid(40.0, 0.01, |t| (-t).exp());
        let w = solve_step4(12.0, &f, 0.0).unwrap();
        let r = step4_residual(12.0, w.values(), f.values(), 0.01, 5, 30.0);
        assert!(r < 1e-8, "residual {r}");
        let z = solve_step4(12.0, &grid(20.0, 0.01, |_| 0.0), 0.0).unwrap();
        assert_eq!(z.sup(), 0.0);
    }

    #[test]
    fn step5_branches() {
        for lam in [6.0, 22.0, 30.0] {
            let f = grid(40.0, 0.01, |t| (-t).exp() * (2.0 * t).cos());
            let w = solve_step5(lam, &f).unwrap();
            let r = second_order_residual(w.values(), f.values(), 0.01, lam - 12.0, 5, 30.0);
            assert!(r < 1e-8, "lambda {lam}: residual {r}");
        }
    }

    #[test]
    fn weighted_norm_examples() {
        let t0 = 10.0;
        let u = grid(100.0, 0.01, |t| 1.0 / (t0 + t));
        let want = 1.0 + 1.0 / t0 + 2.0 / (t0 * t0);
        assert!((weighted_norm(&u, 1.0, t0) - want).abs() < 1e-3);
        assert_eq!(weighted_norm(&grid(10.0, 0.01, |_| 0.0), 1.0, t0), 0.0);
        assert!(weighted_norm(&grid(50.0, 0.01, |t| (-t).exp()), 3.0, t0).is_finite());
    }

    #[test]
    fn left_derivatives_of_exponential() {
        let u: Vec<f64> = (0..20).map(|i| (-2.0 * i as f64 * 0.01).exp()).collect();
        let d = left_derivatives(&u, 0.01);
        assert!((d[1] + 2.0).abs() < 1e-9);
        assert!((d[2] - 4.0).abs() < 1e-6);
    }

    #[test]
    fn derivatives_of_sine() {
        let u = grid(3.0, 0.01, f64::sin);
        let (d1, d2) = (u.derivative(1), u.derivative(2));
        for i in 0..u.len() {
            let t = u.t(i);
            assert!((d1.values()[i] - t.cos()).abs() < 1e-7);
            assert!((d2.values()[i] + t.sin()).abs() < 1e-4);
        }
    }

    #[test]
    fn csv_round_trip() {
        let u = grid(1.0, 0.1, |t| t * t);
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        let v = GridFunction::read_csv(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(v.len(), u.len());
        assert!((v.delta - 0.1).abs() < 1e-12);
        for (a, b) in u.values().iter().zip(v.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
