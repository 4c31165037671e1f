//! Fixed-step method-of-steps integration of delayed mass-action systems,
//! with the conserved functional `g` and the Lyapunov-Krasovskii functional.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::balance;
use crate::linalg;
use crate::network::ReactionNetwork;
use crate::stoich;

/// Largest number of stored grid points (history prefix included).
pub const MAX_POINTS: usize = 10_000_000;
/// States below this are treated as a failed (negative) integration.
pub const NEGATIVE_TOL: f64 = -1e-12;
/// Probe floor for the final-half minimum concentration.
pub const PROBE_FLOOR: f64 = 1e-6;
/// Largest random delay used by the probe.
pub const PROBE_MAX_DELAY: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("step {step} exceeds the smallest positive delay {min_delay}")]
    StepTooLarge { step: f64, min_delay: f64 },
    #[error("non-finite state at t={t}")]
    NonFiniteState { t: f64 },
    #[error("species {species} went negative ({value:e}) at t={t}")]
    NegativeStateAborted { t: f64, species: usize, value: f64 },
    #[error("run needs {points} grid points, cap is {cap}")]
    MemoryCap { points: usize, cap: usize },
    #[error("window covers {available}, delays need {needed}")]
    WindowTooShort { needed: f64, available: f64 },
    #[error("window and reference state must be strictly positive")]
    NonPositiveWindow,
}

/// Initial data on `[-tau_max, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub enum HistoryFunction {
    Constant(Vec<f64>),
    /// Linear interpolation between grid nodes, held constant outside them.
    PiecewiseLinear { grid: Vec<f64>, values: Vec<Vec<f64>> },
}

impl HistoryFunction {
    pub fn dim(&self) -> usize {
        match self {
            HistoryFunction::Constant(v) => v.len(),
            HistoryFunction::PiecewiseLinear { values, .. } => values.first().map_or(0, Vec::len),
        }
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        match self {
            HistoryFunction::Constant(v) => v.clone(),
            HistoryFunction::PiecewiseLinear { grid, values } => {
                let j = grid.partition_point(|&g| g <= t);
                if j == 0 {
                    return values[0].clone();
                }
                if j == grid.len() {
                    return values[j - 1].clone();
                }
                let (t0, t1) = (grid[j - 1], grid[j]);
                let w = (t - t0) / (t1 - t0);
                values[j - 1]
                    .iter()
                    .zip(&values[j])
                    .map(|(a, b)| a + w * (b - a))
                    .collect()
            }
        }
    }

    fn validate(&self, n: usize) -> Result<(), SimError> {
        let positive = |v: &[f64]| v.len() == n && v.iter().all(|x| x.is_finite() && *x > 0.0);
        let ok = match self {
            HistoryFunction::Constant(v) => positive(v),
            HistoryFunction::PiecewiseLinear { grid, values } => {
                !grid.is_empty()
                    && grid.len() == values.len()
                    && grid.windows(2).all(|w| w[0] < w[1])
                    && values.iter().all(|v| positive(v))
            }
        };
        if ok {
            Ok(())
        } else {
            Err(SimError::InvalidArgument(format!(
                "history must be strictly positive with {n} components"
            )))
        }
    }
}

/// Stored trajectory on a uniform grid, history prefix included.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryState {
    pub step_h: f64,
    pub n: usize,
    /// Number of grid points before `t = 0`.
    pub prefix: usize,
    /// Per-reaction delay in steps.
    pub delay_offsets: Vec<usize>,
    pub rounding_warnings: Vec<String>,
    values: Vec<f64>,
    /// Right-hand side at each grid point from `t = 0` on.
    derivs: Vec<f64>,
}

impl TrajectoryState {
    pub fn len(&self) -> usize {
        self.values.len() / self.n.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        (i as f64 - self.prefix as f64) * self.step_h
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    /// Derivative at grid point `i`, available for `t >= 0`.
    pub fn derivative(&self, i: usize) -> Option<&[f64]> {
        let j = i.checked_sub(self.prefix)?;
        self.derivs.get(j * self.n..(j + 1) * self.n)
    }

    pub fn terminal(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    /// Index of the first grid point with `t >= 0`.
    pub fn origin(&self) -> usize {
        self.prefix
    }

    /// Window `[t_i - tau_max, t_i]` ending at grid point `i`.
    pub fn window(&self, i: usize) -> Window {
        let start = i.saturating_sub(self.prefix);
        Window {
            step_h: self.step_h,
            values: (start..=i).map(|j| self.state(j).to_vec()).collect(),
        }
    }

    fn lags(&self) -> &[usize] {
        &self.delay_offsets
    }
}

/// Equally spaced samples of a state segment; the last row is the present.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub step_h: f64,
    pub values: Vec<Vec<f64>>,
}

impl Window {
    pub fn constant(x: &[f64], span: f64, step_h: f64) -> Self {
        let points = (span / step_h).round() as usize + 1;
        Window {
            step_h,
            values: vec![x.to_vec(); points],
        }
    }

    fn span(&self) -> f64 {
        (self.values.len().saturating_sub(1)) as f64 * self.step_h
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    /// Largest `|a.g(x_t) - a.g(psi)| / (1 + |a.g(psi)|)` over the
    /// conservation basis and the sampled times.
    pub conservation_drift: f64,
    /// Equilibrium used for the Lyapunov functional, when one was found.
    pub lyapunov_reference: Option<Vec<f64>>,
    /// `(t, V)` samples.
    pub lyapunov_series: Vec<(f64, f64)>,
    /// Per-species minimum over the final half of the run.
    pub min_concentration: Vec<f64>,
    pub terminal_state: Vec<f64>,
    /// Max-norm of the right-hand side at the terminal state held constant.
    pub equilibrium_residual: f64,
    pub rounding_warnings: Vec<String>,
}

/// Equilibrium used for the Lyapunov functional.
#[derive(Debug, Clone, Default, PartialEq)]
pub enum LyapunovReference {
    /// Search for a complex balanced equilibrium.
    #[default]
    Search,
    Fixed(Vec<f64>),
    Off,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimOptions {
    /// Sampling stride for drift and Lyapunov values; `None` picks about
    /// a thousand samples.
    pub sample_every: Option<usize>,
    pub lyapunov: LyapunovReference,
}

fn delay_lags(net: &ReactionNetwork, h: f64) -> (Vec<usize>, Vec<String>) {
    let mut warnings = Vec::new();
    let lags = net
        .reactions()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let lag = (r.delay_tau / h).round();
            if (r.delay_tau - lag * h).abs() > 1e-12 {
                warnings.push(format!(
                    "reaction {i}: delay {} rounded to {} steps ({})",
                    r.delay_tau,
                    lag,
                    lag * h
                ));
            }
            lag as usize
        })
        .collect();
    (lags, warnings)
}

fn rhs_into(net: &ReactionNetwork, x: &[f64], delayed: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for (r, &dm) in net.reactions().iter().zip(delayed) {
        let produced = r.rate_k * dm;
        let consumed = r.rate_k * r.reactant.monomial(x);
        for (s, c) in r.product.terms() {
            out[s] += produced * c as f64;
        }
        for (s, c) in r.reactant.terms() {
            out[s] -= consumed * c as f64;
        }
    }
}

pub fn simulate(
    net: &ReactionNetwork,
    psi: &HistoryFunction,
    t_end: f64,
    step_h: f64,
) -> Result<(TrajectoryState, RunReport), SimError> {
    simulate_with(net, psi, t_end, step_h, &SimOptions::default())
}

pub fn simulate_with(
    net: &ReactionNetwork,
    psi: &HistoryFunction,
    t_end: f64,
    step_h: f64,
    opts: &SimOptions,
) -> Result<(TrajectoryState, RunReport), SimError> {
    let state = integrate(net, psi, t_end, step_h)?;
    let report = run_report(net, &state, opts)?;
    Ok((state, report))
}

/// Runs the integrator only.
pub fn integrate(
    net: &ReactionNetwork,
    psi: &HistoryFunction,
    t_end: f64,
    h: f64,
) -> Result<TrajectoryState, SimError> {
    let n = net.n_species();
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(SimError::InvalidArgument("t_end must be positive".into()));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(SimError::InvalidArgument("step must be positive".into()));
    }
    psi.validate(n)?;
    let min_delay = net
        .reactions()
        .iter()
        .map(|r| r.delay_tau)
        .filter(|&t| t > 0.0)
        .fold(f64::INFINITY, f64::min);
    if h > min_delay * (1.0 + 1e-12) {
        return Err(SimError::StepTooLarge { step: h, min_delay });
    }
    let (lags, rounding_warnings) = delay_lags(net, h);
    let prefix = lags.iter().copied().max().unwrap_or(0);
    let steps = (t_end / h).round().max(1.0) as usize;
    let points = prefix + steps + 1;
    if points > MAX_POINTS {
        return Err(SimError::MemoryCap {
            points,
            cap: MAX_POINTS,
        });
    }

    let mut values = Vec::with_capacity(points * n);
    for i in 0..=prefix {
        let t = (i as f64 - prefix as f64) * h;
        values.extend(psi.eval(t));
    }
    let mut derivs = Vec::with_capacity((steps + 1) * n);
    let time = |i: usize| (i as f64 - prefix as f64) * h;
    let reactions = net.reactions();
    let r = reactions.len();

    let mut delayed = vec![0.0; r];
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut stage = vec![0.0; n];
    let mut mid = vec![0.0; n];

    // derivative at t = 0
    {
        let x0 = values[prefix * n..].to_vec();
        for (j, rx) in reactions.iter().enumerate() {
            let src = if lags[j] == 0 { &x0[..] } else { &values[(prefix - lags[j]) * n..(prefix - lags[j] + 1) * n] };
            delayed[j] = rx.reactant.monomial(src);
        }
        let mut d = vec![0.0; n];
        rhs_into(net, &x0, &delayed, &mut d);
        derivs.extend(d);
    }

    for i in prefix..prefix + steps {
        let x: Vec<f64> = values[i * n..(i + 1) * n].to_vec();
        let row = |v: &Vec<f64>, j: usize| v[j * n..(j + 1) * n].to_vec();

        // stage 1
        for (j, rx) in reactions.iter().enumerate() {
            delayed[j] = if lags[j] == 0 {
                rx.reactant.monomial(&x)
            } else {
                rx.reactant.monomial(&values[(i - lags[j]) * n..(i - lags[j] + 1) * n])
            };
        }
        rhs_into(net, &x, &delayed, &mut k1);

        // delayed reads at the half step, shared by stages 2 and 3
        let mut half = vec![0.0; r];
        for (j, rx) in reactions.iter().enumerate() {
            let l = lags[j];
            if l == 0 {
                continue;
            }
            let a = i - l;
            let t_mid = time(a) + 0.5 * h;
            if a < prefix {
                half[j] = rx.reactant.monomial(&psi.eval(t_mid));
            } else {
                let (x0, x1) = (row(&values, a), row(&values, a + 1));
                let (d0, d1) = (row(&derivs, a - prefix), row(&derivs, a + 1 - prefix));
                for s in 0..n {
                    mid[s] = 0.5 * (x0[s] + x1[s]) + h / 8.0 * (d0[s] - d1[s]);
                }
                half[j] = rx.reactant.monomial(&mid);
            }
        }

        for s in 0..n {
            stage[s] = x[s] + 0.5 * h * k1[s];
        }
        for (j, rx) in reactions.iter().enumerate() {
            delayed[j] = if lags[j] == 0 { rx.reactant.monomial(&stage) } else { half[j] };
        }
        rhs_into(net, &stage, &delayed, &mut k2);

        for s in 0..n {
            stage[s] = x[s] + 0.5 * h * k2[s];
        }
        for (j, rx) in reactions.iter().enumerate() {
            delayed[j] = if lags[j] == 0 { rx.reactant.monomial(&stage) } else { half[j] };
        }
        rhs_into(net, &stage, &delayed, &mut k3);

        for s in 0..n {
            stage[s] = x[s] + h * k3[s];
        }
        for (j, rx) in reactions.iter().enumerate() {
            delayed[j] = if lags[j] == 0 {
                rx.reactant.monomial(&stage)
            } else {
                rx.reactant.monomial(&values[(i + 1 - lags[j]) * n..(i + 2 - lags[j]) * n])
            };
        }
        rhs_into(net, &stage, &delayed, &mut k4);

        let t_next = time(i + 1);
        let mut next = vec![0.0; n];
        for s in 0..n {
            next[s] = x[s] + h / 6.0 * (k1[s] + 2.0 * k2[s] + 2.0 * k3[s] + k4[s]);
            if !next[s].is_finite() {
                return Err(SimError::NonFiniteState { t: t_next });
            }
            if next[s] < NEGATIVE_TOL {
                return Err(SimError::NegativeStateAborted {
                    t: t_next,
                    species: s,
                    value: next[s],
                });
            }
        }
        values.extend_from_slice(&next);

        for (j, rx) in reactions.iter().enumerate() {
            delayed[j] = if lags[j] == 0 {
                rx.reactant.monomial(&next)
            } else {
                rx.reactant.monomial(&values[(i + 1 - lags[j]) * n..(i + 2 - lags[j]) * n])
            };
        }
        let mut d = vec![0.0; n];
        rhs_into(net, &next, &delayed, &mut d);
        derivs.extend(d);
    }

    Ok(TrajectoryState {
        step_h: h,
        n,
        prefix,
        delay_offsets: lags,
        rounding_warnings,
        values,
        derivs,
    })
}

/// Composite trapezoid of `f` over grid points `lo..=hi`.
fn trapezoid(h: f64, lo: usize, hi: usize, f: impl Fn(usize) -> f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let inner: f64 = (lo + 1..hi).map(&f).sum();
    h * (0.5 * (f(lo) + f(hi)) + inner)
}

fn g_on<'a>(
    net: &ReactionNetwork,
    lags: &[usize],
    h: f64,
    last: usize,
    row: &dyn Fn(usize) -> &'a [f64],
) -> Vec<f64> {
    let mut g = row(last).to_vec();
    for (r, &l) in net.reactions().iter().zip(lags) {
        if l == 0 {
            continue;
        }
        let integral = trapezoid(h, last - l, last, |j| r.reactant.monomial(row(j)));
        for (s, c) in r.reactant.terms() {
            g[s] += r.rate_k * integral * c as f64;
        }
    }
    g
}

fn window_lags(net: &ReactionNetwork, w: &Window) -> Result<Vec<usize>, SimError> {
    if w.step_h.is_nan() || w.step_h <= 0.0 || w.values.is_empty() {
        return Err(SimError::InvalidArgument("window needs a positive step and at least one row".into()));
    }
    let needed = net.reactions().iter().map(|r| r.delay_tau).fold(0.0, f64::max);
    let available = w.span();
    if available + 0.5 * w.step_h < needed {
        return Err(SimError::WindowTooShort { needed, available });
    }
    Ok(delay_lags(net, w.step_h).0)
}

/// `psi(0) + sum_i k_i (int_{-tau_i}^0 psi(s)^{y_i} ds) y_i`, by trapezoid on the window grid.
pub fn compute_g(net: &ReactionNetwork, window: &Window) -> Result<Vec<f64>, SimError> {
    let lags = window_lags(net, window)?;
    let last = window.values.len() - 1;
    Ok(g_on(net, &lags, window.step_h, last, &|j| &window.values[j]))
}

/// `g` at grid point `i` of a stored trajectory.
pub fn g_at(net: &ReactionNetwork, traj: &TrajectoryState, i: usize) -> Result<Vec<f64>, SimError> {
    let need = traj.lags().iter().copied().max().unwrap_or(0);
    if i < need {
        return Err(SimError::WindowTooShort {
            needed: need as f64 * traj.step_h,
            available: i as f64 * traj.step_h,
        });
    }
    Ok(g_on(net, traj.lags(), traj.step_h, i, &|j| traj.state(j)))
}

fn entropy_term(z: f64, zbar: f64) -> f64 {
    // z (ln z - ln zbar - 1) + zbar, continuous at z = 0
    if z == 0.0 {
        zbar
    } else {
        z * (z.ln() - zbar.ln() - 1.0) + zbar
    }
}

fn lyapunov_on<'a>(
    net: &ReactionNetwork,
    xbar: &[f64],
    lags: &[usize],
    h: f64,
    last: usize,
    row: &dyn Fn(usize) -> &'a [f64],
) -> f64 {
    let now = row(last);
    let mut v: f64 = now.iter().zip(xbar).map(|(&z, &zb)| entropy_term(z, zb)).sum();
    for (r, &l) in net.reactions().iter().zip(lags) {
        if l == 0 {
            continue;
        }
        let mbar = r.reactant.monomial(xbar);
        v += r.rate_k * trapezoid(h, last - l, last, |j| entropy_term(r.reactant.monomial(row(j)), mbar));
    }
    v
}

/// Lyapunov-Krasovskii functional of `window` relative to the equilibrium `xbar`.
pub fn lyapunov_value(net: &ReactionNetwork, xbar: &[f64], window: &Window) -> Result<f64, SimError> {
    let positive = |v: &[f64]| v.len() == net.n_species() && v.iter().all(|x| x.is_finite() && *x > 0.0);
    if !positive(xbar) || !window.values.iter().all(|v| positive(v)) {
        return Err(SimError::NonPositiveWindow);
    }
    let lags = window_lags(net, window)?;
    let last = window.values.len() - 1;
    Ok(lyapunov_on(net, xbar, &lags, window.step_h, last, &|j| &window.values[j]))
}

pub fn lyapunov_at(net: &ReactionNetwork, xbar: &[f64], traj: &TrajectoryState, i: usize) -> f64 {
    lyapunov_on(net, xbar, traj.lags(), traj.step_h, i, &|j| traj.state(j))
}

fn sample_indices(traj: &TrajectoryState, every: Option<usize>) -> Vec<usize> {
    let start = traj.origin();
    let steps = traj.len() - 1 - start;
    let every = every.unwrap_or((steps / 1000).max(1)).max(1);
    let mut idx: Vec<usize> = (start..traj.len()).step_by(every).collect();
    if *idx.last().unwrap() != traj.len() - 1 {
        idx.push(traj.len() - 1);
    }
    idx
}

pub fn run_report(net: &ReactionNetwork, traj: &TrajectoryState, opts: &SimOptions) -> Result<RunReport, SimError> {
    let samples = sample_indices(traj, opts.sample_every);
    let laws: Vec<Vec<f64>> = stoich::conservation_basis(&stoich::stoich_matrix(net))
        .vectors
        .iter()
        .map(|v| v.iter().map(linalg::to_f64).collect())
        .collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    let g0 = g_at(net, traj, traj.origin())?;
    let base: Vec<f64> = laws.iter().map(|a| dot(a, &g0)).collect();
    let drifts: Vec<f64> = samples
        .par_iter()
        .map(|&i| {
            let g = g_at(net, traj, i).expect("window covered by prefix");
            laws.iter()
                .zip(&base)
                .map(|(a, b)| (dot(a, &g) - b).abs() / (1.0 + b.abs()))
                .fold(0.0, f64::max)
        })
        .collect();
    let conservation_drift = drifts.into_iter().fold(0.0, f64::max);

    let reference = match &opts.lyapunov {
        LyapunovReference::Fixed(x) => Some(x.clone()),
        LyapunovReference::Search => balance::find_complex_balanced_equilibrium(net)
            .ok()
            .map(|e| e.concentrations),
        LyapunovReference::Off => None,
    };
    let lyapunov_series = match &reference {
        Some(xbar) if xbar.iter().all(|v| *v > 0.0) => samples
            .par_iter()
            .map(|&i| (traj.time(i), lyapunov_at(net, xbar, traj, i)))
            .collect(),
        _ => Vec::new(),
    };

    let n = traj.n;
    let end = traj.len() - 1;
    let half_start = traj.origin() + (end - traj.origin()) / 2;
    let mut min_concentration = vec![f64::INFINITY; n];
    for i in half_start..=end {
        for (m, &x) in min_concentration.iter_mut().zip(traj.state(i)) {
            *m = m.min(x);
        }
    }
    let terminal_state = traj.terminal().to_vec();
    let equilibrium_residual = balance::species_rhs(net, &terminal_state)
        .iter()
        .fold(0.0, |m: f64, v| m.max(v.abs()));

    Ok(RunReport {
        conservation_drift,
        lyapunov_reference: reference,
        lyapunov_series,
        min_concentration,
        terminal_state,
        equilibrium_residual,
        rounding_warnings: traj.rounding_warnings.clone(),
    })
}

/// Writes `t,<species>` rows for `t >= 0`, every `every`-th grid point
/// plus the last one.
pub fn write_csv<W: Write>(
    net: &ReactionNetwork,
    traj: &TrajectoryState,
    every: usize,
    out: &mut W,
) -> io::Result<()> {
    let names: Vec<&str> = net.species().iter().map(|s| s.name.as_str()).collect();
    writeln!(out, "t,{}", names.join(","))?;
    for i in sample_indices(traj, Some(every.max(1))) {
        let row: Vec<String> = traj.state(i).iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{:.16e},{}", traj.time(i), row.join(","))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeTrial {
    pub delays: Vec<f64>,
    pub history: Vec<f64>,
    pub min_concentration: Vec<f64>,
    pub terminal_state: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSummary {
    pub trials: Vec<ProbeTrial>,
    /// Minimum over trials and species of the final-half minimum.
    pub min_concentration: f64,
    pub floor: f64,
    pub floor_breached: bool,
}

/// Random positive constant histories (log-uniform in `[0.5, 2]`) and random
/// grid-aligned delays in `[0, 2]`.
pub fn persistence_probe(
    net: &ReactionNetwork,
    trials: usize,
    t_end: f64,
    step_h: f64,
    seed: u64,
) -> Result<ProbeSummary, SimError> {
    if trials == 0 {
        return Err(SimError::InvalidArgument("trials must be at least 1".into()));
    }
    if step_h.is_nan() || step_h <= 0.0 {
        return Err(SimError::InvalidArgument("step must be positive".into()));
    }
    let max_lag = (PROBE_MAX_DELAY / step_h).floor() as u64;
    let results: Vec<ProbeTrial> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
            let delays: Vec<f64> = (0..net.n_reactions())
                .map(|_| rng.gen_range(0..=max_lag) as f64 * step_h)
                .collect();
            let history: Vec<f64> = (0..net.n_species())
                .map(|_| rng.gen_range(0.5f64.ln()..=2.0f64.ln()).exp())
                .collect();
            let delayed = net.with_delays(&delays);
            let traj = integrate(&delayed, &HistoryFunction::Constant(history.clone()), t_end, step_h)?;
            let report = run_report(
                &delayed,
                &traj,
                &SimOptions {
                    sample_every: Some(usize::MAX),
                    lyapunov: LyapunovReference::Off,
                },
            )?;
            Ok(ProbeTrial {
                delays,
                history,
                min_concentration: report.min_concentration,
                terminal_state: report.terminal_state,
            })
        })
        .collect::<Result<_, SimError>>()?;
    let min_concentration = results
        .iter()
        .flat_map(|t| t.min_concentration.iter().copied())
        .fold(f64::INFINITY, f64::min);
    Ok(ProbeSummary {
        floor_breached: min_concentration < PROBE_FLOOR,
        trials: results,
        min_concentration,
        floor: PROBE_FLOOR,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    const E: f64 = std::f64::consts::E;

    #[test]
    fn ab_reaches_even_split() {
        let (_, rep) = simulate(&fixtures::net_ab(), &HistoryFunction::Constant(vec![2.0, 0.5]), 50.0, 1e-3).unwrap();
        assert!((rep.terminal_state[0] - 1.25).abs() < 1e-9, "{:?}", rep.terminal_state);
        assert!((rep.terminal_state[1] - 1.25).abs() < 1e-9);
        assert!(rep.equilibrium_residual < 1e-8);
        assert!(rep.conservation_drift < 1e-12);
    }

    #[test]
    fn matches_closed_form() {
        // x1 - x2 decays like exp(-2t) with unit rates.
        let (traj, _) = simulate(&fixtures::net_ab(), &HistoryFunction::Constant(vec![2.0, 0.5]), 1.0, 0.01).unwrap();
        let x = traj.terminal();
        let diff = 1.5 * (-2.0f64).exp();
        assert!((x[0] - (1.25 + diff / 2.0)).abs() < 1e-9);
        assert!((x[1] - (1.25 - diff / 2.0)).abs() < 1e-9);
    }

    #[test]
    fn g_examples() {
        let ab = fixtures::net_ab();
        let w = Window::constant(&[2.0, 3.0], 0.0, 0.1);
        assert_eq!(compute_g(&ab, &w).unwrap(), vec![2.0, 3.0]);

        let delayed = ab.with_delays(&[1.0, 0.0]);
        let w = Window::constant(&[2.0, 3.0], 1.0, 0.01);
        let g = compute_g(&delayed, &w).unwrap();
        assert!((g[0] - 4.0).abs() < 1e-12 && (g[1] - 3.0).abs() < 1e-12, "{g:?}");

        let short = Window::constant(&[2.0, 3.0], 0.5, 0.01);
        assert!(matches!(compute_g(&delayed, &short), Err(SimError::WindowTooShort { .. })));
    }

    #[test]
    fn lyapunov_examples() {
        let ab = fixtures::net_ab();
        let at_eq = Window::constant(&[1.0, 1.0], 0.0, 0.1);
        assert_eq!(lyapunov_value(&ab, &[1.0, 1.0], &at_eq).unwrap(), 0.0);
        let w = Window::constant(&[E, 1.0], 0.0, 0.1);
        assert!((lyapunov_value(&ab, &[1.0, 1.0], &w).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(lyapunov_value(&ab, &[0.0, 1.0], &w), Err(SimError::NonPositiveWindow));
        let delayed = ab.with_delays(&[0.5, 0.5]);
        let w = Window::constant(&[1.0, 1.0], 0.5, 0.01);
        assert!(lyapunov_value(&delayed, &[1.0, 1.0], &w).unwrap().abs() < 1e-12);
    }

    #[test]
    fn argument_errors() {
        let trio = fixtures::net_trio();
        let psi = HistoryFunction::Constant(vec![1.0; 3]);
        assert!(matches!(simulate(&trio, &psi, 1.0, 0.2), Err(SimError::StepTooLarge { .. })));
        assert!(matches!(simulate(&trio, &psi, 1.0, 0.0), Err(SimError::InvalidArgument(_))));
        assert!(matches!(simulate(&trio, &psi, 0.0, 0.01), Err(SimError::InvalidArgument(_))));
        let bad = HistoryFunction::Constant(vec![1.0, -1.0, 1.0]);
        assert!(matches!(simulate(&trio, &bad, 1.0, 0.01), Err(SimError::InvalidArgument(_))));
        assert!(matches!(
            persistence_probe(&trio, 0, 1.0, 0.01, 1),
            Err(SimError::InvalidArgument(_))
        ));
    }

    #[test]
    fn rounding_is_recorded() {
        let ab = fixtures::net_ab().with_delays(&[0.105, 0.1]);
        let traj = integrate(&ab, &HistoryFunction::Constant(vec![1.0, 2.0]), 0.5, 0.01).unwrap();
        assert_eq!(traj.delay_offsets, vec![11, 10]);
        assert_eq!(traj.rounding_warnings.len(), 1);
    }

    #[test]
    fn piecewise_history() {
        let h = HistoryFunction::PiecewiseLinear {
            grid: vec![-1.0, 0.0],
            values: vec![vec![1.0], vec![3.0]],
        };
        assert_eq!(h.eval(-0.5), vec![2.0]);
        assert_eq!(h.eval(-2.0), vec![1.0]);
        assert_eq!(h.eval(0.0), vec![3.0]);
    }

    #[test]
    fn csv_layout() {
        let ab = fixtures::net_ab();
        let traj = integrate(&ab, &HistoryFunction::Constant(vec![1.0, 1.0]), 0.05, 0.01).unwrap();
        let mut buf = Vec::new();
        write_csv(&ab, &traj, 2, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,X1,X2");
        // t = 0, 0.02, 0.04, 0.05
        assert_eq!(lines.len(), 5);
    }

    #[test]
    fn probe_is_deterministic() {
        let ab = fixtures::net_ab();
        let a = persistence_probe(&ab, 3, 5.0, 0.05, 7).unwrap();
        let b = persistence_probe(&ab, 3, 5.0, 0.05, 7).unwrap();
        assert_eq!(a, b);
        assert!(!a.floor_breached);
    }
}
