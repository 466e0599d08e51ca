//! Picard iteration on measure flows for the limit equation.
//!
//! Iterate `n + 1` simulates `M` copies of the limit dynamics against the
//! frozen flow `μ^[n]` and takes empirical laws at every grid node. All
//! iterations share one noise bundle. The horizon is split into windows of
//! length `min(1/(16 L²), T)`; each window restarts from the terminal
//! samples of the previous one.

use serde::{Deserialize, Serialize};

use crate::engine::{run_limit_copies, Compensator, Observer, DEFAULT_MARK_SAMPLES};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::measure::{flow_sup_w1, w1, EmpiricalMeasure, MeasureFlow};
use crate::model::ModelSpec;
use crate::noise::{build_bundle, NoiseBundle, NoiseView};

pub const DEFAULT_SAMPLES: usize = 5000;
pub const DEFAULT_TOL: f64 = 0.02;
pub const DEFAULT_MAX_ITER: usize = 50;
pub const MIN_SAMPLES: usize = 100;

/// How iterate `n + 1` depends on iterate `n`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PicardScheme {
    /// Solve the SDE with the flow `μ^[n]` frozen.
    #[default]
    FrozenFlow,
    /// Evaluate every coefficient along the previous path `X^[n]` and the
    /// flow `μ^[n]`, so `X^[n+1]` is an explicit functional of `X^[n]`.
    PathIterate,
}

/// The flow `μ^[0]` each window starts from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StartFlow {
    /// Empirical law of the window's starting samples at every node.
    #[default]
    InitialLaw,
    /// `δ_value` at every node.
    Dirac { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardOptions {
    pub samples: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub n_mark_samples: usize,
    pub scheme: PicardScheme,
    pub start: StartFlow,
    /// Overrides the window length `min(1/(16 L²), T)`.
    pub window: Option<f64>,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            seed: 0,
            n_mark_samples: DEFAULT_MARK_SAMPLES,
            scheme: PicardScheme::FrozenFlow,
            start: StartFlow::InitialLaw,
            window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowDiagnostics {
    pub start_time: f64,
    pub end_time: f64,
    pub iterations: usize,
    /// `d_n = sup_t W1(μ^[n+1]_t, μ^[n]_t)` over the window.
    pub distances: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardDiagnostics {
    pub samples: usize,
    pub tol: f64,
    pub window_length: f64,
    pub windows: Vec<WindowDiagnostics>,
    /// Total iterations over all windows.
    pub iterations: usize,
    pub converged: bool,
    /// Largest final `d_n` over the windows.
    pub final_distance: f64,
}

impl PicardDiagnostics {
    pub fn max_window_iterations(&self) -> usize {
        self.windows.iter().map(|w| w.iterations).max().unwrap_or(0)
    }
}

/// Collects the empirical law and, optionally, the sample values at each node.
struct NodeCollector {
    measures: Vec<EmpiricalMeasure>,
    paths: Option<Vec<Vec<f64>>>,
    error: Option<Error>,
}

impl Observer for NodeCollector {
    fn on_node(&mut self, _node: usize, _t: f64, states: &[f64]) {
        if let Some(p) = &mut self.paths {
            p.push(states.to_vec());
        }
        match EmpiricalMeasure::from_samples(states) {
            Ok(m) => self.measures.push(m),
            Err(e) => {
                self.error.get_or_insert(e);
            }
        }
    }
}

pub fn window_length(spec: &ModelSpec, horizon: f64) -> f64 {
    (1.0 / (16.0 * spec.lipschitz * spec.lipschitz)).min(horizon)
}

/// Solves for the law flow on `grid`. The limit dynamics include the
/// compensator drift of the collective kernel when the model has one.
pub fn solve_flow(spec: &ModelSpec, grid: &TimeGrid, opts: &PicardOptions) -> Result<(MeasureFlow, PicardDiagnostics)> {
    if opts.samples < MIN_SAMPLES {
        return Err(Error::Domain(format!("need at least {MIN_SAMPLES} samples, got {}", opts.samples)));
    }
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(Error::Domain("tolerance and iteration cap must be positive".into()));
    }
    let lambda = spec.dominating_rate()?;
    let bundle = build_bundle(opts.seed, opts.samples, grid, lambda, spec.mark_law)?;
    let view = bundle.view();
    let initial: Vec<f64> = (0..opts.samples)
        .map(|i| view.initial_state(i, &spec.initial_law))
        .collect();
    let window = opts.window.unwrap_or_else(|| window_length(spec, grid.t_end()));
    if !(window > 0.0) {
        return Err(Error::Domain(format!("window length must be positive, got {window}")));
    }

    let mut measures = vec![EmpiricalMeasure::from_samples(&initial)?];
    let mut start_states = initial;
    let mut windows = Vec::new();
    for (s, e) in grid.windows(window) {
        let (flow, terminal, diag) = solve_window(spec, &bundle, &view, &start_states, s, e, opts)?;
        measures.extend(flow.into_iter().skip(1));
        start_states = terminal;
        windows.push(diag);
    }

    let converged = windows.iter().all(|w| w.converged);
    let final_distance = windows
        .iter()
        .filter_map(|w| w.distances.last().copied())
        .fold(0.0, f64::max);
    let diagnostics = PicardDiagnostics {
        samples: opts.samples,
        tol: opts.tol,
        window_length: window,
        iterations: windows.iter().map(|w| w.iterations).sum(),
        windows,
        converged,
        final_distance,
    };
    Ok((MeasureFlow::new(grid.clone(), measures)?, diagnostics))
}

type WindowResult = (Vec<EmpiricalMeasure>, Vec<f64>, WindowDiagnostics);

fn solve_window(
    spec: &ModelSpec,
    bundle: &NoiseBundle,
    view: &NoiseView<'_>,
    start: &[f64],
    s: usize,
    e: usize,
    opts: &PicardOptions,
) -> Result<WindowResult> {
    let grid = bundle.grid();
    let nodes = e - s + 1;
    let (mut flow, mut prev_paths) = match opts.start {
        StartFlow::InitialLaw => (
            vec![EmpiricalMeasure::from_samples(start)?; nodes],
            vec![start.to_vec(); nodes],
        ),
        StartFlow::Dirac { value } => (
            vec![EmpiricalMeasure::dirac(value); nodes],
            vec![vec![value; start.len()]; nodes],
        ),
    };
    let mut distances = Vec::new();
    let mut terminal = start.to_vec();
    let mut converged = false;
    for _ in 0..opts.max_iter {
        let keep_paths = opts.scheme == PicardScheme::PathIterate;
        let mut col = NodeCollector {
            measures: Vec::with_capacity(nodes),
            paths: keep_paths.then(|| Vec::with_capacity(nodes)),
            error: None,
        };
        terminal = match opts.scheme {
            PicardScheme::FrozenFlow => {
                run_limit_copies(spec, &flow, view, start.to_vec(), s..e, opts.n_mark_samples, &mut col)?
            }
            PicardScheme::PathIterate => path_iterate(spec, &flow, &prev_paths, view, start, s..e, opts, &mut col)?,
        };
        if let Some(err) = col.error {
            return Err(err);
        }
        let next = col.measures;
        let saturated = next.iter().position(|m| m.exp_moment(spec.exp_exponent).saturated);
        if let Some(node) = saturated {
            return Err(Error::MomentSaturated {
                time: grid.points()[s + node],
            });
        }
        let d = next.iter().zip(&flow).map(|(a, b)| w1(a, b)).fold(0.0, f64::max);
        distances.push(d);
        flow = next;
        if let Some(p) = col.paths {
            prev_paths = p;
        }
        if d < opts.tol {
            converged = true;
            break;
        }
    }
    let diag = WindowDiagnostics {
        start_time: grid.points()[s],
        end_time: grid.points()[e],
        iterations: distances.len(),
        distances,
        converged,
    };
    Ok((flow, terminal, diag))
}

/// One iterate of the path scheme: coefficients at the previous path
/// `prev[k - s]` and the frozen flow, noise from `view`.
#[allow(clippy::too_many_arguments)]
fn path_iterate(
    spec: &ModelSpec,
    flow: &[EmpiricalMeasure],
    prev: &[Vec<f64>],
    view: &NoiseView<'_>,
    start: &[f64],
    steps: std::ops::Range<usize>,
    opts: &PicardOptions,
    obs: &mut NodeCollector,
) -> Result<Vec<f64>> {
    let grid = view.grid();
    let s = steps.start;
    let mut x = start.to_vec();
    obs.on_node(s, grid.points()[s], &x);
    for k in steps {
        let (t0, t1) = (grid.points()[k], grid.points()[k + 1]);
        let dt = t1 - t0;
        let m = &flow[k - s];
        let comp = spec
            .has_collective()
            .then(|| Compensator::new(spec, m, opts.n_mark_samples, &mut view.compensator_rng(k)));
        for (i, xi) in x.iter_mut().enumerate() {
            let xp = prev[k - s][i];
            let mut drift = spec.drift(xp, m);
            if let Some(c) = &comp {
                drift += c.eval(spec, xp, m);
            }
            let mut next = *xi + drift * dt + spec.diffusion(xp, m) * view.increments(i)[k];
            let f = spec.rate(xp, m);
            for ev in view.events(i).iter().filter(|ev| ev.time > t0 && ev.time <= t1) {
                if ev.z <= f {
                    next += spec.self_jump(xp, m, ev.mark);
                }
            }
            if !next.is_finite() {
                return Err(Error::NonFinite {
                    time: t1,
                    particle: i,
                    state: next,
                    drift,
                    diffusion: spec.diffusion(xp, m),
                });
            }
            *xi = next;
        }
        obs.on_node(k + 1, t1, &x);
    }
    Ok(x)
}

/// Outcome of two Picard runs that differ only in their starting flow.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub start_a: StartFlow,
    pub start_b: StartFlow,
    pub converged_a: bool,
    pub converged_b: bool,
    /// `sup_t W1` between the two final flows.
    pub distance: f64,
    pub tol: f64,
    /// False when either run failed to converge.
    pub conclusive: bool,
    pub passed: bool,
}

/// Runs the solver from `start_a` and `start_b` with the same initial draws
/// and noise and compares the final flows against `2 tol`.
pub fn uniqueness_probe(
    spec: &ModelSpec,
    grid: &TimeGrid,
    opts: &PicardOptions,
    start_a: StartFlow,
    start_b: StartFlow,
) -> Result<UniquenessReport> {
    let run = |start| {
        let o = PicardOptions { start, ..opts.clone() };
        solve_flow(spec, grid, &o)
    };
    let (fa, da) = run(start_a)?;
    let (fb, db) = run(start_b)?;
    let distance = flow_sup_w1(&fa, &fb)?;
    let conclusive = da.converged && db.converged;
    Ok(UniquenessReport {
        start_a,
        start_b,
        converged_a: da.converged,
        converged_b: db.converged,
        distance,
        tol: opts.tol,
        conclusive,
        passed: conclusive && distance < 2.0 * opts.tol,
    })
}
