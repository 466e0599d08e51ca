use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::slope_or_none;
use crate::analysis::{linear_fit, mean_stderr, PowerLawFit};
use crate::engine::{run_limit_copies, run_particle_system, Observer, DEFAULT_MARK_SAMPLES};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::measure::MeasureFlow;
use crate::model::ModelSpec;
use crate::noise::{build_bundle, replica_seed};
use crate::picard::{solve_flow, window_length, PicardDiagnostics, PicardOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChaosOptions {
    pub ns: Vec<usize>,
    pub horizon: f64,
    pub dt: f64,
    pub replicas: usize,
    pub seed: u64,
    /// Draw the limit copy's initial state independently instead of sharing it.
    pub independent_initial: bool,
    pub n_mark_samples: usize,
    /// Options for the limit flow solved beforehand.
    pub picard: PicardOptions,
}

impl Default for ChaosOptions {
    fn default() -> Self {
        Self {
            ns: vec![10, 40, 160, 640],
            horizon: 1.0,
            dt: 1e-3,
            replicas: 50,
            seed: 0,
            independent_initial: false,
            n_mark_samples: DEFAULT_MARK_SAMPLES,
            picard: PicardOptions::default(),
        }
    }
}

/// Coupling error of particle 1 in one replica.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChaosRow {
    pub n: usize,
    pub replica: usize,
    /// `|X^{N,1}_0 - X̄^1_0|`.
    pub initial_gap: f64,
    /// `sup_t |X^{N,1}_t - X̄^1_t|` over the grid.
    pub error: f64,
    /// The same supremum restricted to each window.
    pub window_errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChaosPoint {
    pub n: usize,
    pub replicas: usize,
    pub mean: f64,
    pub stderr: f64,
    pub initial_gap: f64,
    /// Mean over replicas of each window error, `S_k^N`.
    pub window_means: Vec<f64>,
}

/// Third-window check of the recursion `S_k = C1 (S_{k-1} + N^{-1/2})^{C2}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowPrediction {
    pub c1: f64,
    pub c2: f64,
    /// Per N: (n, predicted S_2, observed S_2).
    pub predictions: Vec<(usize, f64, f64)>,
    pub factor: f64,
    pub within_factor: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChaosResult {
    pub model: String,
    pub seed: u64,
    pub dt: f64,
    pub horizon: f64,
    pub window_length: f64,
    /// Written to CSV rather than the JSON summary.
    #[serde(skip_serializing)]
    pub rows: Vec<ChaosRow>,
    pub points: Vec<ChaosPoint>,
    pub fit: Option<PowerLawFit>,
    pub strictly_decreasing: bool,
    pub prediction: Option<WindowPrediction>,
    pub flow: Option<PicardDiagnostics>,
}

impl ChaosResult {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            n: usize,
            replica: usize,
            initial_gap: f64,
            error: f64,
        }
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(Row {
                n: r.n,
                replica: r.replica,
                initial_gap: r.initial_gap,
                error: r.error,
            })?;
        }
        w.flush().map_err(|e| Error::io("<chaos csv>", e))?;
        Ok(())
    }
}

/// Solves the limit flow, then runs the coupled experiment. Refuses to run
/// when the flow did not converge.
pub fn run_chaos(spec: &ModelSpec, opts: &ChaosOptions) -> Result<ChaosResult> {
    let grid = TimeGrid::uniform(opts.horizon, opts.dt)?;
    let (flow, diag) = solve_flow(spec, &grid, &opts.picard)?;
    if !diag.converged {
        return Err(Error::FlowNotConverged);
    }
    let mut result = run_chaos_with_flow(spec, &flow, opts)?;
    result.flow = Some(diag);
    Ok(result)
}

/// Records particle 0 at every node.
struct Tracker(Vec<f64>);

impl Observer for Tracker {
    fn on_node(&mut self, node: usize, _t: f64, states: &[f64]) {
        self.0[node] = states[0];
    }
}

/// Runs the coupled experiment against a pre-solved flow.
pub fn run_chaos_with_flow(spec: &ModelSpec, flow: &MeasureFlow, opts: &ChaosOptions) -> Result<ChaosResult> {
    if opts.ns.is_empty() || opts.replicas == 0 {
        return Err(Error::Domain("need at least one N and one replica".into()));
    }
    if opts.ns.windows(2).any(|w| w[1] <= w[0]) || opts.ns[0] == 0 {
        return Err(Error::Domain("particle counts must be positive and increasing".into()));
    }
    let grid = flow.grid().clone();
    let lambda = spec.dominating_rate()?;
    let window = window_length(spec, grid.t_end());
    let windows = grid.windows(window);
    let jobs: Vec<(usize, usize)> = opts
        .ns
        .iter()
        .flat_map(|&n| (0..opts.replicas).map(move |r| (n, r)))
        .collect();

    let rows = jobs
        .into_par_iter()
        .map(|(n, r)| {
            let bundle = build_bundle(replica_seed(opts.seed, r), n, &grid, lambda, spec.mark_law)?;
            let view = bundle.view();
            let initial: Vec<f64> = (0..n).map(|i| view.initial_state(i, &spec.initial_law)).collect();
            let limit_start = if opts.independent_initial {
                bundle.independent_initial_state(0, &spec.initial_law)
            } else {
                initial[0]
            };
            let mut particle = Tracker(vec![0.0; grid.len()]);
            run_particle_system(spec, &view, initial, 0..grid.steps(), &mut particle)?;
            let mut limit = Tracker(vec![0.0; grid.len()]);
            run_limit_copies(
                spec,
                flow.measures(),
                &view,
                vec![limit_start],
                0..grid.steps(),
                opts.n_mark_samples,
                &mut limit,
            )?;
            let gap: Vec<f64> = particle.0.iter().zip(&limit.0).map(|(a, b)| (a - b).abs()).collect();
            let sup = |lo: usize, hi: usize| gap[lo..=hi].iter().fold(0.0f64, |a, &v| a.max(v));
            Ok(ChaosRow {
                n,
                replica: r,
                initial_gap: gap[0],
                error: sup(0, grid.steps()),
                window_errors: windows.iter().map(|&(s, e)| sup(s, e)).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let points: Vec<ChaosPoint> = opts
        .ns
        .iter()
        .map(|&n| {
            let mine: Vec<&ChaosRow> = rows.iter().filter(|r| r.n == n).collect();
            let errors: Vec<f64> = mine.iter().map(|r| r.error).collect();
            let (mean, stderr) = mean_stderr(&errors);
            let gaps: Vec<f64> = mine.iter().map(|r| r.initial_gap).collect();
            let window_means = (0..windows.len())
                .map(|k| mine.iter().map(|r| r.window_errors[k]).sum::<f64>() / mine.len() as f64)
                .collect();
            ChaosPoint {
                n,
                replicas: mine.len(),
                mean,
                stderr,
                initial_gap: mean_stderr(&gaps).0,
                window_means,
            }
        })
        .collect();

    let xs: Vec<f64> = points.iter().map(|p| p.n as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean).collect();
    let strictly_decreasing = ys.windows(2).all(|w| w[1] < w[0]);
    Ok(ChaosResult {
        model: spec.id.clone(),
        seed: opts.seed,
        dt: opts.dt,
        horizon: grid.t_end(),
        window_length: window,
        fit: slope_or_none(&xs, &ys),
        strictly_decreasing,
        prediction: predict_third_window(&points),
        points,
        rows,
        flow: None,
    })
}

/// Fits `ln S_k = ln C1 + C2 ln(S_{k-1} + N^{-1/2})` on windows 0 and 1
/// (with `S_{-1}` the initial gap) and predicts window 2 from the observed
/// `S_1`.
fn predict_third_window(points: &[ChaosPoint]) -> Option<WindowPrediction> {
    const FACTOR: f64 = 3.0;
    if points.iter().any(|p| p.window_means.len() < 3) {
        return None;
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for p in points {
        let h = 1.0 / (p.n as f64).sqrt();
        let s = &p.window_means;
        for (prev, cur) in [(p.initial_gap, s[0]), (s[0], s[1])] {
            if cur > 0.0 {
                xs.push((prev + h).ln());
                ys.push(cur.ln());
            }
        }
    }
    if xs.len() < 3 {
        return None;
    }
    let fit = linear_fit(&xs, &ys);
    let (c1, c2) = (fit.intercept.exp(), fit.slope);
    let predictions: Vec<(usize, f64, f64)> = points
        .iter()
        .map(|p| {
            let h = 1.0 / (p.n as f64).sqrt();
            (p.n, c1 * (p.window_means[1] + h).powf(c2), p.window_means[2])
        })
        .collect();
    let within_factor = predictions
        .iter()
        .all(|&(_, pred, obs)| obs > 0.0 && pred / obs <= FACTOR && obs / pred <= FACTOR);
    Some(WindowPrediction {
        c1,
        c2,
        predictions,
        factor: FACTOR,
        within_factor,
    })
}
