use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{gronwall_exp_moment_bound, mean_stderr};
use crate::engine::{run_particle_system, Observer};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::measure::SATURATION_LEVEL;
use crate::model::ModelSpec;
use crate::noise::{build_bundle, replica_seed};

/// Replica-averaged `N^{-1} Σ_i e^{a|X^i_t|}` on the grid for one `N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentCurve {
    pub n: usize,
    pub replicas: usize,
    pub times: Vec<f64>,
    pub observed: Vec<f64>,
    pub stderr: Vec<f64>,
    pub bound: Vec<f64>,
    /// `sup_t observed` over the bound at the horizon.
    pub max_ratio: f64,
    /// `observed ≤ bound + 3 stderr` at every node.
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentAudit {
    pub model: String,
    pub seed: u64,
    pub dt: f64,
    pub gronwall_k: f64,
    pub curves: Vec<MomentCurve>,
    pub max_ratio: f64,
    /// Largest over smallest per-`N` max ratio.
    pub uniformity: f64,
    pub passed: bool,
}

struct ExpMoments {
    a: f64,
    values: Vec<f64>,
}

impl Observer for ExpMoments {
    fn on_node(&mut self, node: usize, _t: f64, states: &[f64]) {
        let s: f64 = states.iter().map(|x| (self.a * x.abs()).exp()).sum();
        self.values[node] = s / states.len() as f64;
    }
}

/// Compares simulated exponential moments with the Gronwall bound started
/// from the empirical time-zero moment.
pub fn run_moment_audit(
    spec: &ModelSpec,
    ns: &[usize],
    horizon: f64,
    dt: f64,
    replicas: usize,
    seed: u64,
) -> Result<MomentAudit> {
    if ns.is_empty() || ns.contains(&0) || replicas == 0 {
        return Err(Error::Domain("need positive particle counts and at least one replica".into()));
    }
    let grid = TimeGrid::uniform(horizon, dt)?;
    let lambda = spec.dominating_rate()?;
    let k = crate::analysis::gronwall_constant(spec)?;
    let mut curves = Vec::with_capacity(ns.len());
    for &n in ns {
        let runs = (0..replicas)
            .into_par_iter()
            .map(|r| {
                let bundle = build_bundle(replica_seed(seed, r), n, &grid, lambda, spec.mark_law)?;
                let view = bundle.view();
                let initial = (0..n).map(|i| view.initial_state(i, &spec.initial_law)).collect();
                let mut obs = ExpMoments {
                    a: spec.exp_exponent,
                    values: vec![0.0; grid.len()],
                };
                run_particle_system(spec, &view, initial, 0..grid.steps(), &mut obs)?;
                Ok(obs.values)
            })
            .collect::<Result<Vec<_>>>()?;

        let mut observed = Vec::with_capacity(grid.len());
        let mut stderr = Vec::with_capacity(grid.len());
        for (node, &t) in grid.points().iter().enumerate() {
            let col: Vec<f64> = runs.iter().map(|v| v[node]).collect();
            let (m, se) = mean_stderr(&col);
            if !(m <= SATURATION_LEVEL) {
                return Err(Error::MomentSaturated { time: t });
            }
            observed.push(m);
            stderr.push(se);
        }
        let e0 = observed[0].max(1.0);
        let bound = grid
            .points()
            .iter()
            .map(|&t| gronwall_exp_moment_bound(spec, e0, t))
            .collect::<Result<Vec<_>>>()?;
        let sup = observed.iter().copied().fold(0.0, f64::max);
        let max_ratio = sup / bound[bound.len() - 1];
        let passed = observed
            .iter()
            .zip(&bound)
            .zip(&stderr)
            .all(|((o, b), se)| *o <= b + 3.0 * se);
        curves.push(MomentCurve {
            n,
            replicas,
            times: grid.points().to_vec(),
            observed,
            stderr,
            bound,
            max_ratio,
            passed,
        });
    }
    let max_ratio = curves.iter().map(|c| c.max_ratio).fold(0.0, f64::max);
    let min_ratio = curves.iter().map(|c| c.max_ratio).fold(f64::INFINITY, f64::min);
    Ok(MomentAudit {
        model: spec.id.clone(),
        seed,
        dt,
        gronwall_k: k,
        passed: curves.iter().all(|c| c.passed),
        uniformity: max_ratio / min_ratio,
        max_ratio,
        curves,
    })
}
