use rayon::prelude::*;
use serde::Serialize;

use super::{check_noise, run_particle_system, EventInfo, Observer};
use crate::error::Result;
use crate::grid::TimeGrid;
use crate::measure::EmpiricalMeasure;
use crate::model::ModelSpec;
use crate::noise::{build_bundle, replica_seed, NoiseView};

const FALLBACK_MARK_NODES: usize = 8;

/// Accumulates, for one particle, the collective jumps received minus their
/// compensator `(1/N) Σ_j ∫ Θ(X^j, X^i, μ^N, v) f(X^j, μ^N) dν(v) dt`.
pub struct GnObserver<'a> {
    spec: &'a ModelSpec,
    target: usize,
    mark_nodes: Vec<f64>,
    jumps: f64,
    compensator: f64,
    pub values: Vec<f64>,
}

impl<'a> GnObserver<'a> {
    pub fn new(spec: &'a ModelSpec, target: usize, nodes: usize) -> Self {
        Self {
            spec,
            target,
            mark_nodes: spec.mark_law.quantile_nodes(FALLBACK_MARK_NODES),
            jumps: 0.0,
            compensator: 0.0,
            values: vec![0.0; nodes],
        }
    }

    fn mark_mean(&self, src: f64, tgt: f64, m: &EmpiricalMeasure) -> f64 {
        if let Some(v) = self.spec.collective_mark_mean(src, tgt, m) {
            return v;
        }
        let nodes = &self.mark_nodes;
        let mut acc = 0.0;
        for &v1 in nodes {
            for &v2 in nodes {
                acc += self.spec.collective(src, tgt, m, v1, v2);
            }
        }
        acc / (nodes.len() * nodes.len()) as f64
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

impl Observer for GnObserver<'_> {
    fn on_step_start(&mut self, _step: usize, dt: f64, states: &[f64], m: &EmpiricalMeasure) {
        if !self.spec.has_collective() {
            return;
        }
        let xt = states[self.target];
        let total: f64 = states
            .iter()
            .map(|&xs| self.mark_mean(xs, xt, m) * self.spec.rate(xs, m))
            .sum();
        self.compensator += dt * total / states.len() as f64;
    }

    fn on_event(&mut self, e: &EventInfo<'_>) {
        if e.accepted && !e.theta.is_empty() {
            self.jumps += e.theta[self.target];
        }
    }

    fn on_node(&mut self, node: usize, _t: f64, _states: &[f64]) {
        self.values[node] = self.jumps - self.compensator;
    }
}

/// `G^N` along one particle-system trajectory, for particle 0.
pub fn gn_path(spec: &ModelSpec, n: usize, noise: &NoiseView<'_>, grid: &TimeGrid) -> Result<Vec<f64>> {
    check_noise(spec, noise, grid, n)?;
    let initial: Vec<f64> = (0..n).map(|i| noise.initial_state(i, &spec.initial_law)).collect();
    let mut obs = GnObserver::new(spec, 0, grid.len());
    run_particle_system(spec, noise, initial, 0..grid.steps(), &mut obs)?;
    Ok(obs.values)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GnEstimate {
    pub n: usize,
    /// `sup_t |G^N_t|` per replica, in replica order.
    pub sups: Vec<f64>,
    /// Mean over replicas of `sup_t |G^N_t|^2`.
    pub sup_sq_mean: f64,
    pub sup_sq_stderr: f64,
    /// Mean path of `G^N` over replicas.
    pub mean_path: Vec<f64>,
}

/// Runs `replicas` independent particle systems of size `n`, replica `r`
/// seeded by `replica_seed(seed, r)`.
pub fn estimate_gn(spec: &ModelSpec, n: usize, grid: &TimeGrid, replicas: usize, seed: u64) -> Result<GnEstimate> {
    let lambda = spec.dominating_rate()?;
    let paths = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let bundle = build_bundle(replica_seed(seed, r), n, grid, lambda, spec.mark_law)?;
            gn_path(spec, n, &bundle.view(), grid)
        })
        .collect::<Result<Vec<_>>>()?;
    let sups: Vec<f64> = paths
        .iter()
        .map(|p| p.iter().fold(0.0f64, |a, v| a.max(v.abs())))
        .collect();
    let sq: Vec<f64> = sups.iter().map(|s| s * s).collect();
    let (sup_sq_mean, sup_sq_stderr) = crate::analysis::mean_stderr(&sq);
    let mut mean_path = vec![0.0; grid.len()];
    for p in &paths {
        for (acc, v) in mean_path.iter_mut().zip(p) {
            *acc += v / replicas as f64;
        }
    }
    Ok(GnEstimate {
        n,
        sups,
        sup_sq_mean,
        sup_sq_stderr,
        mean_path,
    })
}
