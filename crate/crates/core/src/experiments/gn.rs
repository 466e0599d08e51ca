use serde::Serialize;

use super::slope_or_none;
use crate::analysis::PowerLawFit;
use crate::engine::estimate_gn;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::model::ModelSpec;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GnPoint {
    pub n: usize,
    pub replicas: usize,
    /// `E sup_t |G^N_t|^2`.
    pub sup_sq_mean: f64,
    pub sup_sq_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GnRateResult {
    pub model: String,
    pub seed: u64,
    pub horizon: f64,
    pub dt: f64,
    pub points: Vec<GnPoint>,
    /// Slope of `E sup|G^N|^2` against `N`; `None` when the term vanishes.
    pub fit: Option<PowerLawFit>,
}

pub fn run_gn_rate(
    spec: &ModelSpec,
    ns: &[usize],
    horizon: f64,
    dt: f64,
    replicas: usize,
    seed: u64,
) -> Result<GnRateResult> {
    if ns.is_empty() || ns.contains(&0) || replicas == 0 {
        return Err(Error::Domain("need positive particle counts and at least one replica".into()));
    }
    let grid = TimeGrid::uniform(horizon, dt)?;
    let points = ns
        .iter()
        .map(|&n| {
            let est = estimate_gn(spec, n, &grid, replicas, seed)?;
            Ok(GnPoint {
                n,
                replicas,
                sup_sq_mean: est.sup_sq_mean,
                sup_sq_stderr: est.sup_sq_stderr,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = points.iter().map(|p| p.n as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.sup_sq_mean).collect();
    Ok(GnRateResult {
        model: spec.id.clone(),
        seed,
        horizon: grid.t_end(),
        dt,
        fit: slope_or_none(&xs, &ys),
        points,
    })
}
