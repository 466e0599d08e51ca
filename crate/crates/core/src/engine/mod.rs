//! Time stepping of the particle system and of limit copies driven by a
//! frozen measure flow.
//!
//! Within a grid step the Euler increment `b Δt + σ ΔW` is evaluated at the
//! step start. Candidate events falling in the step are then processed in
//! time order at left limits, and the Euler increment is added last.

mod ensemble;
mod gn;
mod limit;
mod particle;

pub use ensemble::{JumpRecord, PathEnsemble, PathRecorder};
pub use gn::{estimate_gn, GnEstimate, GnObserver};
pub use limit::{compensator_drift, run_limit_copies, simulate_limit_copies, Compensator, DEFAULT_MARK_SAMPLES};
pub use particle::{run_particle_system, simulate_particle_system};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::measure::EmpiricalMeasure;
use crate::model::ModelSpec;
use crate::noise::NoiseView;

/// One processed candidate event.
#[derive(Debug, Clone, Copy)]
pub struct EventInfo<'a> {
    pub time: f64,
    pub owner: usize,
    pub accepted: bool,
    pub psi: f64,
    /// Displacement of every particle, already divided by `N`; empty for
    /// limit copies and rejected events.
    pub theta: &'a [f64],
}

/// Hooks called by the engines. All methods default to no-ops.
pub trait Observer {
    /// Before the step from node `step` to `step + 1`.
    fn on_step_start(&mut self, _step: usize, _dt: f64, _states: &[f64], _m: &EmpiricalMeasure) {}
    fn on_event(&mut self, _event: &EventInfo<'_>) {}
    /// After the state at `node` is final (also called for the start node).
    fn on_node(&mut self, _node: usize, _t: f64, _states: &[f64]) {}
}

/// Observer that records nothing.
pub struct NoObserver;

impl Observer for NoObserver {}

pub(crate) fn check_noise(spec: &ModelSpec, noise: &NoiseView<'_>, grid: &TimeGrid, streams: usize) -> Result<()> {
    if !noise.grid().same_as(grid) {
        return Err(Error::GridMismatch("noise bundle was built on a different grid".into()));
    }
    if noise.n_streams() < streams {
        return Err(Error::Domain(format!(
            "bundle has {} streams, need {streams}",
            noise.n_streams()
        )));
    }
    let lambda = spec.dominating_rate()?;
    if noise.lambda() < lambda {
        return Err(Error::Domain(format!(
            "bundle intensity {} is below the rate bound {lambda}",
            noise.lambda()
        )));
    }
    Ok(())
}

/// Candidate events with times in `(t_k, t_{k+1}]`, merged across streams
/// in time order. `cursor[i]` is the next unread event of stream `i`.
pub(crate) fn gather_events(
    noise: &NoiseView<'_>,
    cursor: &mut [usize],
    t1: f64,
    out: &mut Vec<(f64, usize, usize)>,
) {
    out.clear();
    for (i, next) in cursor.iter_mut().enumerate() {
        let events = noise.events(i);
        while *next < events.len() && events[*next].time <= t1 {
            out.push((events[*next].time, i, *next));
            *next += 1;
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
}

pub(crate) fn start_cursor(noise: &NoiseView<'_>, streams: usize, t0: f64) -> Vec<usize> {
    (0..streams)
        .map(|i| noise.events(i).partition_point(|e| e.time <= t0))
        .collect()
}

#[inline]
pub(crate) fn checked_rate(spec: &ModelSpec, x: f64, m: &EmpiricalMeasure, lambda: f64, time: f64) -> Result<f64> {
    let f = spec.rate(x, m);
    if f > lambda * (1.0 + 1e-12) {
        return Err(Error::RateAboveBound { time, rate: f, bound: lambda });
    }
    Ok(f)
}

#[inline]
pub(crate) fn check_finite(time: f64, particle: usize, state: f64, drift: f64, diffusion: f64) -> Result<()> {
    if state.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite {
            time,
            particle,
            state,
            drift,
            diffusion,
        })
    }
}
