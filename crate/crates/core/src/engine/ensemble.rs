use std::io::Write;

use serde::Serialize;

use super::{EventInfo, Observer};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::measure::EmpiricalMeasure;

/// A processed candidate event.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpRecord {
    pub time: f64,
    pub owner: usize,
    pub accepted: bool,
    pub psi: f64,
    /// Per-particle collective displacements (already divided by `N`).
    pub theta: Vec<f64>,
}

impl JumpRecord {
    pub fn theta_mean(&self) -> f64 {
        if self.theta.is_empty() {
            0.0
        } else {
            self.theta.iter().sum::<f64>() / self.theta.len() as f64
        }
    }
}

/// Trajectories sampled on the grid plus the event log.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    grid: TimeGrid,
    /// `states[node][particle]`.
    states: Vec<Vec<f64>>,
    jump_log: Vec<JumpRecord>,
}

#[derive(Serialize)]
struct PathRow {
    t: f64,
    particle: usize,
    state: f64,
}

#[derive(Serialize)]
struct JumpRow {
    t: f64,
    owner: usize,
    accepted: bool,
    psi: f64,
    theta_mean: f64,
}

impl PathEnsemble {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn n_particles(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn states_at(&self, node: usize) -> &[f64] {
        &self.states[node]
    }

    pub fn terminal(&self) -> &[f64] {
        self.states.last().expect("at least one node")
    }

    pub fn path(&self, particle: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[particle]).collect()
    }

    pub fn jump_log(&self) -> &[JumpRecord] {
        &self.jump_log
    }

    pub fn measure_at(&self, node: usize) -> Result<EmpiricalMeasure> {
        EmpiricalMeasure::from_samples(&self.states[node])
    }

    pub fn write_paths_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for (&t, row) in self.grid.points().iter().zip(&self.states) {
            for (particle, &state) in row.iter().enumerate() {
                w.serialize(PathRow { t, particle, state })?;
            }
        }
        w.flush().map_err(|e| Error::io("<paths csv>", e))?;
        Ok(())
    }

    pub fn write_jumps_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.jump_log {
            w.serialize(JumpRow {
                t: r.time,
                owner: r.owner,
                accepted: r.accepted,
                psi: r.psi,
                theta_mean: r.theta_mean(),
            })?;
        }
        w.flush().map_err(|e| Error::io("<jumps csv>", e))?;
        Ok(())
    }
}

/// Observer that builds a [`PathEnsemble`].
pub struct PathRecorder {
    grid: TimeGrid,
    states: Vec<Vec<f64>>,
    log: Vec<JumpRecord>,
}

impl PathRecorder {
    pub fn new(grid: TimeGrid, particles: usize) -> Self {
        let nodes = grid.len();
        Self {
            grid,
            states: vec![vec![0.0; particles]; nodes],
            log: Vec::new(),
        }
    }

    pub fn finish(mut self) -> PathEnsemble {
        self.log
            .sort_by(|a, b| a.time.total_cmp(&b.time).then(a.owner.cmp(&b.owner)));
        PathEnsemble {
            grid: self.grid,
            states: self.states,
            jump_log: self.log,
        }
    }
}

impl Observer for PathRecorder {
    fn on_event(&mut self, e: &EventInfo<'_>) {
        self.log.push(JumpRecord {
            time: e.time,
            owner: e.owner,
            accepted: e.accepted,
            psi: e.psi,
            theta: e.theta.to_vec(),
        });
    }

    fn on_node(&mut self, node: usize, _t: f64, states: &[f64]) {
        self.states[node].copy_from_slice(states);
    }
}
