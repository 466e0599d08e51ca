use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly increasing time points starting at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    points: Vec<f64>,
    uniform: bool,
}

impl TimeGrid {
    /// Uniform grid on `[0, t_end]` whose step is the closest divisor of
    /// `t_end` to `dt`.
    pub fn uniform(t_end: f64, dt: f64) -> Result<Self> {
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::InvalidGrid(format!("horizon must be positive, got {t_end}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidGrid(format!("step must be positive, got {dt}")));
        }
        let steps = (t_end / dt).round().max(1.0) as usize;
        Self::with_steps(t_end, steps)
    }

    pub fn with_steps(t_end: f64, steps: usize) -> Result<Self> {
        if steps == 0 || !(t_end > 0.0) {
            return Err(Error::InvalidGrid("need at least one step on a positive horizon".into()));
        }
        let points = (0..=steps)
            .map(|k| if k == steps { t_end } else { t_end * k as f64 / steps as f64 })
            .collect();
        Ok(Self {
            points,
            uniform: true,
        })
    }

    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid("need at least two points".into()));
        }
        if points[0] != 0.0 {
            return Err(Error::InvalidGrid(format!("grid must start at 0, got {}", points[0])));
        }
        if points.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::InvalidGrid("points must be finite and strictly increasing".into()));
        }
        Ok(Self {
            points,
            uniform: false,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn t_end(&self) -> f64 {
        *self.points.last().expect("grid is never empty")
    }

    pub fn dt(&self, step: usize) -> f64 {
        self.points[step + 1] - self.points[step]
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Index of the first node at or after `t`, clamped to the last node.
    pub fn node_at_or_after(&self, t: f64) -> usize {
        self.points
            .partition_point(|&p| p < t - 1e-12)
            .min(self.points.len() - 1)
    }

    /// Node index ranges `[start, end]` covering the grid in windows of
    /// length `window`; the last window may be shorter.
    pub fn windows(&self, window: f64) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut start = 0;
        while start < self.steps() {
            let target = self.points[start] + window;
            let mut end = self.node_at_or_after(target);
            if end <= start {
                end = start + 1;
            }
            out.push((start, end));
            start = end;
        }
        out
    }

    pub fn same_as(&self, other: &TimeGrid) -> bool {
        self.points.len() == other.points.len()
            && self
                .points
                .iter()
                .zip(&other.points)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0))
    }
}
