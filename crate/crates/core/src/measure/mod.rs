//! Weighted empirical measures on the real line.

mod flow;
pub mod io;
mod transport;

use std::sync::OnceLock;

pub use flow::{flow_sup_w1, MeasureFlow};
pub use transport::{w1, w2};

use crate::error::{Error, Result};

/// Weights must sum to one within this tolerance after construction.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;
/// Weight sums further than this from one are rejected rather than renormalized.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-9;
/// Exponential moments above this are reported as saturated.
pub const SATURATION_LEVEL: f64 = 1e300;

/// Cached integrals `∫ g dm` for a few fixed `g`, used by mean-field
/// coefficients that would otherwise rescan the atoms for every particle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    Mean,
    Arctan,
    Sin,
    Cos,
    Tanh,
}

impl Statistic {
    const COUNT: usize = 5;

    fn index(self) -> usize {
        self as usize
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Statistic::Mean => x,
            Statistic::Arctan => x.atan(),
            Statistic::Sin => x.sin(),
            Statistic::Cos => x.cos(),
            Statistic::Tanh => x.tanh(),
        }
    }
}

/// Atoms sorted by position with positive weights summing to one.
#[derive(Debug, Clone)]
pub struct EmpiricalMeasure {
    positions: Vec<f64>,
    weights: Vec<f64>,
    equal_weights: bool,
    cache: [OnceLock<f64>; Statistic::COUNT],
}

impl PartialEq for EmpiricalMeasure {
    fn eq(&self, other: &Self) -> bool {
        self.positions == other.positions && self.weights == other.weights
    }
}

/// Result of [`EmpiricalMeasure::exp_moment`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpMoment {
    pub value: f64,
    pub saturated: bool,
}

impl EmpiricalMeasure {
    /// Equal-weight cloud `n^{-1} Σ δ_{x_k}`.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        Self::from_sample_vec(samples.to_vec())
    }

    pub fn from_sample_vec(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        if let Some(bad) = samples.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidMeasure(format!("non-finite atom {bad}")));
        }
        samples.sort_unstable_by(f64::total_cmp);
        let w = 1.0 / samples.len() as f64;
        let weights = vec![w; samples.len()];
        Ok(Self::from_parts(samples, weights, true))
    }

    /// Weighted atoms in any order. Weights are renormalized when their sum
    /// is within [`RENORMALIZE_TOLERANCE`] of one.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        let mut atoms = atoms;
        for &(x, w) in &atoms {
            if !x.is_finite() {
                return Err(Error::InvalidMeasure(format!("non-finite atom {x}")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidMeasure(format!("weight {w} must be positive")));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > RENORMALIZE_TOLERANCE {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}")));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (positions, mut weights): (Vec<f64>, Vec<f64>) = atoms.into_iter().unzip();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            weights.iter_mut().for_each(|w| *w /= total);
        }
        let first = weights[0];
        let equal = weights.iter().all(|&w| w == first);
        Ok(Self::from_parts(positions, weights, equal))
    }

    pub fn dirac(x: f64) -> Self {
        Self::from_parts(vec![x], vec![1.0], true)
    }

    fn from_parts(positions: Vec<f64>, weights: Vec<f64>, equal_weights: bool) -> Self {
        Self {
            positions,
            weights,
            equal_weights,
            cache: Default::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn has_equal_weights(&self) -> bool {
        self.equal_weights
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.positions.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `∫ g dm`, summed in ascending position order.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.atoms().map(|(x, w)| w * g(x)).sum()
    }

    pub fn statistic(&self, stat: Statistic) -> f64 {
        *self.cache[stat.index()].get_or_init(|| self.integrate(|x| stat.apply(x)))
    }

    pub fn mean(&self) -> f64 {
        self.statistic(Statistic::Mean)
    }

    /// Left-continuous inverse of the distribution function.
    pub fn quantile(&self, q: f64) -> f64 {
        if self.equal_weights {
            let n = self.len();
            let k = ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
            return self.positions[k];
        }
        let mut acc = 0.0;
        for (x, w) in self.atoms() {
            acc += w;
            if acc >= q {
                return x;
            }
        }
        *self.positions.last().expect("nonempty")
    }

    pub fn shifted(&self, h: f64) -> Self {
        let positions = self.positions.iter().map(|x| x + h).collect();
        Self::from_parts(positions, self.weights.clone(), self.equal_weights)
    }

    /// `Σ w_k e^{a|x_k|}`; values above [`SATURATION_LEVEL`] are clamped and flagged.
    pub fn exp_moment(&self, a: f64) -> ExpMoment {
        let value = self.integrate(|x| (a * x.abs()).exp());
        if !(value <= SATURATION_LEVEL) {
            ExpMoment {
                value: SATURATION_LEVEL,
                saturated: true,
            }
        } else {
            ExpMoment {
                value,
                saturated: false,
            }
        }
    }

    pub fn mean_abs(&self) -> f64 {
        self.integrate(f64::abs)
    }

    pub fn abs_moment(&self, q: f64) -> f64 {
        self.integrate(|x| x.abs().powf(q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_moment_examples() {
        assert_eq!(EmpiricalMeasure::dirac(0.0).exp_moment(3.0).value, 1.0);
        let m = EmpiricalMeasure::from_samples(&[-1.0, 1.0]).unwrap();
        assert!((m.exp_moment(1.0).value - std::f64::consts::E).abs() < 1e-15);
        // midpoint Riemann oracle of ∫_0^1 e^x dx
        let xs: Vec<f64> = (0..100).map(|k| (k as f64 + 0.5) / 100.0).collect();
        let m = EmpiricalMeasure::from_samples(&xs).unwrap();
        let exact = std::f64::consts::E - 1.0;
        assert!((m.exp_moment(1.0).value - exact).abs() < 0.01);
    }

    #[test]
    fn exp_moment_saturates_instead_of_overflowing() {
        let m = EmpiricalMeasure::from_samples(&[0.0, 800.0]).unwrap();
        let e = m.exp_moment(1.0);
        assert!(e.saturated);
        assert_eq!(e.value, SATURATION_LEVEL);
    }

    #[test]
    fn abs_moments() {
        assert_eq!(EmpiricalMeasure::dirac(0.0).mean_abs(), 0.0);
        let m = EmpiricalMeasure::from_samples(&[-2.0, 2.0]).unwrap();
        assert_eq!(m.abs_moment(1.0), 2.0);
        assert_eq!(m.mean_abs(), 2.0);
    }

    #[test]
    fn weights_are_renormalized_or_rejected() {
        let m = EmpiricalMeasure::new(vec![(1.0, 0.5 + 1e-10), (0.0, 0.5)]).unwrap();
        assert!((m.total_mass() - 1.0).abs() <= WEIGHT_TOLERANCE);
        assert_eq!(m.positions(), &[0.0, 1.0]);
        assert!(EmpiricalMeasure::new(vec![(0.0, 0.5), (1.0, 0.6)]).is_err());
        assert!(EmpiricalMeasure::new(vec![(0.0, 1.0), (1.0, 0.0)]).is_err());
        assert!(matches!(EmpiricalMeasure::from_samples(&[]), Err(Error::EmptyMeasure)));
    }

    #[test]
    fn cached_statistics_match_direct_sums() {
        let m = EmpiricalMeasure::new(vec![(0.3, 0.2), (-1.2, 0.5), (2.0, 0.3)]).unwrap();
        let direct: f64 = [(0.3f64, 0.2), (-1.2, 0.5), (2.0, 0.3)]
            .iter()
            .map(|(x, w)| w * x.atan())
            .sum();
        assert!((m.statistic(Statistic::Arctan) - direct).abs() < 1e-15);
        assert!((m.mean() - (0.06 - 0.6 + 0.6)).abs() < 1e-15);
    }

    #[test]
    fn quantile_of_weighted_cloud() {
        let m = EmpiricalMeasure::new(vec![(0.0, 0.25), (1.0, 0.5), (5.0, 0.25)]).unwrap();
        assert_eq!(m.quantile(0.2), 0.0);
        assert_eq!(m.quantile(0.5), 1.0);
        assert_eq!(m.quantile(0.9), 5.0);
        let u = EmpiricalMeasure::from_samples(&[3.0, 1.0, 2.0, 4.0]).unwrap();
        assert_eq!(u.quantile(0.25), 1.0);
        assert_eq!(u.quantile(0.26), 2.0);
        assert_eq!(u.quantile(1.0), 4.0);
    }
}
