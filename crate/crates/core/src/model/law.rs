use rand::Rng;
use rand_distr::{Cauchy, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Cauchy as CauchyCdf, ContinuousCDF, Normal as NormalCdf};

use crate::error::{Error, Result};

/// A probability law on the real line, used for marks, initial states and
/// sampling experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScalarLaw {
    Dirac { value: f64 },
    Uniform { low: f64, high: f64 },
    Normal { mean: f64, sd: f64 },
    Cauchy { location: f64, scale: f64 },
}

impl ScalarLaw {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ScalarLaw::Dirac { value } => value.is_finite(),
            ScalarLaw::Uniform { low, high } => low.is_finite() && high.is_finite() && high > low,
            ScalarLaw::Normal { mean, sd } => mean.is_finite() && sd.is_finite() && sd > 0.0,
            ScalarLaw::Cauchy { location, scale } => location.is_finite() && scale > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid law parameters: {self:?}")))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ScalarLaw::Dirac { value } => value,
            ScalarLaw::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            ScalarLaw::Normal { mean, sd } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sd * z
            }
            ScalarLaw::Cauchy { location, scale } => Cauchy::new(location, scale)
                .expect("validated parameters")
                .sample(rng),
        }
    }

    /// Quantile function on (0, 1).
    pub fn quantile(&self, q: f64) -> f64 {
        match *self {
            ScalarLaw::Dirac { value } => value,
            ScalarLaw::Uniform { low, high } => low + (high - low) * q,
            ScalarLaw::Normal { mean, sd } => {
                NormalCdf::new(mean, sd).expect("validated parameters").inverse_cdf(q)
            }
            ScalarLaw::Cauchy { location, scale } => CauchyCdf::new(location, scale)
                .expect("validated parameters")
                .inverse_cdf(q),
        }
    }

    /// `None` when the mean does not exist.
    pub fn mean(&self) -> Option<f64> {
        match *self {
            ScalarLaw::Dirac { value } => Some(value),
            ScalarLaw::Uniform { low, high } => Some(0.5 * (low + high)),
            ScalarLaw::Normal { mean, .. } => Some(mean),
            ScalarLaw::Cauchy { .. } => None,
        }
    }

    /// `n` midpoint quantile nodes `F^{-1}((k + 1/2) / n)`; an equal-weight
    /// quadrature rule for integrals against the law.
    pub fn quantile_nodes(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| self.quantile((k as f64 + 0.5) / n as f64))
            .collect()
    }
}
