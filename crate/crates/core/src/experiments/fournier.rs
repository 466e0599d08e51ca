use rayon::prelude::*;
use serde::Serialize;

use super::slope_or_none;
use crate::analysis::{mean_stderr, PowerLawFit};
use crate::error::{Error, Result};
use crate::measure::{w2, EmpiricalMeasure};
use crate::model::ScalarLaw;
use crate::noise::rng::CounterRng;
use crate::noise::SAMPLING;

/// Size of the reference sample standing in for the law itself.
pub const REFERENCE_SIZE: usize = 1_000_000;

const REFERENCE_TAG: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FournierPoint {
    pub n: usize,
    /// `W_2(μ_N, μ_ref)` per replica.
    pub distances: Vec<f64>,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FournierResult {
    pub law: ScalarLaw,
    pub seed: u64,
    pub reference_size: usize,
    pub points: Vec<FournierPoint>,
    /// `None` when every distance is zero, e.g. for a point mass.
    pub fit: Option<PowerLawFit>,
    /// Set when the fifth absolute moment looks infinite.
    pub warning: Option<String>,
}

fn draw(law: &ScalarLaw, n: usize, tags: &[u64], seed: u64) -> Vec<f64> {
    let mut rng = CounterRng::keyed(seed, tags);
    (0..n).map(|_| law.sample(&mut rng)).collect()
}

/// Expected `W_2` between `N`-sample empirical measures of `law` and a
/// reference sample of [`REFERENCE_SIZE`] points.
pub fn run_fournier_check(law: &ScalarLaw, ns: &[usize], replicas: usize, seed: u64) -> Result<FournierResult> {
    run_with_reference(law, ns, replicas, seed, REFERENCE_SIZE)
}

pub(crate) fn run_with_reference(
    law: &ScalarLaw,
    ns: &[usize],
    replicas: usize,
    seed: u64,
    reference_size: usize,
) -> Result<FournierResult> {
    law.validate()?;
    if ns.is_empty() || ns.contains(&0) || replicas == 0 || reference_size < 2 {
        return Err(Error::Domain("need positive sample sizes and at least one replica".into()));
    }
    let reference = draw(law, reference_size, &[SAMPLING, REFERENCE_TAG], seed);
    let warning = heavy_tail_warning(&reference)?;
    let reference = EmpiricalMeasure::from_sample_vec(reference)?;

    let mut points = Vec::with_capacity(ns.len());
    for &n in ns {
        let distances = (0..replicas)
            .into_par_iter()
            .map(|r| {
                let sample = draw(law, n, &[SAMPLING, n as u64, r as u64], seed);
                Ok(w2(&EmpiricalMeasure::from_sample_vec(sample)?, &reference))
            })
            .collect::<Result<Vec<_>>>()?;
        let (mean, stderr) = mean_stderr(&distances);
        points.push(FournierPoint {
            n,
            distances,
            mean,
            stderr,
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.n as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean).collect();
    Ok(FournierResult {
        law: *law,
        seed,
        reference_size,
        fit: slope_or_none(&xs, &ys),
        points,
        warning,
    })
}

/// Compares `E|X|^5` estimated on the two halves of the reference sample.
/// For a law with a finite fifth moment they agree; for heavy tails one
/// half is usually dominated by a few huge draws.
fn heavy_tail_warning(sample: &[f64]) -> Result<Option<String>> {
    let half = sample.len() / 2;
    let a = EmpiricalMeasure::from_samples(&sample[..half])?.abs_moment(5.0);
    let b = EmpiricalMeasure::from_samples(&sample[half..])?.abs_moment(5.0);
    let (lo, hi) = (a.min(b), a.max(b));
    if !hi.is_finite() || hi > 2.0 * lo && hi > 1e-12 {
        return Ok(Some(format!(
            "fifth absolute moment unstable across halves ({a:.3e} vs {b:.3e}); the law may be heavy-tailed and the N^(-1/2) rate need not hold"
        )));
    }
    Ok(None)
}
