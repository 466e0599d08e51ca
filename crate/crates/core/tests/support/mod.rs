#![allow(dead_code)]

pub mod lp;

use mfjump::measure::EmpiricalMeasure;
use mfjump::model::ModelSpec;

/// Measure with the given atoms and weights proportional to `raw`.
pub fn weighted(xs: &[f64], raw: &[f64]) -> EmpiricalMeasure {
    let total: f64 = raw.iter().sum();
    EmpiricalMeasure::new(xs.iter().zip(raw).map(|(&x, &w)| (x, w / total)).collect()).unwrap()
}

/// Model with every coefficient zero and a standard normal initial law.
pub fn frozen_model() -> ModelSpec {
    ModelSpec::builder("frozen")
        .bounds(mfjump::model::DeclaredBounds {
            drift: Some(0.0),
            diffusion: Some(0.0),
            rate: Some(0.0),
            self_jump_exp: Some(1.0),
            collective_exp: Some(1.0),
        })
        .build()
        .unwrap()
}
