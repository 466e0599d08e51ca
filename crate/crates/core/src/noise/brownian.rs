//! Brownian increments on a time grid.
//!
//! On a uniform grid with `n = m * 2^L` steps (`m` odd) the path is first
//! drawn on the `m` coarse cells and then refined by Lévy midpoint bridges,
//! one keyed sequence per level. Halving the step adds a level without
//! touching the coarser ones, so grids `dt` and `dt/2` see the same path at
//! their common nodes.

use rand_distr::{Distribution, StandardNormal};

use super::rng::CounterRng;
use super::{BROWNIAN, BROWNIAN_DIRECT};
use crate::grid::TimeGrid;

pub fn increments(seed: u64, stream: u64, grid: &TimeGrid) -> Vec<f64> {
    if grid.is_uniform() {
        bridge_increments(seed, stream, grid.t_end(), grid.steps())
    } else {
        let mut rng = CounterRng::keyed(seed, &[BROWNIAN_DIRECT, stream]);
        (0..grid.steps())
            .map(|k| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * grid.dt(k).sqrt()
            })
            .collect()
    }
}

fn bridge_increments(seed: u64, stream: u64, t_end: f64, n: usize) -> Vec<f64> {
    let levels = n.trailing_zeros();
    let coarse = n >> levels;
    let stride = 1usize << levels;
    let mut w = vec![0.0; n + 1];

    let cell = t_end / coarse as f64;
    let mut rng = CounterRng::keyed(seed, &[BROWNIAN, stream, 0]);
    for k in 0..coarse {
        let z: f64 = StandardNormal.sample(&mut rng);
        w[(k + 1) * stride] = w[k * stride] + cell.sqrt() * z;
    }

    for level in 1..=levels {
        let span = stride >> (level - 1);
        let half = span / 2;
        let sd = (span as f64 * t_end / n as f64 / 4.0).sqrt();
        let mut rng = CounterRng::keyed(seed, &[BROWNIAN, stream, level as u64]);
        for left in (0..n).step_by(span) {
            let z: f64 = StandardNormal.sample(&mut rng);
            w[left + half] = 0.5 * (w[left] + w[left + span]) + sd * z;
        }
    }

    w.windows(2).map(|p| p[1] - p[0]).collect()
}
