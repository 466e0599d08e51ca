use std::ops::Range;

use super::{check_finite, check_noise, checked_rate, gather_events, start_cursor, EventInfo, Observer, PathEnsemble, PathRecorder};
use crate::error::Result;
use crate::grid::TimeGrid;
use crate::measure::EmpiricalMeasure;
use crate::model::ModelSpec;
use crate::noise::NoiseView;

/// Simulates `n` interacting particles with initial states drawn from the
/// model's initial law on the bundle's streams.
pub fn simulate_particle_system(
    spec: &ModelSpec,
    n: usize,
    noise: &NoiseView<'_>,
    grid: &TimeGrid,
) -> Result<PathEnsemble> {
    check_noise(spec, noise, grid, n)?;
    let initial: Vec<f64> = (0..n).map(|i| noise.initial_state(i, &spec.initial_law)).collect();
    let mut rec = PathRecorder::new(grid.clone(), n);
    run_particle_system(spec, noise, initial, 0..grid.steps(), &mut rec)?;
    Ok(rec.finish())
}

/// Advances the particle system over grid steps `steps` from `initial`
/// and returns the final states. Particle `i` uses stream `i` of `noise`.
pub fn run_particle_system<O: Observer>(
    spec: &ModelSpec,
    noise: &NoiseView<'_>,
    initial: Vec<f64>,
    steps: Range<usize>,
    obs: &mut O,
) -> Result<Vec<f64>> {
    let n = initial.len();
    let grid = noise.grid();
    let lambda = spec.dominating_rate()?;
    let inv_n = 1.0 / n as f64;
    let mut x = initial;
    let mut cursor = start_cursor(noise, n, grid.points()[steps.start]);
    let mut events = Vec::new();
    let mut inc = vec![0.0; n];
    let mut coef = vec![(0.0, 0.0); n];
    let mut theta = vec![0.0; n];
    let mut left = vec![0.0; n];
    obs.on_node(steps.start, grid.points()[steps.start], &x);

    for k in steps {
        let (t0, t1) = (grid.points()[k], grid.points()[k + 1]);
        let dt = t1 - t0;
        let mut m = EmpiricalMeasure::from_samples(&x)?;
        obs.on_step_start(k, dt, &x, &m);
        for i in 0..n {
            let b = spec.drift(x[i], &m);
            let s = spec.diffusion(x[i], &m);
            inc[i] = b * dt + s * noise.increments(i)[k];
            coef[i] = (b, s);
            check_finite(t0, i, inc[i], b, s)?;
        }

        gather_events(noise, &mut cursor, t1, &mut events);
        for &(time, j, ordinal) in &events {
            let ev = noise.events(j)[ordinal];
            let f = checked_rate(spec, x[j], &m, lambda, time)?;
            if ev.z > f {
                obs.on_event(&EventInfo {
                    time,
                    owner: j,
                    accepted: false,
                    psi: 0.0,
                    theta: &[],
                });
                continue;
            }
            left.copy_from_slice(&x);
            let psi = spec.self_jump(left[j], &m, ev.mark);
            if spec.has_collective() {
                for i in 0..n {
                    let vi = noise.collective_mark(j, ordinal, i);
                    theta[i] = inv_n * spec.collective(left[j], left[i], &m, ev.mark, vi);
                }
            } else {
                theta.iter_mut().for_each(|v| *v = 0.0);
            }
            x[j] += psi;
            if spec.has_collective() {
                for i in 0..n {
                    x[i] += theta[i];
                }
            }
            for i in 0..n {
                check_finite(time, i, x[i], coef[i].0, coef[i].1)?;
            }
            obs.on_event(&EventInfo {
                time,
                owner: j,
                accepted: true,
                psi,
                theta: &theta,
            });
            m = EmpiricalMeasure::from_samples(&x)?;
        }

        for i in 0..n {
            x[i] += inc[i];
            check_finite(t1, i, x[i], coef[i].0, coef[i].1)?;
        }
        obs.on_node(k + 1, t1, &x);
    }
    Ok(x)
}
