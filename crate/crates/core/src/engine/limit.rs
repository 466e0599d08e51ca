use std::ops::Range;

use super::{check_finite, check_noise, checked_rate, EventInfo, Observer, PathEnsemble, PathRecorder};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::measure::{EmpiricalMeasure, MeasureFlow};
use crate::model::ModelSpec;
use crate::noise::rng::CounterRng;
use crate::noise::NoiseView;

/// Default number of quadrature atoms for the compensator drift.
pub const DEFAULT_MARK_SAMPLES: usize = 64;

/// Quadrature for the compensator drift
/// `D(x, m) = ∫∫ Θ(y, x, m, v1, v2) f(y, m) dν(v) dm(y)` at a fixed `m`.
///
/// Measures with at most `n` atoms are integrated exactly. Larger ones are
/// replaced by `n` stratified quantiles `F^{-1}((l + U) / n)` with one
/// uniform `U` per step. Marks are integrated exactly when the model gives
/// the mark average of `Θ`, and otherwise one mark pair is drawn per atom.
pub struct Compensator {
    atoms: Vec<f64>,
    weights: Vec<f64>,
    rates: Vec<f64>,
    marks: Option<Vec<(f64, f64)>>,
}

impl Compensator {
    pub fn new(spec: &ModelSpec, m: &EmpiricalMeasure, n: usize, rng: &mut CounterRng) -> Self {
        let n = n.max(1);
        let (atoms, weights): (Vec<f64>, Vec<f64>) = if m.len() <= n {
            m.atoms().unzip()
        } else {
            let u = rng.unit_open0();
            (0..n)
                .map(|l| (m.quantile((l as f64 + u) / n as f64), 1.0 / n as f64))
                .unzip()
        };
        let rates = atoms.iter().map(|&y| spec.rate(y, m)).collect();
        let has_mean = spec.collective_mark_mean(0.0, 0.0, m).is_some();
        let marks = (!has_mean).then(|| {
            atoms
                .iter()
                .map(|_| (spec.mark_law.sample(rng), spec.mark_law.sample(rng)))
                .collect()
        });
        Self {
            atoms,
            weights,
            rates,
            marks,
        }
    }

    pub fn eval(&self, spec: &ModelSpec, x: f64, m: &EmpiricalMeasure) -> f64 {
        let mut acc = 0.0;
        for l in 0..self.atoms.len() {
            let y = self.atoms[l];
            let theta = match &self.marks {
                Some(v) => spec.collective(y, x, m, v[l].0, v[l].1),
                None => spec.collective_mark_mean(y, x, m).expect("mark mean checked at construction"),
            };
            acc += self.weights[l] * theta * self.rates[l];
        }
        acc
    }
}

/// One-off evaluation of the compensator drift at `x`.
pub fn compensator_drift(spec: &ModelSpec, x: f64, m: &EmpiricalMeasure, n: usize, rng: &mut CounterRng) -> f64 {
    if !spec.has_collective() {
        return 0.0;
    }
    Compensator::new(spec, m, n, rng).eval(spec, x, m)
}

/// Simulates `k` independent copies of the limit dynamics against the frozen
/// `flow`, copy `i` driven by stream `i`.
pub fn simulate_limit_copies(
    spec: &ModelSpec,
    flow: &MeasureFlow,
    k: usize,
    noise: &NoiseView<'_>,
    grid: &TimeGrid,
    n_mark_samples: usize,
) -> Result<PathEnsemble> {
    if !flow.grid().same_as(grid) {
        return Err(Error::GridMismatch("flow and simulation grids differ".into()));
    }
    check_noise(spec, noise, grid, k)?;
    let initial: Vec<f64> = (0..k).map(|i| noise.initial_state(i, &spec.initial_law)).collect();
    let mut rec = PathRecorder::new(grid.clone(), k);
    run_limit_copies(spec, flow.measures(), noise, initial, 0..grid.steps(), n_mark_samples, &mut rec)?;
    Ok(rec.finish())
}

/// Advances limit copies over grid steps `steps`. `frozen[j]` is the
/// measure at node `steps.start + j`.
pub fn run_limit_copies<O: Observer>(
    spec: &ModelSpec,
    frozen: &[EmpiricalMeasure],
    noise: &NoiseView<'_>,
    initial: Vec<f64>,
    steps: Range<usize>,
    n_mark_samples: usize,
    obs: &mut O,
) -> Result<Vec<f64>> {
    if frozen.len() < steps.len() {
        return Err(Error::GridMismatch(format!(
            "{} frozen measures for {} steps",
            frozen.len(),
            steps.len()
        )));
    }
    let grid = noise.grid();
    let lambda = spec.dominating_rate()?;
    let n = initial.len();
    let mut x = initial;
    let start = steps.start;
    let mut cursor: Vec<usize> = (0..n)
        .map(|i| noise.events(i).partition_point(|e| e.time <= grid.points()[start]))
        .collect();
    obs.on_node(start, grid.points()[start], &x);

    for k in steps {
        let (t0, t1) = (grid.points()[k], grid.points()[k + 1]);
        let dt = t1 - t0;
        let m = &frozen[k - start];
        obs.on_step_start(k, dt, &x, m);
        let comp = spec
            .has_collective()
            .then(|| Compensator::new(spec, m, n_mark_samples, &mut noise.compensator_rng(k)));
        for i in 0..n {
            let b = spec.drift(x[i], m);
            let s = spec.diffusion(x[i], m);
            let inc = match &comp {
                Some(c) => (b + c.eval(spec, x[i], m)) * dt + s * noise.increments(i)[k],
                None => b * dt + s * noise.increments(i)[k],
            };
            check_finite(t0, i, inc, b, s)?;

            let events = noise.events(i);
            while cursor[i] < events.len() && events[cursor[i]].time <= t1 {
                let ev = events[cursor[i]];
                cursor[i] += 1;
                let f = checked_rate(spec, x[i], m, lambda, ev.time)?;
                let accepted = ev.z <= f;
                let mut psi = 0.0;
                if accepted {
                    psi = spec.self_jump(x[i], m, ev.mark);
                    x[i] += psi;
                }
                check_finite(ev.time, i, x[i], b, s)?;
                obs.on_event(&EventInfo {
                    time: ev.time,
                    owner: i,
                    accepted,
                    psi,
                    theta: &[],
                });
            }
            x[i] += inc;
            check_finite(t1, i, x[i], b, s)?;
        }
        obs.on_node(k + 1, t1, &x);
    }
    Ok(x)
}
