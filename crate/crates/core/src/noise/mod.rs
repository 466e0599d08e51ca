//! Random drivers shared by the particle system and the limit copies.

pub mod brownian;
pub mod rng;

use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::model::ScalarLaw;
use rng::CounterRng;

pub(crate) const INITIAL: u64 = 1;
pub(crate) const EVENTS: u64 = 2;
pub(crate) const MARKS: u64 = 3;
pub(crate) const BROWNIAN: u64 = 4;
pub(crate) const BROWNIAN_DIRECT: u64 = 5;
pub(crate) const COMPENSATOR: u64 = 6;
const REPLICA: u64 = 7;
const INDEPENDENT_INITIAL: u64 = 8;
/// Plain i.i.d. draws from a law, outside any particle system.
pub(crate) const SAMPLING: u64 = 9;

/// Seed for replica `r` of an experiment seeded with `seed`.
pub fn replica_seed(seed: u64, r: usize) -> u64 {
    rng::derive_key(seed, &[REPLICA, r as u64])
}

/// A candidate jump of the dominating Poisson process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    /// Thinning level in `(0, Λ]`.
    pub z: f64,
    /// Mark coordinate of the event owner.
    pub mark: f64,
}

/// Brownian increments and candidate Poisson events for a set of streams.
///
/// Stream `i` is a function of `(seed, i)` and the grid only, so a bundle
/// with more streams extends a smaller one.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBundle {
    seed: u64,
    grid: TimeGrid,
    lambda: f64,
    mark_law: ScalarLaw,
    brownian: Vec<Vec<f64>>,
    events: Vec<Vec<Event>>,
}

pub fn build_bundle(
    seed: u64,
    n_streams: usize,
    grid: &TimeGrid,
    lambda: f64,
    mark_law: ScalarLaw,
) -> Result<NoiseBundle> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("dominating intensity must be positive, got {lambda}")));
    }
    mark_law.validate()?;
    let t_end = grid.t_end();
    let brownian = (0..n_streams)
        .map(|i| brownian::increments(seed, i as u64, grid))
        .collect();
    let events = (0..n_streams)
        .map(|i| event_stream(seed, i as u64, t_end, lambda, &mark_law))
        .collect();
    Ok(NoiseBundle {
        seed,
        grid: grid.clone(),
        lambda,
        mark_law,
        brownian,
        events,
    })
}

fn event_stream(seed: u64, stream: u64, t_end: f64, lambda: f64, mark_law: &ScalarLaw) -> Vec<Event> {
    let mut rng = CounterRng::keyed(seed, &[EVENTS, stream]);
    let mut out = Vec::new();
    let mut t = 0.0;
    loop {
        let gap: f64 = Exp1.sample(&mut rng);
        if gap <= 0.0 {
            continue;
        }
        t += gap / lambda;
        if t > t_end {
            return out;
        }
        let z = lambda * rng.unit_open0();
        let mark = mark_law.sample(&mut rng);
        out.push(Event { time: t, z, mark });
    }
}

impl NoiseBundle {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mark_law(&self) -> &ScalarLaw {
        &self.mark_law
    }

    pub fn n_streams(&self) -> usize {
        self.brownian.len()
    }

    pub fn increments(&self, stream: usize) -> &[f64] {
        &self.brownian[stream]
    }

    pub fn events(&self, stream: usize) -> &[Event] {
        &self.events[stream]
    }

    /// Mark coordinate seen by `target` for event `ordinal` of `owner`. The
    /// owner sees its own event mark.
    pub fn collective_mark(&self, owner: usize, ordinal: usize, target: usize) -> f64 {
        if owner == target {
            return self.events[owner][ordinal].mark;
        }
        let mut rng = CounterRng::keyed(self.seed, &[MARKS, owner as u64, ordinal as u64, target as u64]);
        self.mark_law.sample(&mut rng)
    }

    pub fn initial_state(&self, stream: usize, law: &ScalarLaw) -> f64 {
        let mut rng = CounterRng::keyed(self.seed, &[INITIAL, stream as u64]);
        law.sample(&mut rng)
    }

    /// A draw independent of [`Self::initial_state`], for couplings that do
    /// not share initial conditions.
    pub fn independent_initial_state(&self, stream: usize, law: &ScalarLaw) -> f64 {
        let mut rng = CounterRng::keyed(self.seed, &[INDEPENDENT_INITIAL, stream as u64]);
        law.sample(&mut rng)
    }

    /// Generator for the compensator estimate of grid step `step`.
    pub fn compensator_rng(&self, step: usize) -> CounterRng {
        CounterRng::keyed(self.seed, &[COMPENSATOR, step as u64])
    }

    pub fn view(&self) -> NoiseView<'_> {
        NoiseView {
            bundle: self,
            order: None,
        }
    }

    /// View whose stream `i` is bundle stream `order[i]`.
    pub fn permuted(&self, order: Vec<usize>) -> Result<NoiseView<'_>> {
        let mut seen = vec![false; order.len()];
        for &k in &order {
            if k >= self.n_streams() || std::mem::replace(&mut seen[k], true) {
                return Err(Error::Domain("stream order is not a permutation".into()));
            }
        }
        Ok(NoiseView {
            bundle: self,
            order: Some(order),
        })
    }
}

/// Read-only view used to drive the limit copies off the same streams as
/// the particle system.
pub fn split_for_limit(bundle: &NoiseBundle) -> NoiseView<'_> {
    bundle.view()
}

/// Read-only access to a bundle, optionally with relabeled streams.
#[derive(Debug, Clone)]
pub struct NoiseView<'a> {
    bundle: &'a NoiseBundle,
    order: Option<Vec<usize>>,
}

impl<'a> NoiseView<'a> {
    pub fn bundle(&self) -> &'a NoiseBundle {
        self.bundle
    }

    #[inline]
    fn stream(&self, i: usize) -> usize {
        match &self.order {
            Some(o) => o[i],
            None => i,
        }
    }

    pub fn n_streams(&self) -> usize {
        match &self.order {
            Some(o) => o.len(),
            None => self.bundle.n_streams(),
        }
    }

    pub fn grid(&self) -> &'a TimeGrid {
        &self.bundle.grid
    }

    pub fn lambda(&self) -> f64 {
        self.bundle.lambda
    }

    pub fn increments(&self, i: usize) -> &'a [f64] {
        self.bundle.increments(self.stream(i))
    }

    pub fn events(&self, i: usize) -> &'a [Event] {
        self.bundle.events(self.stream(i))
    }

    pub fn collective_mark(&self, owner: usize, ordinal: usize, target: usize) -> f64 {
        self.bundle
            .collective_mark(self.stream(owner), ordinal, self.stream(target))
    }

    pub fn initial_state(&self, i: usize, law: &ScalarLaw) -> f64 {
        self.bundle.initial_state(self.stream(i), law)
    }

    pub fn compensator_rng(&self, step: usize) -> CounterRng {
        self.bundle.compensator_rng(step)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MARK: ScalarLaw = ScalarLaw::Uniform { low: -1.0, high: 1.0 };

    #[test]
    fn rebuilding_is_deterministic() {
        let g = TimeGrid::uniform(1.0, 0.01).unwrap();
        let a = build_bundle(5, 4, &g, 2.0, MARK).unwrap();
        let b = build_bundle(5, 4, &g, 2.0, MARK).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn streams_are_a_prefix_family() {
        let g = TimeGrid::uniform(1.0, 0.01).unwrap();
        let a = build_bundle(5, 2, &g, 2.0, MARK).unwrap();
        let b = build_bundle(5, 3, &g, 2.0, MARK).unwrap();
        for i in 0..2 {
            assert_eq!(a.increments(i), b.increments(i));
            assert_eq!(a.events(i), b.events(i));
        }
    }

    #[test]
    fn event_count_matches_intensity() {
        let g = TimeGrid::uniform(1e4, 1.0).unwrap();
        let b = build_bundle(17, 1, &g, 1.0, MARK).unwrap();
        let n = b.events(0).len() as f64;
        assert!((n - 1e4).abs() < 300.0, "{n}");
        let ev = b.events(0);
        assert!(ev.windows(2).all(|w| w[1].time > w[0].time));
        assert!(ev.iter().all(|e| e.z > 0.0 && e.z <= 1.0 && e.time <= 1e4));
    }

    #[test]
    fn rejects_nonpositive_intensity() {
        let g = TimeGrid::uniform(1.0, 0.1).unwrap();
        assert!(build_bundle(1, 1, &g, 0.0, MARK).is_err());
    }

    #[test]
    fn views_read_the_bundle() {
        let g = TimeGrid::uniform(1.0, 0.1).unwrap();
        let b = build_bundle(1, 3, &g, 1.0, MARK).unwrap();
        let v1 = split_for_limit(&b);
        let v2 = split_for_limit(&b);
        for i in 0..3 {
            assert_eq!(v1.increments(i), b.increments(i));
            assert_eq!(v1.events(i), v2.events(i));
        }
        let p = b.permuted(vec![2, 0, 1]).unwrap();
        assert_eq!(p.increments(0), b.increments(2));
        assert_eq!(p.collective_mark(0, 0, 1), b.collective_mark(2, 0, 0));
        assert!(b.permuted(vec![0, 0, 1]).is_err());
    }

    #[test]
    fn owner_sees_its_event_mark() {
        let g = TimeGrid::uniform(50.0, 0.1).unwrap();
        let b = build_bundle(3, 2, &g, 1.0, MARK).unwrap();
        let e = b.events(1)[0];
        assert_eq!(b.collective_mark(1, 0, 1), e.mark);
        assert_eq!(b.collective_mark(1, 0, 0), b.collective_mark(1, 0, 0));
    }
}
