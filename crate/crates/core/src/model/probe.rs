//! Sampling-based checks of the Lipschitz and boundedness conditions.
//!
//! A pass certifies the inequalities only at the probed points. Mark
//! integrals use midpoint quantile quadrature of the mark law and the
//! integral over the thinning level `z` is computed exactly.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ModelSpec;
use crate::error::{Error, Result};
use crate::measure::{w1, EmpiricalMeasure};
use crate::noise::rng::CounterRng;

const PROBE_DOMAIN: u64 = 0x7072_6f62;
const LIPSCHITZ_MARK_NODES: usize = 64;
const COLLECTIVE_MARK_NODES: usize = 16;
const EXP_MARK_NODES: usize = 2048;
const EXP_PAIR_NODES: usize = 64;

pub const SCOPE_NOTE: &str = "sampling-based: inequalities are certified only at the probed points";

/// Draws states and atomic measures from a bounded box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSampler {
    /// States are drawn uniformly from `[-radius, radius]`.
    pub radius: f64,
    /// Atoms per probe measure.
    pub atoms: usize,
    /// Atoms are drawn uniformly from `[-atom_radius, atom_radius]`.
    pub atom_radius: f64,
    /// Share of pairs built as small perturbations of one point.
    pub local_fraction: f64,
    pub local_scale: f64,
    pub seed: u64,
}

impl Default for ProbeSampler {
    fn default() -> Self {
        Self {
            radius: 5.0,
            atoms: 8,
            atom_radius: 3.0,
            local_fraction: 0.5,
            local_scale: 0.1,
            seed: 0,
        }
    }
}

impl ProbeSampler {
    fn rng(&self, kind: u64, k: usize) -> CounterRng {
        CounterRng::keyed(self.seed, &[PROBE_DOMAIN, kind, k as u64])
    }

    fn state<R: Rng>(&self, rng: &mut R) -> f64 {
        rng.random_range(-self.radius..=self.radius)
    }

    fn measure<R: Rng>(&self, rng: &mut R) -> EmpiricalMeasure {
        let atoms: Vec<f64> = (0..self.atoms.max(1))
            .map(|_| rng.random_range(-self.atom_radius..=self.atom_radius))
            .collect();
        EmpiricalMeasure::from_sample_vec(atoms).expect("finite atoms")
    }

    pub fn point(&self, k: usize) -> (f64, EmpiricalMeasure) {
        let mut rng = self.rng(0, k);
        (self.state(&mut rng), self.measure(&mut rng))
    }

    /// Pair number `k`: either two independent points or a point and a
    /// perturbation of it.
    pub fn pair(&self, k: usize) -> [(f64, EmpiricalMeasure); 2] {
        let mut rng = self.rng(1, k);
        let (x1, m1) = (self.state(&mut rng), self.measure(&mut rng));
        if rng.random::<f64>() < self.local_fraction {
            let h = self.local_scale;
            let x2 = x1 + h * rng.random_range(-1.0..=1.0);
            let m2 = if rng.random::<bool>() {
                m1.clone()
            } else {
                let atoms = m1
                    .positions()
                    .iter()
                    .map(|y| y + h * rng.random_range(-1.0..=1.0))
                    .collect();
                EmpiricalMeasure::from_sample_vec(atoms).expect("finite atoms")
            };
            [(x1, m1), (x2, m2)]
        } else {
            [(x1, m1), (self.state(&mut rng), self.measure(&mut rng))]
        }
    }

    /// Extra state per pair member for the two-point collective kernel.
    fn partner_states(&self, k: usize, x: [f64; 2]) -> [f64; 2] {
        let mut rng = self.rng(2, k);
        let t1 = self.state(&mut rng);
        let t2 = if (x[0] - x[1]).abs() <= self.local_scale {
            t1 + self.local_scale * rng.random_range(-1.0..=1.0)
        } else {
            self.state(&mut rng)
        };
        [t1, t2]
    }
}

/// Point where an inequality was checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub states: Vec<f64>,
    /// Atom positions of the probe measures; weights are equal.
    pub measures: Vec<Vec<f64>>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeCheck {
    pub name: String,
    pub points: usize,
    /// Largest observed `lhs / rhs`; infinite when `rhs = 0 < lhs`.
    pub max_ratio: f64,
    pub passed: bool,
    /// Worst point found.
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ProbeCheck {
    fn skipped(name: &str, note: &str) -> Self {
        Self {
            name: name.to_string(),
            points: 0,
            max_ratio: 0.0,
            passed: true,
            witness: None,
            note: Some(note.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub model: String,
    pub scope: String,
    pub checks: Vec<ProbeCheck>,
    pub passed: bool,
}

impl ProbeReport {
    fn new(spec: &ModelSpec, checks: Vec<ProbeCheck>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self {
            model: spec.id.clone(),
            scope: SCOPE_NOTE.to_string(),
            checks,
            passed,
        }
    }

    pub fn max_ratio(&self) -> f64 {
        self.checks.iter().map(|c| c.max_ratio).fold(0.0, f64::max)
    }

    pub fn check(&self, name: &str) -> Option<&ProbeCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn merge(mut self, other: ProbeReport) -> Self {
        self.checks.extend(other.checks);
        self.passed = self.checks.iter().all(|c| c.passed);
        self
    }
}

/// Running maximum of `lhs / rhs`.
struct RatioTracker {
    name: &'static str,
    points: usize,
    max_ratio: f64,
    witness: Option<Witness>,
}

impl RatioTracker {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            points: 0,
            max_ratio: 0.0,
            witness: None,
        }
    }

    fn observe(&mut self, lhs: f64, rhs: f64, states: &[f64], measures: &[&EmpiricalMeasure]) {
        self.points += 1;
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        let ratio = if ratio.is_nan() { f64::INFINITY } else { ratio };
        if ratio > self.max_ratio || self.witness.is_none() {
            self.max_ratio = self.max_ratio.max(ratio);
            self.witness = Some(Witness {
                states: states.to_vec(),
                measures: measures.iter().map(|m| m.positions().to_vec()).collect(),
                lhs,
                rhs,
            });
        }
    }

    fn finish(self) -> ProbeCheck {
        ProbeCheck {
            name: self.name.to_string(),
            points: self.points,
            max_ratio: self.max_ratio,
            passed: self.max_ratio <= 1.0,
            witness: self.witness,
            note: None,
        }
    }
}

/// `∫_0^∞ |g_1 1{z ≤ f_1} - g_2 1{z ≤ f_2}| dz`.
#[inline]
fn thinned_l1(f1: f64, g1: f64, f2: f64, g2: f64) -> f64 {
    let (f1, f2) = (f1.max(0.0), f2.max(0.0));
    if f1 <= f2 {
        f1 * (g1 - g2).abs() + (f2 - f1) * g2.abs()
    } else {
        f2 * (g1 - g2).abs() + (f1 - f2) * g1.abs()
    }
}

fn growth(spec: &ModelSpec, states: &[f64], m1: &EmpiricalMeasure, m2: &EmpiricalMeasure) -> f64 {
    let a = spec.exp_exponent;
    1.0 + states.iter().map(|x| x.abs()).sum::<f64>() + m1.exp_moment(a).value + m2.exp_moment(a).value
}

/// Both sides of the local Lipschitz inequality for drift and thinned jumps.
pub fn local_lipschitz_sides(
    spec: &ModelSpec,
    (x1, m1): (f64, &EmpiricalMeasure),
    (x2, m2): (f64, &EmpiricalMeasure),
) -> (f64, f64) {
    let nodes = spec.mark_law.quantile_nodes(LIPSCHITZ_MARK_NODES);
    let (f1, f2) = (spec.rate(x1, m1), spec.rate(x2, m2));
    let jump = nodes
        .iter()
        .map(|&u| thinned_l1(f1, spec.self_jump(x1, m1, u), f2, spec.self_jump(x2, m2, u)))
        .sum::<f64>()
        / nodes.len() as f64;
    let lhs = (spec.drift(x1, m1) - spec.drift(x2, m2)).abs() + jump;
    let rhs = spec.lipschitz * growth(spec, &[x1, x2], m1, m2) * ((x1 - x2).abs() + w1(m1, m2));
    (lhs, rhs)
}

/// Drift and self-jump condition, global Lipschitz condition on the
/// diffusion, and the two-point condition on the collective kernel when
/// one is declared.
pub fn probe_local_lipschitz(spec: &ModelSpec, sampler: &ProbeSampler, n_pairs: usize) -> Result<ProbeReport> {
    if n_pairs == 0 {
        return Err(Error::Domain("need at least one probe pair".into()));
    }
    let mut item = RatioTracker::new("local-lipschitz");
    let mut sigma = RatioTracker::new("diffusion-lipschitz");
    let mut theta = RatioTracker::new("collective-lipschitz");
    let pair_nodes = spec.mark_law.quantile_nodes(COLLECTIVE_MARK_NODES);
    for k in 0..n_pairs {
        let [(x1, m1), (x2, m2)] = sampler.pair(k);
        let (lhs, rhs) = local_lipschitz_sides(spec, (x1, &m1), (x2, &m2));
        item.observe(lhs, rhs, &[x1, x2], &[&m1, &m2]);

        let dist = (x1 - x2).abs() + w1(&m1, &m2);
        let ds = (spec.diffusion(x1, &m1) - spec.diffusion(x2, &m2)).abs();
        sigma.observe(ds, spec.lipschitz * dist, &[x1, x2], &[&m1, &m2]);

        if spec.has_collective() {
            let [t1, t2] = sampler.partner_states(k, [x1, x2]);
            let (f1, f2) = (spec.rate(x1, &m1), spec.rate(x2, &m2));
            let mut acc = 0.0;
            for &v1 in &pair_nodes {
                for &v2 in &pair_nodes {
                    let g1 = spec.collective(x1, t1, &m1, v1, v2);
                    let g2 = spec.collective(x2, t2, &m2, v1, v2);
                    acc += thinned_l1(f1, g1, f2, g2);
                }
            }
            let lhs = acc / (pair_nodes.len() * pair_nodes.len()) as f64;
            let rhs = spec.lipschitz
                * growth(spec, &[x1, t1, x2, t2], &m1, &m2)
                * ((x1 - x2).abs() + (t1 - t2).abs() + w1(&m1, &m2));
            theta.observe(lhs, rhs, &[x1, t1, x2, t2], &[&m1, &m2]);
        }
    }
    let mut checks = vec![item.finish(), sigma.finish()];
    if spec.has_collective() {
        checks.push(theta.finish());
    }
    Ok(ProbeReport::new(spec, checks))
}

/// Declared sup-norms, nonnegativity of the rate and the exponential mark
/// integrals.
pub fn probe_boundedness(spec: &ModelSpec, sampler: &ProbeSampler, n_points: usize) -> Result<ProbeReport> {
    if n_points == 0 {
        return Err(Error::Domain("need at least one probe point".into()));
    }
    let a = spec.exp_exponent;
    let b = spec.bounds;
    let mut drift = RatioTracker::new("drift-bound");
    let mut diffusion = RatioTracker::new("diffusion-bound");
    let mut rate = RatioTracker::new("rate-bound");
    let mut nonneg = RatioTracker::new("rate-nonnegative");
    let mut phi = RatioTracker::new("self-jump-exp-bound");
    let mut theta = RatioTracker::new("collective-exp-bound");
    let marks = spec.mark_law.quantile_nodes(EXP_MARK_NODES);
    let pair_nodes = spec.mark_law.quantile_nodes(EXP_PAIR_NODES);
    for k in 0..n_points {
        let (x, m) = sampler.point(k);
        let pt = [x];
        if let Some(bd) = b.drift {
            drift.observe(spec.drift(x, &m).abs(), bd, &pt, &[&m]);
        }
        if let Some(bs) = b.diffusion {
            diffusion.observe(spec.diffusion(x, &m).abs(), bs, &pt, &[&m]);
        }
        let f = spec.rate(x, &m);
        // a negative rate is reported as an infinite ratio
        nonneg.observe((-f).max(0.0), 0.0, &pt, &[&m]);
        if let Some(bf) = b.rate {
            rate.observe(f.abs(), bf, &pt, &[&m]);
        }
        if let Some(be) = b.self_jump_exp {
            let v = marks
                .iter()
                .map(|&u| (a * spec.self_jump(x, &m, u).abs()).exp())
                .sum::<f64>()
                / marks.len() as f64;
            phi.observe(v, be, &pt, &[&m]);
        }
        if let (Some(be), true) = (b.collective_exp, spec.has_collective()) {
            let (t, _) = sampler.point(n_points + k);
            let mut acc = 0.0;
            for &v1 in &pair_nodes {
                for &v2 in &pair_nodes {
                    acc += (a * spec.collective(x, t, &m, v1, v2).abs()).exp();
                }
            }
            let v = acc / (pair_nodes.len() * pair_nodes.len()) as f64;
            theta.observe(v, be, &[x, t], &[&m]);
        }
    }
    let mut checks = Vec::new();
    let mut push = |declared: bool, t: RatioTracker, name: &str| {
        if declared {
            checks.push(t.finish());
        } else {
            checks.push(ProbeCheck::skipped(name, "no declared bound"));
        }
    };
    push(b.drift.is_some(), drift, "drift-bound");
    push(b.diffusion.is_some(), diffusion, "diffusion-bound");
    push(b.rate.is_some(), rate, "rate-bound");
    push(true, nonneg, "rate-nonnegative");
    push(b.self_jump_exp.is_some(), phi, "self-jump-exp-bound");
    if spec.has_collective() {
        push(b.collective_exp.is_some(), theta, "collective-exp-bound");
    }
    Ok(ProbeReport::new(spec, checks))
}

/// All probes.
pub fn validate_model(spec: &ModelSpec, sampler: &ProbeSampler, n: usize) -> Result<ProbeReport> {
    let lip = probe_local_lipschitz(spec, sampler, n)?;
    let bounded = probe_boundedness(spec, sampler, n)?;
    Ok(lip.merge(bounded))
}
