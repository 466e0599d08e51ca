//! Coefficients as affine combinations of a fixed set of basis functions,
//! so models can be declared in a config file.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{EmpiricalMeasure, Statistic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    State,
    Sin,
    Cos,
    Tanh,
    Arctan,
    SinOfSquare,
    Square,
    InvOnePlusSq,
    MeasureMean,
    MeasureArctan,
    MeasureSin,
    MeasureCos,
    MeasureTanh,
    /// `tanh(mean(m) - x)`.
    TanhMeanGap,
    /// Event mark `u` (for Θ: the owner's coordinate `v1`).
    Mark,
    /// Target mark `v2`; collective kernel only.
    PartnerMark,
    /// Source state; collective kernel only.
    Source,
    /// `sin(source - x)`; collective kernel only.
    SinSourceGap,
}

/// Where a coefficient is used, which decides the admissible bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    MeanField,
    SelfJump,
    Collective,
}

impl Basis {
    fn allowed_in(self, slot: Slot) -> bool {
        match self {
            Basis::Mark => slot != Slot::MeanField,
            Basis::PartnerMark | Basis::Source | Basis::SinSourceGap => slot == Slot::Collective,
            _ => true,
        }
    }

    fn uses_mark(self) -> bool {
        matches!(self, Basis::Mark | Basis::PartnerMark)
    }

    #[inline]
    fn eval(self, a: &Args<'_>) -> f64 {
        let x = a.x;
        match self {
            Basis::State => x,
            Basis::Sin => x.sin(),
            Basis::Cos => x.cos(),
            Basis::Tanh => x.tanh(),
            Basis::Arctan => x.atan(),
            Basis::SinOfSquare => (x * x).sin(),
            Basis::Square => x * x,
            Basis::InvOnePlusSq => 1.0 / (1.0 + x * x),
            Basis::MeasureMean => a.m.statistic(Statistic::Mean),
            Basis::MeasureArctan => a.m.statistic(Statistic::Arctan),
            Basis::MeasureSin => a.m.statistic(Statistic::Sin),
            Basis::MeasureCos => a.m.statistic(Statistic::Cos),
            Basis::MeasureTanh => a.m.statistic(Statistic::Tanh),
            Basis::TanhMeanGap => (a.m.statistic(Statistic::Mean) - x).tanh(),
            Basis::Mark => a.u,
            Basis::PartnerMark => a.v2,
            Basis::Source => a.src,
            Basis::SinSourceGap => (a.src - x).sin(),
        }
    }
}

struct Args<'a> {
    x: f64,
    m: &'a EmpiricalMeasure,
    u: f64,
    v2: f64,
    src: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    pub basis: Basis,
}

/// `constant + Σ coef_k · basis_k`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Affine {
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub terms: Vec<Term>,
}

impl Affine {
    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            terms: Vec::new(),
        }
    }

    pub fn term(mut self, coef: f64, basis: Basis) -> Self {
        self.terms.push(Term { coef, basis });
        self
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.terms.iter().all(|t| t.coef == 0.0)
    }

    pub fn validate(&self, slot: Slot, name: &str) -> Result<()> {
        if !self.constant.is_finite() || self.terms.iter().any(|t| !t.coef.is_finite()) {
            return Err(Error::Config(format!("{name}: coefficients must be finite")));
        }
        if let Some(t) = self.terms.iter().find(|t| !t.basis.allowed_in(slot)) {
            return Err(Error::Config(format!("{name}: basis {:?} is not allowed here", t.basis)));
        }
        Ok(())
    }

    #[inline]
    fn eval_args(&self, a: &Args<'_>) -> f64 {
        self.terms
            .iter()
            .fold(self.constant, |acc, t| acc + t.coef * t.basis.eval(a))
    }

    pub fn eval(&self, x: f64, m: &EmpiricalMeasure) -> f64 {
        self.eval_args(&Args {
            x,
            m,
            u: 0.0,
            v2: 0.0,
            src: 0.0,
        })
    }

    pub fn eval_mark(&self, x: f64, m: &EmpiricalMeasure, u: f64) -> f64 {
        self.eval_args(&Args {
            x,
            m,
            u,
            v2: 0.0,
            src: 0.0,
        })
    }

    /// Collective kernel `Θ(src, x, m, v1, v2)`.
    pub fn eval_pair(&self, src: f64, x: f64, m: &EmpiricalMeasure, v1: f64, v2: f64) -> f64 {
        self.eval_args(&Args {
            x,
            m,
            u: v1,
            v2,
            src,
        })
    }

    /// The same combination with every mark basis replaced by `mark_mean`;
    /// the exact mark average because the combination is affine in marks.
    pub fn mark_averaged(&self, mark_mean: f64) -> Affine {
        let mut constant = self.constant;
        let mut terms = Vec::new();
        for t in &self.terms {
            if t.basis.uses_mark() {
                constant += t.coef * mark_mean;
            } else {
                terms.push(*t);
            }
        }
        Affine { constant, terms }
    }
}
