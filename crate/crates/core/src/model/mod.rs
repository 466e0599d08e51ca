//! Model coefficients, constants and mark laws.

pub mod catalog;
mod law;
pub mod parametric;
pub mod probe;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use law::ScalarLaw;
use parametric::{Affine, Slot};

use crate::error::{Error, Result};
use crate::measure::EmpiricalMeasure;

/// `(x, m) -> value`: drift, diffusion, jump rate.
pub type MeanFieldFn = Arc<dyn Fn(f64, &EmpiricalMeasure) -> f64 + Send + Sync>;
/// `(x, m, u) -> displacement` of the jumping particle.
pub type SelfJumpFn = Arc<dyn Fn(f64, &EmpiricalMeasure, f64) -> f64 + Send + Sync>;
/// `(x_src, x_tgt, m, v1, v2) -> displacement` applied to the target.
pub type KernelFn = Arc<dyn Fn(f64, f64, &EmpiricalMeasure, f64, f64) -> f64 + Send + Sync>;
/// `(x_src, x_tgt, m) -> ∫ Θ dν`, the kernel averaged over both marks.
pub type KernelMeanFn = Arc<dyn Fn(f64, f64, &EmpiricalMeasure) -> f64 + Send + Sync>;

/// Collective jump kernel with an optional exact mark average.
#[derive(Clone)]
pub struct CollectiveJump {
    pub kernel: KernelFn,
    pub mark_mean: Option<KernelMeanFn>,
}

/// Declared sup-norms. Unset entries make bound computations that need
/// them fail with [`Error::MissingBound`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeclaredBounds {
    pub drift: Option<f64>,
    pub diffusion: Option<f64>,
    pub rate: Option<f64>,
    /// `sup_{x,m} ∫ e^{a|Φ(x,m,u)|} dρ(u)`.
    pub self_jump_exp: Option<f64>,
    /// `sup_{x,x',m} ∫ e^{a|Θ(x,x',m,v1,v2)|} dν(v)`.
    pub collective_exp: Option<f64>,
}

impl DeclaredBounds {
    pub fn require(value: Option<f64>, name: &'static str) -> Result<f64> {
        value.ok_or(Error::MissingBound(name))
    }
}

/// Model in the configuration format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParametricModel {
    #[serde(default)]
    pub drift: Affine,
    #[serde(default)]
    pub diffusion: Affine,
    #[serde(default)]
    pub rate: Affine,
    #[serde(default)]
    pub self_jump: Affine,
    #[serde(default)]
    pub collective_jump: Option<Affine>,
    #[serde(default = "default_mark_law")]
    pub mark_law: ScalarLaw,
    #[serde(default = "default_initial_law")]
    pub initial_law: ScalarLaw,
    #[serde(default = "one")]
    pub lipschitz: f64,
    #[serde(default = "one")]
    pub exp_exponent: f64,
    #[serde(default)]
    pub bounds: DeclaredBounds,
}

fn default_mark_law() -> ScalarLaw {
    ScalarLaw::Uniform { low: -1.0, high: 1.0 }
}

fn default_initial_law() -> ScalarLaw {
    ScalarLaw::Normal { mean: 0.0, sd: 1.0 }
}

fn one() -> f64 {
    1.0
}

impl ParametricModel {
    pub fn validate(&self) -> Result<()> {
        self.drift.validate(Slot::MeanField, "drift")?;
        self.diffusion.validate(Slot::MeanField, "diffusion")?;
        self.rate.validate(Slot::MeanField, "rate")?;
        self.self_jump.validate(Slot::SelfJump, "self_jump")?;
        if let Some(theta) = &self.collective_jump {
            theta.validate(Slot::Collective, "collective_jump")?;
        }
        Ok(())
    }

    pub fn to_spec(&self, id: &str) -> Result<ModelSpec> {
        self.validate()?;
        let drift = self.drift.clone();
        let diffusion = self.diffusion.clone();
        let rate = self.rate.clone();
        let psi = self.self_jump.clone();
        let mut b = ModelSpec::builder(id)
            .drift(move |x, m| drift.eval(x, m))
            .diffusion(move |x, m| diffusion.eval(x, m))
            .rate(move |x, m| rate.eval(x, m))
            .self_jump(move |x, m, u| psi.eval_mark(x, m, u))
            .mark_law(self.mark_law)
            .initial_law(self.initial_law)
            .lipschitz(self.lipschitz)
            .exp_exponent(self.exp_exponent)
            .bounds(self.bounds);
        if let Some(theta) = &self.collective_jump {
            let kernel = theta.clone();
            b = b.collective(move |s, x, m, v1, v2| kernel.eval_pair(s, x, m, v1, v2));
            if let Some(mean) = self.mark_law.mean() {
                let avg = theta.mark_averaged(mean);
                b = b.collective_mark_mean(move |s, x, m| avg.eval_pair(s, x, m, 0.0, 0.0));
            }
        }
        let mut spec = b.build()?;
        spec.parametric = Some(self.clone());
        Ok(spec)
    }
}

/// A McKean–Vlasov jump-diffusion model: coefficients `b, σ, f, Φ/Ψ, Θ`,
/// the constants `L` and `a`, declared sup-norms and the mark and initial laws.
#[derive(Clone)]
pub struct ModelSpec {
    pub id: String,
    drift: MeanFieldFn,
    diffusion: MeanFieldFn,
    rate: MeanFieldFn,
    self_jump: SelfJumpFn,
    collective: Option<CollectiveJump>,
    pub mark_law: ScalarLaw,
    pub initial_law: ScalarLaw,
    pub lipschitz: f64,
    pub exp_exponent: f64,
    pub bounds: DeclaredBounds,
    parametric: Option<ParametricModel>,
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("id", &self.id)
            .field("collective", &self.collective.is_some())
            .field("mark_law", &self.mark_law)
            .field("initial_law", &self.initial_law)
            .field("lipschitz", &self.lipschitz)
            .field("exp_exponent", &self.exp_exponent)
            .field("bounds", &self.bounds)
            .finish()
    }
}

impl ModelSpec {
    pub fn builder(id: &str) -> ModelBuilder {
        ModelBuilder::new(id)
    }

    #[inline]
    pub fn drift(&self, x: f64, m: &EmpiricalMeasure) -> f64 {
        (self.drift)(x, m)
    }

    #[inline]
    pub fn diffusion(&self, x: f64, m: &EmpiricalMeasure) -> f64 {
        (self.diffusion)(x, m)
    }

    #[inline]
    pub fn rate(&self, x: f64, m: &EmpiricalMeasure) -> f64 {
        (self.rate)(x, m)
    }

    #[inline]
    pub fn self_jump(&self, x: f64, m: &EmpiricalMeasure, u: f64) -> f64 {
        (self.self_jump)(x, m, u)
    }

    pub fn has_collective(&self) -> bool {
        self.collective.is_some()
    }

    /// `Θ(x_src, x_tgt, m, v1, v2)`; zero when no kernel is declared.
    #[inline]
    pub fn collective(&self, src: f64, tgt: f64, m: &EmpiricalMeasure, v1: f64, v2: f64) -> f64 {
        match &self.collective {
            Some(c) => (c.kernel)(src, tgt, m, v1, v2),
            None => 0.0,
        }
    }

    /// Exact `∫ Θ(x_src, x_tgt, m, v) dν(v)` when the model provides it.
    #[inline]
    pub fn collective_mark_mean(&self, src: f64, tgt: f64, m: &EmpiricalMeasure) -> Option<f64> {
        match &self.collective {
            Some(CollectiveJump {
                mark_mean: Some(mean),
                ..
            }) => Some(mean(src, tgt, m)),
            Some(_) => None,
            None => Some(0.0),
        }
    }

    /// Configuration form, for models built from the parametric family.
    pub fn parametric(&self) -> Option<&ParametricModel> {
        self.parametric.as_ref()
    }

    /// Thinning intensity `Λ = ‖f‖∞`, or 1 when the rate vanishes.
    pub fn dominating_rate(&self) -> Result<f64> {
        let r = DeclaredBounds::require(self.bounds.rate, "rate")?;
        Ok(if r > 0.0 { r } else { 1.0 })
    }

    pub fn without_collective(&self) -> Self {
        let mut s = self.clone();
        s.collective = None;
        if let Some(p) = &mut s.parametric {
            p.collective_jump = None;
        }
        s
    }

    pub fn with_initial_law(&self, law: ScalarLaw) -> Self {
        let mut s = self.clone();
        s.initial_law = law;
        if let Some(p) = &mut s.parametric {
            p.initial_law = law;
        }
        s
    }
}

pub struct ModelBuilder {
    spec: ModelSpec,
}

impl ModelBuilder {
    fn new(id: &str) -> Self {
        Self {
            spec: ModelSpec {
                id: id.to_string(),
                drift: Arc::new(|_, _| 0.0),
                diffusion: Arc::new(|_, _| 0.0),
                rate: Arc::new(|_, _| 0.0),
                self_jump: Arc::new(|_, _, _| 0.0),
                collective: None,
                mark_law: default_mark_law(),
                initial_law: default_initial_law(),
                lipschitz: 1.0,
                exp_exponent: 1.0,
                bounds: DeclaredBounds::default(),
                parametric: None,
            },
        }
    }

    pub fn drift(mut self, f: impl Fn(f64, &EmpiricalMeasure) -> f64 + Send + Sync + 'static) -> Self {
        self.spec.drift = Arc::new(f);
        self
    }

    pub fn diffusion(mut self, f: impl Fn(f64, &EmpiricalMeasure) -> f64 + Send + Sync + 'static) -> Self {
        self.spec.diffusion = Arc::new(f);
        self
    }

    pub fn rate(mut self, f: impl Fn(f64, &EmpiricalMeasure) -> f64 + Send + Sync + 'static) -> Self {
        self.spec.rate = Arc::new(f);
        self
    }

    pub fn self_jump(
        mut self,
        f: impl Fn(f64, &EmpiricalMeasure, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.spec.self_jump = Arc::new(f);
        self
    }

    pub fn collective(
        mut self,
        f: impl Fn(f64, f64, &EmpiricalMeasure, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.spec.collective = Some(CollectiveJump {
            kernel: Arc::new(f),
            mark_mean: None,
        });
        self
    }

    /// Exact mark average of the collective kernel; requires [`Self::collective`] first.
    pub fn collective_mark_mean(
        mut self,
        f: impl Fn(f64, f64, &EmpiricalMeasure) -> f64 + Send + Sync + 'static,
    ) -> Self {
        if let Some(c) = &mut self.spec.collective {
            c.mark_mean = Some(Arc::new(f));
        }
        self
    }

    pub fn mark_law(mut self, law: ScalarLaw) -> Self {
        self.spec.mark_law = law;
        self
    }

    pub fn initial_law(mut self, law: ScalarLaw) -> Self {
        self.spec.initial_law = law;
        self
    }

    pub fn lipschitz(mut self, l: f64) -> Self {
        self.spec.lipschitz = l;
        self
    }

    pub fn exp_exponent(mut self, a: f64) -> Self {
        self.spec.exp_exponent = a;
        self
    }

    pub fn bounds(mut self, b: DeclaredBounds) -> Self {
        self.spec.bounds = b;
        self
    }

    pub fn build(self) -> Result<ModelSpec> {
        let s = self.spec;
        if !(s.lipschitz > 0.0 && s.lipschitz.is_finite()) {
            return Err(Error::Domain(format!("Lipschitz constant must be positive, got {}", s.lipschitz)));
        }
        if !(s.exp_exponent > 0.0 && s.exp_exponent.is_finite()) {
            return Err(Error::Domain(format!("exponent a must be positive, got {}", s.exp_exponent)));
        }
        s.mark_law.validate()?;
        s.initial_law.validate()?;
        let b = s.bounds;
        for v in [b.drift, b.diffusion, b.rate, b.self_jump_exp, b.collective_exp]
            .into_iter()
            .flatten()
        {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("declared bound {v} must be finite and nonnegative")));
            }
        }
        Ok(s)
    }
}

/// `∫ b̃(x, y) dm(y)`.
pub fn eval_true_mckean_drift(kernel: impl Fn(f64, f64) -> f64, x: f64, m: &EmpiricalMeasure) -> Result<f64> {
    if m.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    Ok(m.integrate(|y| kernel(x, y)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn true_mckean_drift_examples() {
        let m = EmpiricalMeasure::from_samples(&[0.0, 2.0]).unwrap();
        assert_eq!(eval_true_mckean_drift(|_, y| y, 7.0, &m).unwrap(), 1.0);
        assert_eq!(eval_true_mckean_drift(|_, _| 0.0, 7.0, &m).unwrap(), 0.0);
        let atoms: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
        let m = EmpiricalMeasure::from_samples(&atoms).unwrap();
        let mut direct = 0.0;
        for y in &atoms {
            direct += (2.0 * y).sin();
        }
        direct /= 10.0;
        let v = eval_true_mckean_drift(|x, y| (x * y).sin(), 2.0, &m).unwrap();
        assert!((v - direct).abs() < 1e-15);
    }

    #[test]
    fn dominating_rate_defaults_to_one_for_zero_rate() {
        let s = ModelSpec::builder("z")
            .bounds(DeclaredBounds {
                rate: Some(0.0),
                ..Default::default()
            })
            .build()
            .unwrap();
        assert_eq!(s.dominating_rate().unwrap(), 1.0);
        let s = ModelSpec::builder("none").build().unwrap();
        assert!(matches!(s.dominating_rate(), Err(Error::MissingBound("rate"))));
    }

    #[test]
    fn builder_rejects_bad_constants() {
        assert!(ModelSpec::builder("x").lipschitz(0.0).build().is_err());
        assert!(ModelSpec::builder("x").exp_exponent(-1.0).build().is_err());
    }

    #[test]
    fn parametric_model_parses_from_toml() {
        let text = r#"
            lipschitz = 2.0
            [drift]
            constant = 0.5
            terms = [{ coef = -1.0, basis = "tanh" }]
            [bounds]
            drift = 1.5
            rate = 0.0
        "#;
        let p: ParametricModel = toml::from_str(text).unwrap();
        let spec = p.to_spec("custom").unwrap();
        let m = EmpiricalMeasure::dirac(0.0);
        assert!((spec.drift(1.0, &m) - (0.5 - 1.0f64.tanh())).abs() < 1e-15);
        assert_eq!(spec.lipschitz, 2.0);
        assert_eq!(spec.bounds.drift, Some(1.5));
    }
}
