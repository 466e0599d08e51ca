//! Built-in models addressable by id.

use super::parametric::{Affine, Basis};
use super::{DeclaredBounds, ModelSpec, ParametricModel, ScalarLaw};
use crate::error::{Error, Result};

pub const LIN_LIP: &str = "lin-lip";
pub const LOCLIP: &str = "loclip";
pub const PURE_DRIFT: &str = "pure-drift";

pub const IDS: [&str; 3] = [LIN_LIP, LOCLIP, PURE_DRIFT];

pub fn parametric(id: &str) -> Result<ParametricModel> {
    match id {
        LIN_LIP => Ok(lin_lip()),
        LOCLIP => Ok(loclip()),
        PURE_DRIFT => Ok(pure_drift()),
        other => Err(Error::UnknownModel(other.to_string())),
    }
}

pub fn by_id(id: &str) -> Result<ModelSpec> {
    parametric(id)?.to_spec(id)
}

const UNIT_MARKS: ScalarLaw = ScalarLaw::Uniform { low: -1.0, high: 1.0 };
const STANDARD_NORMAL: ScalarLaw = ScalarLaw::Normal { mean: 0.0, sd: 1.0 };

/// Bounded, globally Lipschitz coefficients with collective jumps:
/// `b = tanh(mean(m) - x)`, `σ = 0.5 + 0.25 cos x`, `f = 1 + 0.5 cos x`,
/// `Ψ = 0.5 u - 0.25 tanh x`, `Θ = 0.25 v1 + 0.25 v2 + 0.25 sin(x_src - x)`.
/// Symmetric under `x -> -x` with uniform marks on `[-1, 1]`.
pub fn lin_lip() -> ParametricModel {
    ParametricModel {
        drift: Affine::constant(0.0).term(1.0, Basis::TanhMeanGap),
        diffusion: Affine::constant(0.5).term(0.25, Basis::Cos),
        rate: Affine::constant(1.0).term(0.5, Basis::Cos),
        self_jump: Affine::constant(0.0)
            .term(0.5, Basis::Mark)
            .term(-0.25, Basis::Tanh),
        collective_jump: Some(
            Affine::constant(0.0)
                .term(0.25, Basis::Mark)
                .term(0.25, Basis::PartnerMark)
                .term(0.25, Basis::SinSourceGap),
        ),
        mark_law: UNIT_MARKS,
        initial_law: STANDARD_NORMAL,
        lipschitz: 1.0,
        exp_exponent: 1.0,
        bounds: DeclaredBounds {
            drift: Some(1.0),
            diffusion: Some(0.75),
            rate: Some(1.5),
            // e^{1/4} (e^{1/2} - 1) / (1/2) = 1.6659...
            self_jump_exp: Some(1.67),
            // e^{1/4} ((e^{1/4} - 1) / (1/4))^2 = 1.6573...
            collective_exp: Some(1.66),
        },
    }
}

/// Locally Lipschitz drift `b = sin(x²) + ∫ arctan dm`, constant diffusion,
/// rate `f = 0.5 + 0.5 / (1 + x²)` and jumps `Φ = 0.5 u`.
pub fn loclip() -> ParametricModel {
    ParametricModel {
        drift: Affine::constant(0.0)
            .term(1.0, Basis::SinOfSquare)
            .term(1.0, Basis::MeasureArctan),
        diffusion: Affine::constant(0.5),
        rate: Affine::constant(0.5).term(0.5, Basis::InvOnePlusSq),
        self_jump: Affine::constant(0.0).term(0.5, Basis::Mark),
        collective_jump: None,
        mark_law: UNIT_MARKS,
        initial_law: STANDARD_NORMAL,
        lipschitz: 1.0,
        exp_exponent: 1.0,
        bounds: DeclaredBounds {
            // 1 + π/2
            drift: Some(2.58),
            diffusion: Some(0.5),
            rate: Some(1.0),
            // (e^{1/2} - 1) / (1/2) = 1.2974...
            self_jump_exp: Some(1.30),
            collective_exp: None,
        },
    }
}

/// `ẋ = -tanh x` from `δ_2`; no noise and no jumps.
pub fn pure_drift() -> ParametricModel {
    ParametricModel {
        drift: Affine::constant(0.0).term(-1.0, Basis::Tanh),
        diffusion: Affine::default(),
        rate: Affine::default(),
        self_jump: Affine::default(),
        collective_jump: None,
        mark_law: UNIT_MARKS,
        initial_law: ScalarLaw::Dirac { value: 2.0 },
        lipschitz: 1.0,
        exp_exponent: 1.0,
        bounds: DeclaredBounds {
            drift: Some(1.0),
            diffusion: Some(0.0),
            rate: Some(0.0),
            self_jump_exp: Some(1.0),
            collective_exp: None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::EmpiricalMeasure;

    #[test]
    fn ids_resolve() {
        for id in IDS {
            assert_eq!(by_id(id).unwrap().id, id);
        }
        assert!(matches!(by_id("nope"), Err(Error::UnknownModel(_))));
    }

    #[test]
    fn declared_exp_bounds_cover_closed_forms() {
        let e = std::f64::consts::E;
        let psi = e.powf(0.25) * (e.sqrt() - 1.0) / 0.5;
        let theta = e.powf(0.25) * ((e.powf(0.25) - 1.0) / 0.25).powi(2);
        let b = lin_lip().bounds;
        assert!(psi <= b.self_jump_exp.unwrap() && b.self_jump_exp.unwrap() - psi < 0.01);
        assert!(theta <= b.collective_exp.unwrap() && b.collective_exp.unwrap() - theta < 0.01);
        assert!(1.0 + std::f64::consts::FRAC_PI_2 <= loclip().bounds.drift.unwrap());
    }

    #[test]
    fn lin_lip_is_odd_symmetric() {
        let s = by_id(LIN_LIP).unwrap();
        let m = EmpiricalMeasure::from_samples(&[-0.3, 0.8, 1.1]).unwrap();
        let mm = EmpiricalMeasure::from_samples(&[0.3, -0.8, -1.1]).unwrap();
        let x = 0.7;
        assert!((s.drift(x, &m) + s.drift(-x, &mm)).abs() < 1e-15);
        assert!((s.diffusion(x, &m) - s.diffusion(-x, &mm)).abs() < 1e-15);
        assert!((s.rate(x, &m) - s.rate(-x, &mm)).abs() < 1e-15);
        assert!((s.self_jump(x, &m, 0.4) + s.self_jump(-x, &mm, -0.4)).abs() < 1e-15);
        let t1 = s.collective(0.2, x, &m, 0.1, -0.6);
        let t2 = s.collective(-0.2, -x, &mm, -0.1, 0.6);
        assert!((t1 + t2).abs() < 1e-15);
    }

    #[test]
    fn lin_lip_mark_mean_is_exact() {
        let s = by_id(LIN_LIP).unwrap();
        let m = EmpiricalMeasure::dirac(0.0);
        let exact = s.collective_mark_mean(1.0, 0.2, &m).unwrap();
        assert!((exact - 0.25 * (0.8f64).sin()).abs() < 1e-15);
    }
}
