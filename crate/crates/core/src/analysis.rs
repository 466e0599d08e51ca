//! Closed-form bounds: the Osgood modulus `μ(s) = -s ln s`, the Grönwall
//! exponential-moment bound and the recursive chaos-rate bound, plus small
//! fitting helpers.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DeclaredBounds, ModelSpec};

/// Upper end `e^{-2}` of the domain of the Osgood modulus.
pub const OSGOOD_CAP: f64 = 0.135_335_283_236_612_7;

/// `μ(s) = -s ln s`.
pub fn osgood_modulus(s: f64) -> f64 {
    -s * s.ln()
}

fn check_osgood_domain(x: f64) -> Result<()> {
    if x > 0.0 && x <= OSGOOD_CAP {
        Ok(())
    } else {
        Err(Error::Domain(format!("{x} is outside (0, e^-2]")))
    }
}

/// `M(x) = ∫_x^{e^{-2}} ds / (-s ln s) = ln(-ln x) - ln 2`.
pub fn osgood_m(x: f64) -> Result<f64> {
    check_osgood_domain(x)?;
    Ok(osgood_m_from_log(x.ln()))
}

/// `M` as a function of `ln x`; usable far below the smallest positive float.
pub fn osgood_m_from_log(ln_x: f64) -> f64 {
    (-ln_x).ln() - std::f64::consts::LN_2
}

/// `M^{-1}(y) = exp(-2 e^y)`. Underflows to zero for `y` above about 5.9.
pub fn osgood_m_inverse(y: f64) -> f64 {
    osgood_m_inverse_log(y).exp()
}

/// `ln M^{-1}(y) = -2 e^y`.
pub fn osgood_m_inverse_log(y: f64) -> f64 {
    -2.0 * y.exp()
}

/// Osgood bound `M^{-1}(M(c) - G)`, capped at `e^{-2}` once `M(c) ≤ G`.
///
/// With this modulus the bound has the closed form `c^{e^{-G}}`.
pub fn osgood_bound(c: f64, gamma_integral: f64) -> Result<f64> {
    check_osgood_domain(c)?;
    if !(gamma_integral >= 0.0) {
        return Err(Error::Domain(format!("∫γ must be nonnegative, got {gamma_integral}")));
    }
    Ok((c.ln() * (-gamma_integral).exp()).exp().min(OSGOOD_CAP))
}

/// Adaptive Simpson quadrature of `g` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(g: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        g: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (g(lm), g(rm));
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(g, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + recurse(g, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fb, fm) = (g(a), g(b), g(0.5 * (a + b)));
    let whole = simpson(fa, fm, fb, b - a);
    recurse(g, a, b, fa, fm, fb, whole, tol, 50)
}

/// `∫_x^{cap} ds / modulus(s)` by adaptive quadrature on the geometric
/// pieces `[e^{-k-1}, e^{-k}]`; the generic form of `M` for any modulus.
pub fn osgood_m_quadrature(modulus: impl Fn(f64) -> f64, x: f64, cap: f64) -> f64 {
    let g = |s: f64| 1.0 / modulus(s);
    let mut total = 0.0;
    let mut hi = cap;
    while hi > x {
        let lo = (hi / std::f64::consts::E).max(x);
        total += adaptive_simpson(&g, lo, hi, 1e-14);
        hi = lo;
    }
    total
}

/// `K = a‖b‖ + a²‖σ‖²/2 + ‖f‖ sup∫e^{a|Φ|}dρ`, plus `‖f‖ sup∫e^{a|Θ|}dν`
/// when the model has collective jumps.
pub fn gronwall_constant(spec: &ModelSpec) -> Result<f64> {
    let a = spec.exp_exponent;
    let b = &spec.bounds;
    let drift = DeclaredBounds::require(b.drift, "drift")?;
    let diffusion = DeclaredBounds::require(b.diffusion, "diffusion")?;
    let rate = DeclaredBounds::require(b.rate, "rate")?;
    let mut k = a * drift + 0.5 * a * a * diffusion * diffusion;
    if rate > 0.0 {
        k += rate * DeclaredBounds::require(b.self_jump_exp, "self_jump_exp")?;
        if spec.has_collective() {
            k += rate * DeclaredBounds::require(b.collective_exp, "collective_exp")?;
        }
    }
    Ok(k)
}

/// `E e^{a|X_t|} ≤ E e^{a|X_0|} e^{K t}`.
pub fn gronwall_exp_moment_bound(spec: &ModelSpec, e_exp_x0: f64, t: f64) -> Result<f64> {
    if !(e_exp_x0 >= 1.0) {
        return Err(Error::Domain(format!("E e^(a|X_0|) must be at least 1, got {e_exp_x0}")));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
    }
    Ok(e_exp_x0 * (gronwall_constant(spec)? * t).exp())
}

/// `k` applications of `s ↦ c1 (s + N^{-1/2})^{c2}` starting from `s0`.
pub fn chaos_rate_bound(s0: f64, n_particles: usize, c1: f64, c2: f64, k: usize) -> f64 {
    let h = 1.0 / (n_particles as f64).sqrt();
    (0..k).fold(s0, |s, _| c1 * (s + h).powf(c2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least squares of `ln y` on `ln x`.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<PowerLawFit> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::Domain("need at least three (x, y) pairs".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Domain("power-law fit needs positive finite data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    Ok(linear_fit(&lx, &ly))
}

/// Ordinary least squares `y ≈ slope x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> PowerLawFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    PowerLawFit { slope, intercept, r2 }
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::catalog;

    #[test]
    fn osgood_m_examples() {
        assert!(osgood_m(OSGOOD_CAP).unwrap().abs() < 1e-15);
        let m4 = osgood_m((-4.0f64).exp()).unwrap();
        assert!((m4 - std::f64::consts::LN_2).abs() < 1e-15);
        let q = osgood_m_quadrature(osgood_modulus, (-4.0f64).exp(), OSGOOD_CAP);
        assert!((q - std::f64::consts::LN_2).abs() < 1e-8);
        // x = e^{-2^10} is below the smallest positive double
        assert!((osgood_m_from_log(-1024.0) - 9.0 * std::f64::consts::LN_2).abs() < 1e-12);
        assert!(osgood_m(0.2).is_err());
        assert!(osgood_m(0.0).is_err());
    }

    #[test]
    fn osgood_bound_examples() {
        let c = 1e-3;
        assert!((osgood_bound(c, 0.0).unwrap() - c).abs() < 1e-15);
        let b = osgood_bound((-4.0f64).exp(), std::f64::consts::LN_2).unwrap();
        assert!((b - OSGOOD_CAP).abs() < 1e-15);
    }

    #[test]
    fn osgood_bound_dominates_euler_solution() {
        let (mut r, h) = ((-6.0f64).exp(), 1e-6);
        for _ in 0..1_000_000 {
            r += h * osgood_modulus(r);
        }
        let bound = osgood_bound((-6.0f64).exp(), 1.0).unwrap();
        assert!(r <= bound * (1.0 + 1e-12), "{r} > {bound}");
    }

    #[test]
    fn inverse_round_trips_in_log_domain() {
        for k in 0..=100 {
            let y = k as f64 / 10.0;
            let back = osgood_m_from_log(osgood_m_inverse_log(y));
            assert!((back - y).abs() < 1e-12, "{y} -> {back}");
        }
        assert!((osgood_m(osgood_m_inverse(1.5)).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn gronwall_examples() {
        let mut zero = ModelSpec::builder("zero").build().unwrap();
        zero.bounds = DeclaredBounds {
            drift: Some(0.0),
            diffusion: Some(0.0),
            rate: Some(0.0),
            ..Default::default()
        };
        assert_eq!(gronwall_exp_moment_bound(&zero, 3.0, 5.0).unwrap(), 3.0);
        zero.bounds.drift = Some(1.0);
        let b = gronwall_exp_moment_bound(&zero, 2.0, 1.0).unwrap();
        assert!((b - 2.0 * std::f64::consts::E).abs() < 1e-14);
        zero.bounds.rate = None;
        assert!(matches!(gronwall_constant(&zero), Err(Error::MissingBound("rate"))));
    }

    #[test]
    fn gronwall_constant_of_lin_lip() {
        let spec = catalog::by_id(catalog::LIN_LIP).unwrap();
        let k = gronwall_constant(&spec).unwrap();
        let expected = 1.0 + 0.5 * 0.75 * 0.75 + 1.5 * 1.67 + 1.5 * 1.66;
        assert!((k - expected).abs() < 1e-12);
    }

    #[test]
    fn chaos_rate_examples() {
        assert!((chaos_rate_bound(0.0, 4, 1.0, 1.0, 3) - 1.5).abs() < 1e-15);
        assert!((chaos_rate_bound(1.0, 100, 2.0, 1.0, 3) - 9.4).abs() < 1e-12);
        assert_eq!(chaos_rate_bound(0.7, 10, 2.0, 0.5, 0), 0.7);
    }

    #[test]
    fn power_law_fits() {
        let xs = [1.0, 10.0, 100.0, 1000.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| x.powf(-0.5)).collect();
        let f = fit_power_law(&xs, &ys).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12 && (f.r2 - 1.0).abs() < 1e-12);
        let f = fit_power_law(&xs, &[2.0; 4]).unwrap();
        assert_eq!(f.slope, 0.0);
        assert!(fit_power_law(&xs, &[1.0, 0.0, 1.0, 1.0]).is_err());
        assert!(fit_power_law(&xs[..2], &ys[..2]).is_err());
    }
}
