//! Exact one-dimensional optimal transport by quantile coupling.

use super::EmpiricalMeasure;

/// `∫_0^1 |F_1^{-1}(q) - F_2^{-1}(q)| dq`.
pub fn w1(m1: &EmpiricalMeasure, m2: &EmpiricalMeasure) -> f64 {
    quantile_cost(m1, m2, |d| d.abs())
}

/// Square root of `∫_0^1 |F_1^{-1}(q) - F_2^{-1}(q)|^2 dq`.
pub fn w2(m1: &EmpiricalMeasure, m2: &EmpiricalMeasure) -> f64 {
    quantile_cost(m1, m2, |d| d * d).max(0.0).sqrt()
}

fn quantile_cost(m1: &EmpiricalMeasure, m2: &EmpiricalMeasure, cost: impl Fn(f64) -> f64) -> f64 {
    let (x, y) = (m1.positions(), m2.positions());
    if m1.has_equal_weights() && m2.has_equal_weights() && x.len() == y.len() {
        let total: f64 = x.iter().zip(y).map(|(a, b)| cost(a - b)).sum();
        return total / x.len() as f64;
    }
    let c1 = cumulative(m1.weights());
    let c2 = cumulative(m2.weights());
    let (mut i, mut j) = (0, 0);
    let mut prev = 0.0;
    let mut acc = 0.0;
    while i < x.len() && j < y.len() {
        let next = c1[i].min(c2[j]);
        acc += (next - prev) * cost(x[i] - y[j]);
        prev = next;
        if c1[i] == next {
            i += 1;
        }
        if c2[j] == next {
            j += 1;
        }
    }
    acc
}

/// Partial sums of `w`, with the last entry pinned to exactly one so both
/// partitions end at the same point.
fn cumulative(w: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = w
        .iter()
        .map(|v| {
            acc += v;
            acc.min(1.0)
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = 1.0;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two(a: f64, b: f64) -> EmpiricalMeasure {
        EmpiricalMeasure::from_samples(&[a, b]).unwrap()
    }

    #[test]
    fn dirac_distances() {
        let d0 = EmpiricalMeasure::dirac(0.0);
        let d1 = EmpiricalMeasure::dirac(1.0);
        assert_eq!(w1(&d0, &d1), 1.0);
        assert_eq!(w2(&d0, &d1), 1.0);
        assert_eq!(w1(&d0, &d0), 0.0);
    }

    #[test]
    fn two_atom_pair() {
        assert_eq!(w1(&two(0.0, 2.0), &two(1.0, 3.0)), 1.0);
        assert_eq!(w2(&two(0.0, 2.0), &two(1.0, 3.0)), 1.0);
    }

    #[test]
    fn merge_path_agrees_with_equal_weight_path() {
        let a = EmpiricalMeasure::from_samples(&[0.1, 0.7, 2.0]).unwrap();
        let b = EmpiricalMeasure::from_samples(&[-1.0, 0.5, 0.9]).unwrap();
        let aw = EmpiricalMeasure::new(a.atoms().collect()).unwrap();
        let bw = EmpiricalMeasure::new(vec![(-1.0, 1.0 / 3.0), (0.5, 1.0 / 6.0), (0.5, 1.0 / 6.0), (0.9, 1.0 / 3.0)])
            .unwrap();
        assert!((w1(&a, &b) - w1(&aw, &bw)).abs() < 1e-14);
        assert!((w2(&a, &b) - w2(&aw, &bw)).abs() < 1e-14);
    }

    #[test]
    fn unequal_sizes() {
        // δ_0 against ½(δ_{-1} + δ_1): every unit of mass moves distance 1
        let d = EmpiricalMeasure::dirac(0.0);
        assert!((w1(&d, &two(-1.0, 1.0)) - 1.0).abs() < 1e-15);
        assert!((w2(&d, &two(-1.0, 1.0)) - 1.0).abs() < 1e-15);
    }
}
