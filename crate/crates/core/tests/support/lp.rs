//! Dense two-phase simplex, used as an independent optimal-transport oracle.

const EPS: f64 = 1e-12;

/// `min c·x` subject to `A x = b`, `x ≥ 0`, with `b ≥ 0`. Returns the
/// optimal value, or `None` if infeasible. Bland's rule, so degenerate
/// transport polytopes do not cycle.
pub fn minimize(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<f64> {
    let rows = a.len();
    let cols = c.len();
    let width = cols + rows + 1;
    // tableau columns: originals, artificials, rhs
    let mut t: Vec<Vec<f64>> = (0..rows)
        .map(|i| {
            let mut r = vec![0.0; width];
            r[..cols].copy_from_slice(&a[i]);
            r[cols + i] = 1.0;
            r[width - 1] = b[i];
            r
        })
        .collect();
    let mut basis: Vec<usize> = (cols..cols + rows).collect();

    let phase1: Vec<f64> = (0..cols + rows).map(|j| if j >= cols { 1.0 } else { 0.0 }).collect();
    run(&mut t, &mut basis, &phase1, cols + rows);
    let infeasibility: f64 = basis
        .iter()
        .enumerate()
        .filter(|(_, &j)| j >= cols)
        .map(|(i, _)| t[i][width - 1])
        .sum();
    if infeasibility > 1e-9 {
        return None;
    }
    // drive zero-level artificials out of the basis
    for i in 0..rows {
        if basis[i] >= cols {
            if let Some(j) = (0..cols).find(|&j| t[i][j].abs() > 1e-9) {
                pivot(&mut t, &mut basis, i, j);
            }
        }
    }
    let mut cost = c.to_vec();
    cost.extend(std::iter::repeat_n(0.0, rows));
    run(&mut t, &mut basis, &cost, cols);
    Some(
        basis
            .iter()
            .enumerate()
            .filter(|(_, &j)| j < cols)
            .map(|(i, &j)| c[j] * t[i][width - 1])
            .sum(),
    )
}

fn run(t: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], allowed: usize) {
    let width = t[0].len();
    loop {
        let reduced = |j: usize| cost[j] - basis.iter().enumerate().map(|(i, &bj)| cost[bj] * t[i][j]).sum::<f64>();
        let Some(enter) = (0..allowed).find(|&j| !basis.contains(&j) && reduced(j) < -EPS) else {
            return;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..t.len() {
            if t[i][enter] > EPS {
                let ratio = t[i][width - 1] / t[i][enter];
                let better = match leave {
                    None => true,
                    Some((l, r)) => ratio < r - EPS || (ratio <= r + EPS && basis[i] < basis[l]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (row, _) = leave.expect("transport problems are bounded");
        pivot(t, basis, row, enter);
    }
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize) {
    let p = t[row][col];
    t[row].iter_mut().for_each(|v| *v /= p);
    let pivot_row = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i != row && r[col] != 0.0 {
            let f = r[col];
            r.iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
        }
    }
    basis[row] = col;
}

/// Optimal transport cost between two weighted atom lists with cost
/// `|x - y|^p`, by linear programming over the coupling polytope.
pub fn transport_cost(a: &[(f64, f64)], b: &[(f64, f64)], p: i32) -> f64 {
    let (m, n) = (a.len(), b.len());
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..m {
        let mut r = vec![0.0; m * n];
        (0..n).for_each(|j| r[i * n + j] = 1.0);
        rows.push(r);
        rhs.push(a[i].1);
    }
    // the last column constraint is implied by the others
    for j in 0..n - 1 {
        let mut r = vec![0.0; m * n];
        (0..m).for_each(|i| r[i * n + j] = 1.0);
        rows.push(r);
        rhs.push(b[j].1);
    }
    let cost: Vec<f64> = (0..m * n)
        .map(|k| (a[k / n].0 - b[k % n].0).abs().powi(p))
        .collect();
    minimize(&rows, &rhs, &cost).expect("coupling polytope is nonempty")
}
