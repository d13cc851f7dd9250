//! Shared helpers for the crate's unit tests. Compiled only under `cfg(test)`.

use crate::geometry::{arc_average, dual_edge_quantity, PolygonalCurve};
use crate::redistribution::RedistributionParams;

/// Dense Gaussian elimination with partial pivoting, as an independent
/// reference for the structured solvers.
pub(crate) fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        assert!(a[col][col] != 0.0, "dense reference hit a zero pivot");
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x
}

/// Brute-force tangential velocity: assemble the difference relations
/// `phi(k*_i) alpha_i - phi(k*_{i-1}) alpha_{i-1} = psi_i` for `i = 1..n-1`
/// together with the zero-mean row `sum_j r*_j alpha_j = 0`, and solve the
/// resulting dense system directly.
pub(crate) fn dense_alpha_reference(
    params: &RedistributionParams,
    curve: &PolygonalCurve,
    f: &[f64],
    omega: f64,
) -> Vec<f64> {
    let n = curve.n();
    let r = curve.edge_lengths();
    let k = curve.edge_curvatures();
    let length = curve.total_length();
    let phi_edge: Vec<f64> = k.iter().map(|&ki| params.phi(ki)).collect();
    let phi_dual: Vec<f64> = dual_edge_quantity(k).iter().map(|&ks| params.phi(ks)).collect();
    let r_dual = dual_edge_quantity(r);
    let mean_f = arc_average(f, r);
    let mean_phi = arc_average(&phi_edge, r);
    let target = length * mean_phi / n as f64;

    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    for j in 0..n {
        a[0][j] = r_dual[j];
    }
    for i in 1..n {
        a[i][i] = phi_dual[i];
        a[i][i - 1] = -phi_dual[i - 1];
        b[i] = r[i] * f[i] - phi_edge[i] * r[i] * mean_f / mean_phi
            + omega * (target - phi_edge[i] * r[i]);
    }
    dense_solve(a, b)
}
