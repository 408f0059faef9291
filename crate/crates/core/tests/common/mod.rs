//! Independent oracles shared by the integration suites.
#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};

/// Lowest `count` eigenvalues of `-(1/2m) d^2 + (beta/3m) d^4` on `[0, d]`
/// discretized with fourth-order central stencils on `interior` points.
///
/// Wall values vanish and ghost points are odd reflections through the walls
/// (psi = psi'' = 0 there), which is the Dirichlet closure of the quartic
/// operator.
pub fn fd_levels(m: f64, d: f64, beta: f64, interior: usize, count: usize) -> Vec<f64> {
    let n = interior;
    let h = d / (n + 1) as f64;
    // grid index j = 1..=n, walls at 0 and n + 1
    let second: [f64; 5] = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
    let fourth: [f64; 7] = [-1.0 / 6.0, 2.0, -13.0 / 2.0, 28.0 / 3.0, -13.0 / 2.0, 2.0, -1.0 / 6.0];
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut add = |row: usize, ghost: i64, coeff: f64| {
        // map a possibly out-of-range grid index to (column, sign)
        let total = n as i64 + 1;
        let (col, sign) = if ghost <= 0 {
            (-ghost, -1.0)
        } else if ghost >= total {
            (2 * total - ghost, -1.0)
        } else {
            (ghost, 1.0)
        };
        if col == 0 || col == total {
            return;
        }
        a[(row, (col - 1) as usize)] += sign * coeff;
    };
    for row in 0..n {
        let j = row as i64 + 1;
        for (k, c) in second.iter().enumerate() {
            add(row, j + k as i64 - 2, -c / (2.0 * m * h * h));
        }
        for (k, c) in fourth.iter().enumerate() {
            add(row, j + k as i64 - 3, beta * c / (3.0 * m * h.powi(4)));
        }
    }
    let mut vals: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals.truncate(count);
    vals
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
