//! Fixed composite Gauss-Legendre and adaptive Gauss-Kronrod rules.

use std::ops::{Add, Mul};

use crate::error::{Error, Result};
use crate::C64;

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Five-point Gauss-Legendre on `panels` equal panels of `[a, b]`.
pub fn gauss_legendre<T, F>(f: F, a: f64, b: f64, panels: usize) -> T
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
    F: Fn(f64) -> T,
{
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut total = T::default();
    for i in 0..panels {
        let lo = a + i as f64 * h;
        let mid = lo + 0.5 * h;
        let mut acc = T::default();
        for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS) {
            acc = acc + f(mid + 0.5 * h * x) * w;
        }
        total = total + acc * (0.5 * h);
    }
    total
}

/// Nodes and weights of the composite rule used by [`gauss_legendre`].
pub fn gauss_legendre_nodes(a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(5 * panels);
    let mut weights = Vec::with_capacity(5 * panels);
    for i in 0..panels {
        let mid = a + (i as f64 + 0.5) * h;
        for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS) {
            nodes.push(mid + 0.5 * h * x);
            weights.push(0.5 * h * w);
        }
    }
    (nodes, weights)
}

// Kronrod 15-point abscissae (nonnegative half); odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let kronrod = kronrod * half;
    let gauss = gauss * half;
    (kronrod, (kronrod - gauss).norm())
}

/// Adaptive Gauss-Kronrod (7, 15) for complex integrands.
///
/// The interval is first cut into `initial_panels` pieces, which keeps long
/// oscillatory integrals from being judged on a single coarse sample. Fails
/// when the error estimate cannot be brought under
/// `max(abs_tol, rel_tol * |integral|)` within `max_intervals` subdivisions.
pub fn adaptive_gk<F: Fn(f64) -> C64>(
    f: F,
    a: f64,
    b: f64,
    initial_panels: usize,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<C64> {
    if a == b {
        return Ok(C64::new(0.0, 0.0));
    }
    let panels = initial_panels.max(1);
    let h = (b - a) / panels as f64;
    let mut pieces: Vec<(f64, f64, C64, f64)> = (0..panels)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == panels { b } else { lo + h };
            let (v, e) = gk15(&f, lo, hi);
            (lo, hi, v, e)
        })
        .collect();

    loop {
        let total: C64 = pieces.iter().map(|p| p.2).sum();
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        let target = abs_tol.max(rel_tol * total.norm());
        if err <= target {
            return Ok(total);
        }
        if pieces.len() >= max_intervals {
            return Err(Error::QuadratureFailure {
                a,
                b,
                tolerance: target,
            });
        }
        // bisect the worst piece
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, _, _) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            return Err(Error::QuadratureFailure {
                a,
                b,
                tolerance: target,
            });
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_polynomial_exact() {
        // degree 9 is integrated exactly by a single 5-point panel
        let v: f64 = gauss_legendre(|x| x.powi(9) + 3.0 * x.powi(4), 0.0, 2.0, 1);
        let want = 2f64.powi(10) / 10.0 + 3.0 * 2f64.powi(5) / 5.0;
        assert!((v - want).abs() < 1e-12);
    }

    #[test]
    fn gk_oscillatory_complex() {
        let w = 37.0;
        let t = 10.0;
        let v = adaptive_gk(|x| C64::from_polar(1.0, w * x), 0.0, t, 8, 1e-14, 1e-13, 10_000).unwrap();
        let want = (C64::from_polar(1.0, w * t) - 1.0) / C64::new(0.0, w);
        assert!((v - want).norm() < 1e-12);
    }

    #[test]
    fn gk_reports_failure() {
        let r = adaptive_gk(|x| C64::new(1.0 / x.abs().sqrt().max(1e-300), 0.0), -1.0, 1.0, 1, 1e-15, 0.0, 4);
        assert!(matches!(r, Err(Error::QuadratureFailure { .. })));
    }
}
