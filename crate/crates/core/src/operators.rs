//! Operator algebra of the deformed price/trend pair.
//!
//! With a minimal price length the trend operator becomes
//! `T = T0 (1 + beta0 T0^2 / 3)` where `T0 = -i d/dp` is the canonical one,
//! which reproduces `[p, T] = i (1 + beta0 T^2)` up to `O(beta0^2)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::band::BandMatrix;
use crate::error::{Error, Result};
use crate::params::ValidatedParams;
use crate::C64;

/// `<n|r|k>` for the hard-wall eigenfunctions of a well of width `d`.
///
/// Nonzero only between levels of opposite parity, where it equals
/// `-8 n k d / (pi^2 (n^2 - k^2)^2)`.
pub fn dipole_element(n: usize, k: usize, d: f64) -> f64 {
    if (n + k).is_multiple_of(2) {
        return 0.0;
    }
    let (nf, kf) = (n as f64, k as f64);
    let gap = nf * nf - kf * kf;
    -8.0 * nf * kf * d / (PI * PI * gap * gap)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DipoleMatrix {
    pub dim: usize,
    pub d: f64,
    /// Row-major, `entries[(n-1) * dim + (k-1)] = <n|r|k>`.
    pub entries: Vec<f64>,
}

impl DipoleMatrix {
    pub fn get(&self, n: usize, k: usize) -> f64 {
        self.entries[(n - 1) * self.dim + (k - 1)]
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.entries[(n - 1) * self.dim..n * self.dim]
    }
}

pub fn dipole_matrix(p: &ValidatedParams) -> DipoleMatrix {
    let dim = p.n_basis();
    let d = p.d();
    let entries = (1..=dim)
        .flat_map(|n| (1..=dim).map(move |k| dipole_element(n, k, d)))
        .collect();
    DipoleMatrix { dim, d, entries }
}

/// Position and deformed-trend operators sampled on a uniform grid.
#[derive(Debug, Clone)]
pub struct GridOperatorPair {
    pub grid: Vec<f64>,
    pub spacing: f64,
    pub beta0: f64,
    /// Canonical `T0 = -i D` with `D` the centered first difference.
    pub canonical: BandMatrix,
    /// `T0 + (beta0 / 3) T0^3`.
    pub trend: BandMatrix,
}

pub const MIN_GRID_SIZE: usize = 16;

/// Builds the pair on `grid_size` points spanning `[-width/2, width/2]`.
pub fn build_trend_operator(grid_size: usize, beta0: f64, width: f64) -> Result<GridOperatorPair> {
    if grid_size < MIN_GRID_SIZE {
        return Err(Error::GridTooSmall {
            got: grid_size,
            min: MIN_GRID_SIZE,
        });
    }
    if !(width > 0.0) {
        return Err(Error::NonPositive {
            field: "width",
            value: width,
        });
    }
    if !(beta0 >= 0.0) {
        return Err(Error::NegativeBeta(beta0));
    }
    let h = width / (grid_size - 1) as f64;
    let grid: Vec<f64> = (0..grid_size).map(|j| -0.5 * width + j as f64 * h).collect();

    // -i * (psi[j+1] - psi[j-1]) / (2h)
    let mut canonical = BandMatrix::zeros(grid_size, 1);
    let c = C64::new(0.0, -0.5 / h);
    for j in 0..grid_size {
        if j + 1 < grid_size {
            canonical.set(j, j + 1, c);
        }
        if j > 0 {
            canonical.set(j, j - 1, -c);
        }
    }
    let cube = canonical.matmul(&canonical).matmul(&canonical);
    let trend = canonical.add_scaled(&cube, C64::new(beta0 / 3.0, 0.0));
    Ok(GridOperatorPair {
        grid,
        spacing: h,
        beta0,
        canonical,
        trend,
    })
}

impl GridOperatorPair {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Rows far enough from the edges that `T^2` sees no truncated stencil.
    pub fn interior(&self) -> std::ops::Range<usize> {
        let margin = 2 * self.trend.half_width() + 1;
        margin..self.len().saturating_sub(margin)
    }

    pub fn apply_position(&self, psi: &[C64]) -> Vec<C64> {
        psi.iter().zip(&self.grid).map(|(v, x)| v * x).collect()
    }

    pub fn apply_trend(&self, psi: &[C64]) -> Vec<C64> {
        self.trend.mul_vec(psi)
    }

    /// Hermiticity defect of the interior block of the trend matrix, relative
    /// to its largest entry.
    pub fn hermiticity_residual(&self) -> f64 {
        let scale = self.trend.max_abs().max(f64::MIN_POSITIVE);
        self.trend.hermiticity_residual(self.interior()) / scale
    }
}

/// `|| ([P, T] - i (1 + beta0 T^2)) psi || / || psi ||` over interior rows.
///
/// For smooth states vanishing near the edges this is dominated by the
/// `O(beta0^2)` term left over by the first-order representation, plus the
/// stencil's own discretization error.
pub fn commutator_residual(pair: &GridOperatorPair, test_state: &[C64]) -> Result<f64> {
    if test_state.len() != pair.len() {
        return Err(Error::StateLength {
            got: test_state.len(),
            expected: pair.len(),
        });
    }
    let t_psi = pair.apply_trend(test_state);
    let p_t_psi = pair.apply_position(&t_psi);
    let t_p_psi = pair.apply_trend(&pair.apply_position(test_state));
    let tt_psi = pair.apply_trend(&t_psi);
    let i = C64::new(0.0, 1.0);

    let mut num = 0.0;
    let mut den = 0.0;
    for j in pair.interior() {
        let r = p_t_psi[j] - t_p_psi[j] - i * test_state[j] - i * pair.beta0 * tt_psi[j];
        num += r.norm_sqr();
        den += test_state[j].norm_sqr();
    }
    Ok((num / den).sqrt())
}

/// A point of the price/trend uncertainty plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UncertaintyPoint {
    pub dp: f64,
    pub dt: f64,
    pub beta0: f64,
    pub zeta: f64,
}

impl UncertaintyPoint {
    /// Builds the point with `zeta = beta0 <T>^2`.
    pub fn new(dp: f64, dt: f64, beta0: f64, mean_trend: f64) -> Self {
        UncertaintyPoint {
            dp,
            dt,
            beta0,
            zeta: beta0 * mean_trend * mean_trend,
        }
    }

    /// `dp dt - (1 + beta0 dt^2 + zeta) / 2`; nonnegative when admissible.
    pub fn margin(&self) -> f64 {
        self.dp * self.dt - 0.5 * (1.0 + self.beta0 * self.dt * self.dt + self.zeta)
    }

    /// Admissible up to rounding on the boundary itself.
    pub fn is_admissible(&self) -> bool {
        let scale = self.dp * self.dt + 0.5 * (1.0 + self.beta0 * self.dt * self.dt + self.zeta);
        self.margin() >= -8.0 * f64::EPSILON * scale
    }
}

/// Trend uncertainties on the edge of the allowed region for a given price
/// uncertainty: `dt = dp / beta0 -+ sqrt(dp^2 - (1 + zeta) beta0) / beta0`.
pub fn uncertainty_boundary(dp: f64, beta0: f64, zeta: f64) -> Result<(f64, f64)> {
    if !(beta0 > 0.0) {
        return Err(Error::NonPositiveBeta0(beta0));
    }
    if !(zeta >= 0.0) {
        return Err(Error::Negative {
            field: "zeta",
            value: zeta,
        });
    }
    let floor = (1.0 + zeta) * beta0;
    let dp_sq = dp * dp;
    let mut disc = dp_sq - floor;
    // dp built as sqrt(floor) squares back to within a few ulps of floor
    if disc.abs() <= 4.0 * f64::EPSILON * floor {
        disc = 0.0;
    }
    if disc < 0.0 {
        return Err(Error::NoRealBranch { dp_sq, floor });
    }
    let root = disc.sqrt();
    Ok(((dp - root) / beta0, (dp + root) / beta0))
}

/// Smallest reachable price uncertainty `sqrt((1 + zeta) beta0)` with
/// `zeta = beta0 <T>^2`.
pub fn minimal_price_uncertainty(beta0: f64, mean_trend: f64) -> Result<f64> {
    if !(beta0 >= 0.0) {
        return Err(Error::NegativeBeta(beta0));
    }
    let zeta = beta0 * mean_trend * mean_trend;
    Ok(((1.0 + zeta) * beta0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{validate_params, ModelParams};
    use crate::quadrature::gauss_legendre;
    use crate::spectrum::eigenfunction_value;
    use proptest::prelude::*;

    fn quadrature_dipole(n: usize, k: usize, d: f64) -> f64 {
        let h = d / 2.0;
        gauss_legendre(
            |r| {
                let r = r.clamp(-h, h);
                r * eigenfunction_value(n, r, d).unwrap() * eigenfunction_value(k, r, d).unwrap()
            },
            -h,
            h,
            4096,
        )
    }

    #[test]
    fn first_transition_element() {
        let v = dipole_element(2, 1, 0.2);
        assert!((v + 3.2 / (9.0 * PI * PI)).abs() < 1e-16);
        assert!((v + 0.03603).abs() < 1e-5);
        assert!((quadrature_dipole(2, 1, 0.2) - v).abs() < 1e-12);
        assert_eq!(dipole_element(3, 1, 0.2), 0.0);
        assert_eq!(dipole_element(5, 5, 0.2), 0.0);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let d = 0.2;
        let mut worst: f64 = 0.0;
        for n in 1..=12 {
            for k in 1..=12 {
                worst = worst.max((dipole_element(n, k, d) - quadrature_dipole(n, k, d)).abs());
            }
        }
        assert!(worst <= 1e-10, "{worst}");
    }

    #[test]
    fn matrix_structure() {
        let p = validate_params(&ModelParams {
            d: 0.2,
            n_basis: 16,
            ..ModelParams::default()
        })
        .unwrap();
        let r = dipole_matrix(&p);
        for n in 1..=16 {
            for k in 1..=16 {
                assert_eq!(r.get(n, k), r.get(k, n));
                if (n + k).is_multiple_of(2) {
                    assert_eq!(r.get(n, k), 0.0);
                } else {
                    assert!(r.get(n, k) != 0.0);
                }
            }
            if n % 2 == 0 {
                let nf = n as f64;
                let want = -8.0 * nf * 0.2 / ((nf * nf - 1.0).powi(2) * PI * PI);
                assert!((r.get(n, 1) - want).abs() <= 1e-15 * want.abs());
            }
        }
        assert_eq!(r.row(2).len(), 16);
    }

    #[test]
    fn undeformed_trend_is_canonical() {
        let pair = build_trend_operator(32, 0.0, 4.0).unwrap();
        for i in 0..32 {
            for j in 0..32 {
                assert_eq!(pair.trend.get(i, j), pair.canonical.get(i, j));
            }
        }
        assert!(matches!(
            build_trend_operator(15, 0.0, 1.0),
            Err(Error::GridTooSmall { got: 15, .. })
        ));
    }

    #[test]
    fn trend_acts_on_plane_waves() {
        let beta0 = 1e-2;
        let pair = build_trend_operator(2001, beta0, 10.0).unwrap();
        let h = pair.spacing;
        for q in [0.5, 1.0, 3.0] {
            let psi: Vec<C64> = pair.grid.iter().map(|&x| C64::from_polar(1.0, q * x)).collect();
            let out = pair.apply_trend(&psi);
            let qd = (q * h).sin() / h;
            let exact_stencil = qd * (1.0 + beta0 * qd * qd / 3.0);
            let continuum = q * (1.0 + beta0 * q * q / 3.0);
            for j in pair.interior() {
                let eig = out[j] / psi[j];
                assert!((eig - exact_stencil).norm() < 1e-9 * continuum, "q={q}");
                assert!((eig.re - continuum).abs() < 1e-3 * continuum);
            }
        }
    }

    #[test]
    fn trend_is_hermitian() {
        for beta0 in [0.0, 1e-3, 0.5] {
            let pair = build_trend_operator(200, beta0, 3.0).unwrap();
            assert!(pair.hermiticity_residual() < 1e-10);
        }
    }

    fn gaussian(pair: &GridOperatorPair, sigma: f64) -> Vec<C64> {
        pair.grid
            .iter()
            .map(|&x| C64::new((-x * x / (2.0 * sigma * sigma)).exp(), 0.0))
            .collect()
    }

    #[test]
    fn canonical_commutator_error_is_stencil_sized() {
        let pair = build_trend_operator(4001, 0.0, 8.0).unwrap();
        let psi = gaussian(&pair, 0.5);
        let res = commutator_residual(&pair, &psi).unwrap();
        // [P, -iD] = i * average, off from i by h^2 psi'' / 2
        let h = pair.spacing;
        assert!(res < h * h / (0.5f64 * 0.5), "{res}");
        assert!(matches!(
            commutator_residual(&pair, &psi[1..]),
            Err(Error::StateLength { .. })
        ));
    }

    #[test]
    fn residual_plateau_under_refinement() {
        let beta0 = 1e-2;
        let sigma = 0.3;
        let mut last = f64::NAN;
        let mut values = Vec::new();
        for n in [3001, 6001, 12001] {
            let pair = build_trend_operator(n, beta0, 4.8).unwrap();
            values.push(commutator_residual(&pair, &gaussian(&pair, sigma)).unwrap());
        }
        for v in &values {
            if last.is_finite() {
                assert!((v - last).abs() < 0.05 * v);
            }
            last = *v;
        }
        // residual * 3 / (2 beta0^2) approximates ||psi''''|| / ||psi|| = sqrt(105)/(4 sigma^4)
        let want = (2.0 / 3.0) * beta0 * beta0 * 105f64.sqrt() / (4.0 * sigma.powi(4));
        assert!((last - want).abs() < 0.15 * want, "{last} vs {want}");
    }

    #[test]
    fn boundary_examples() {
        let beta0 = 1e-4;
        let zeta = 0.3;
        let dp = minimal_price_uncertainty(beta0, (zeta / beta0).sqrt()).unwrap();
        let (lo, hi) = uncertainty_boundary(dp, beta0, zeta).unwrap();
        assert_eq!(lo, hi);
        assert!((lo - dp / beta0).abs() < 1e-12 * lo);

        assert!(matches!(
            uncertainty_boundary(0.9 * (1.3f64 * beta0).sqrt(), beta0, zeta),
            Err(Error::NoRealBranch { .. })
        ));
        assert!(matches!(
            uncertainty_boundary(1.0, 0.0, 0.0),
            Err(Error::NonPositiveBeta0(_))
        ));

        let (lo, hi) = uncertainty_boundary(2.0 * beta0.sqrt(), beta0, 0.0).unwrap();
        let s = beta0.sqrt();
        assert!((lo - (2.0 - 3f64.sqrt()) / s).abs() < 1e-9 * hi);
        assert!((hi - (2.0 + 3f64.sqrt()) / s).abs() < 1e-9 * hi);
        for dt in [lo, hi] {
            let point = UncertaintyPoint::new(2.0 * s, dt, beta0, 0.0);
            assert!(point.margin().abs() < 1e-9);
            assert!(point.is_admissible());
        }
        assert!(UncertaintyPoint::new(2.0 * s, (lo + hi) / 2.0, beta0, 0.0).is_admissible());
        assert!(!UncertaintyPoint::new(2.0 * s, hi * 2.0, beta0, 0.0).is_admissible());
    }

    #[test]
    fn minimal_uncertainty_values() {
        assert!((minimal_price_uncertainty(1e-4, 0.0).unwrap() - 0.01).abs() < 1e-15);
        assert_eq!(minimal_price_uncertainty(0.0, 123.0).unwrap(), 0.0);
        let v = minimal_price_uncertainty(1e-4, 100.0).unwrap();
        assert!((v - 2e-4f64.sqrt()).abs() < 1e-15);
        assert!((v - 0.01414).abs() < 1e-5);
        assert!(minimal_price_uncertainty(-1.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn minimal_uncertainty_monotone(
            b1 in 0.0f64..1e-2, b2 in 0.0f64..1e-2,
            t1 in -50.0f64..50.0, t2 in -50.0f64..50.0,
        ) {
            let (blo, bhi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
            let (tlo, thi) = if t1.abs() <= t2.abs() { (t1, t2) } else { (t2, t1) };
            prop_assert!(minimal_price_uncertainty(bhi, t1).unwrap() >= minimal_price_uncertainty(blo, t1).unwrap());
            prop_assert!(minimal_price_uncertainty(b1, thi).unwrap() >= minimal_price_uncertainty(b1, tlo).unwrap());
        }

        #[test]
        fn branches_meet_at_minimum(beta0 in 1e-8f64..1.0, trend in -1e3f64..1e3) {
            let dp = minimal_price_uncertainty(beta0, trend).unwrap();
            let zeta = beta0 * trend * trend;
            let (lo, hi) = uncertainty_boundary(dp, beta0, zeta).unwrap();
            prop_assert_eq!(lo, hi);
        }

        #[test]
        fn parity_selection(n in 1usize..200, k in 1usize..200, d in 1e-3f64..10.0) {
            let v = dipole_element(n, k, d);
            prop_assert_eq!(v == 0.0, (n + k) % 2 == 0);
            prop_assert_eq!(v, dipole_element(k, n, d));
        }
    }
}
