//! Driven dynamics under `H(t) = H_well + lambda * r * cos(omega t)`.
//!
//! Coefficients are stored in the interaction picture,
//! `psi(r, t) = sum_n c_n(t) exp(-i E_n t) phi_n(r)`, for both the first-order
//! closed form and the numerical propagator, so the two are directly
//! comparable.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{dipole_element, dipole_matrix};
use crate::params::{ground_state, ValidatedParams, WaveState};
use crate::quadrature::{adaptive_gk, gauss_legendre_nodes};
use crate::spectrum::{characteristic_frequency, eigenfunction_value, spectrum_table};
use crate::C64;

/// Relative width, in units of `E_2 - E_1`, inside which a denominator of the
/// first-order amplitude is treated as exactly resonant.
pub const RESONANCE_GUARD: f64 = 1e-8;

/// Largest tolerated `| sum |c_n|^2 - 1 |` on a numerical trajectory.
pub const NORM_DRIFT_BOUND: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PerturbativeFirstOrder,
    Numerical,
}

#[derive(Debug, Clone, Serialize)]
pub struct AmplitudeTrajectory {
    pub times: Vec<f64>,
    /// `coeffs[i][n - 1]` is `c_n(times[i])`.
    pub coeffs: Vec<Vec<C64>>,
    pub method: Method,
    pub params: ValidatedParams,
    /// Largest deviation of the squared norm from its initial value.
    pub max_norm_drift: f64,
}

impl AmplitudeTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn norm_sqr(&self, i: usize) -> f64 {
        self.coeffs[i].iter().map(|c| c.norm_sqr()).sum()
    }

    /// Probability outside the ground level, `sum_{n > 1} |c_n|^2`.
    pub fn excited_probability(&self, i: usize) -> f64 {
        self.coeffs[i][1..].iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn max_excited_probability(&self) -> f64 {
        (0..self.len())
            .map(|i| self.excited_probability(i))
            .fold(0.0, f64::max)
    }

    pub fn state(&self, i: usize) -> WaveState {
        WaveState {
            coeffs: self.coeffs[i].clone(),
            t: self.times[i],
        }
    }
}

/// `(exp(i delta t) - 1) / delta`, replaced by its limit `i t` near a pole.
fn ramp(delta: f64, t: f64, guard: f64) -> C64 {
    if delta.abs() < guard {
        return C64::new(0.0, t);
    }
    let x = delta * t;
    let half = (0.5 * x).sin();
    C64::new(-2.0 * half * half, x.sin()) / delta
}

/// Precomputed first-order coefficients for every level of a basis.
struct FirstOrder {
    // -lambda <n|r|1> / 2, zero for odd n
    prefactor: Vec<f64>,
    gaps: Vec<f64>,
    omega: f64,
    guard: f64,
}

impl FirstOrder {
    fn new(p: &ValidatedParams) -> Self {
        let spectrum = spectrum_table(p);
        let ground = spectrum.energy(1);
        let gaps = spectrum.energies.iter().map(|e| e - ground).collect();
        let prefactor = (1..=p.n_basis())
            .map(|n| {
                if n == 1 {
                    0.0
                } else {
                    -0.5 * p.lambda() * dipole_element(n, 1, p.d())
                }
            })
            .collect();
        let guard = RESONANCE_GUARD * (spectrum.energy(2) - ground);
        FirstOrder {
            prefactor,
            gaps,
            omega: p.omega(),
            guard,
        }
    }

    fn amplitude(&self, n: usize, t: f64) -> C64 {
        let pref = self.prefactor[n - 1];
        if pref == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let gap = self.gaps[n - 1];
        (ramp(gap + self.omega, t, self.guard) + ramp(gap - self.omega, t, self.guard)) * pref
    }

    fn excited(&self, t: f64) -> f64 {
        (2..=self.prefactor.len())
            .step_by(2)
            .map(|n| self.amplitude(n, t).norm_sqr())
            .sum()
    }
}

fn check_excited_level(n: usize, p: &ValidatedParams) -> Result<()> {
    if n < 2 || n > p.n_basis() {
        return Err(Error::LevelOutOfRange {
            n,
            min: 2,
            max: p.n_basis(),
        });
    }
    Ok(())
}

/// First-order amplitude `c_n^(1)(t)` out of the ground level.
pub fn first_order_amplitude(n: usize, t: f64, p: &ValidatedParams) -> Result<C64> {
    check_excited_level(n, p)?;
    Ok(FirstOrder::new(p).amplitude(n, t))
}

/// The first-order Dyson integral
/// `-i lambda <n|r|1> int_0^t cos(omega s) exp(i (E_n - E_1) s) ds`
/// evaluated by adaptive quadrature instead of in closed form.
pub fn dyson_first_order_numeric(n: usize, t: f64, p: &ValidatedParams) -> Result<C64> {
    check_excited_level(n, p)?;
    let coupling = dipole_element(n, 1, p.d());
    if coupling == 0.0 || t == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let gap = characteristic_frequency(n, p)?;
    let omega = p.omega();
    let fastest = gap + omega;
    let panels = ((t.abs() * fastest / (2.0 * PI)).ceil() as usize).clamp(1, 1 << 20) + 1;
    let integral = adaptive_gk(
        |s| C64::from_polar((omega * s).cos(), gap * s),
        0.0,
        t,
        panels,
        1e-14 * t.abs(),
        1e-12,
        1 << 22,
    )?;
    Ok(C64::new(0.0, -p.lambda() * coupling) * integral)
}

/// Uniform output sampling: `samples + 1` instants from `0` to `t_final`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sampling {
    pub samples: usize,
}

impl Sampling {
    pub fn uniform(samples: usize) -> Self {
        Sampling { samples }
    }

    fn times(&self, t_final: f64) -> Result<Vec<f64>> {
        if self.samples == 0 {
            return Err(Error::InvalidSampling("need at least one sample interval".into()));
        }
        if !(t_final > 0.0) || !t_final.is_finite() {
            return Err(Error::NonPositive {
                field: "t_final",
                value: t_final,
            });
        }
        let dt = t_final / self.samples as f64;
        Ok((0..=self.samples)
            .map(|k| if k == self.samples { t_final } else { k as f64 * dt })
            .collect())
    }
}

/// First-order trajectory out of the ground state: `c_1 = 1`,
/// `c_n = c_n^(1)(t)` for `n > 1`.
pub fn perturbative_trajectory(
    p: &ValidatedParams,
    t_final: f64,
    sampling: Sampling,
) -> Result<AmplitudeTrajectory> {
    let times = sampling.times(t_final)?;
    let first = FirstOrder::new(p);
    let coeffs = times
        .iter()
        .map(|&t| {
            (1..=p.n_basis())
                .map(|n| {
                    if n == 1 {
                        C64::new(1.0, 0.0)
                    } else {
                        first.amplitude(n, t)
                    }
                })
                .collect()
        })
        .collect();
    Ok(AmplitudeTrajectory {
        times,
        coeffs,
        method: Method::PerturbativeFirstOrder,
        params: *p,
        max_norm_drift: 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropagatorOptions {
    /// Bound on the estimated error of the state vector over one output
    /// interval.
    pub tolerance: f64,
    pub max_substeps: usize,
}

impl Default for PropagatorOptions {
    fn default() -> Self {
        PropagatorOptions {
            tolerance: 1e-10,
            max_substeps: 1 << 22,
        }
    }
}

/// Symmetric splitting of the well evolution and the dipole kick, composed
/// into a fourth-order step. Both factors are exact exponentials of Hermitian
/// pieces, so every step is unitary up to rounding.
struct SplitStepper {
    energies: Vec<f64>,
    // R = U diag(kick) U^T, U stored row-major
    basis: Vec<f64>,
    kick: Vec<f64>,
    lambda: f64,
    omega: f64,
    scratch: Vec<C64>,
}

impl SplitStepper {
    fn new(p: &ValidatedParams) -> Self {
        let dim = p.n_basis();
        let dipole = dipole_matrix(p);
        let eig = SymmetricEigen::new(DMatrix::from_row_slice(dim, dim, &dipole.entries));
        let basis = (0..dim)
            .flat_map(|i| (0..dim).map(move |j| (i, j)))
            .map(|(i, j)| eig.eigenvectors[(i, j)])
            .collect();
        SplitStepper {
            energies: spectrum_table(p).energies,
            basis,
            kick: eig.eigenvalues.iter().copied().collect(),
            lambda: p.lambda(),
            omega: p.omega(),
            scratch: vec![C64::new(0.0, 0.0); dim],
        }
    }

    fn drift(&self, a: &mut [C64], h: f64) {
        for (c, e) in a.iter_mut().zip(&self.energies) {
            *c *= C64::from_polar(1.0, -e * h);
        }
    }

    fn kick(&mut self, a: &mut [C64], h: f64, t: f64) {
        let strength = self.lambda * (self.omega * t).cos() * h;
        if strength == 0.0 {
            return;
        }
        let dim = a.len();
        for j in 0..dim {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..dim {
                acc += a[i] * self.basis[i * dim + j];
            }
            // e^{-i theta} - 1, so that U U^T never enters and its roundoff
            // cannot bias the norm
            let half = 0.5 * strength * self.kick[j];
            let phase_m1 = C64::new(-2.0 * half.sin().powi(2), -(2.0 * half).sin());
            self.scratch[j] = acc * phase_m1;
        }
        for i in 0..dim {
            let row = &self.basis[i * dim..(i + 1) * dim];
            a[i] += row.iter().zip(&self.scratch).map(|(u, s)| s * u).sum::<C64>();
        }
    }

    fn strang(&mut self, a: &mut [C64], t: f64, h: f64) {
        self.drift(a, 0.5 * h);
        self.kick(a, h, t + 0.5 * h);
        self.drift(a, 0.5 * h);
    }

    fn step(&mut self, a: &mut [C64], t: f64, h: f64) {
        let cbrt2 = 2f64.cbrt();
        let outer = 1.0 / (2.0 - cbrt2);
        let inner = 1.0 - 2.0 * outer;
        self.strang(a, t, outer * h);
        self.strang(a, t + outer * h, inner * h);
        self.strang(a, t + (outer + inner) * h, outer * h);
    }

    fn advance(&mut self, a: &[C64], t0: f64, t1: f64, substeps: usize) -> Vec<C64> {
        let mut out = a.to_vec();
        let h = (t1 - t0) / substeps as f64;
        for k in 0..substeps {
            self.step(&mut out, t0 + k as f64 * h, h);
        }
        out
    }
}

pub fn propagate(p: &ValidatedParams, t_final: f64, sampling: Sampling) -> Result<AmplitudeTrajectory> {
    let initial = ground_state(p.n_basis())?;
    propagate_from(p, &initial, t_final, sampling, PropagatorOptions::default())
}

/// Integrates `i dc/dt = H(t) c` in the truncated eigenbasis from `initial`
/// (taken at `t = 0`).
///
/// Each output interval is integrated with `k` and `2k` substeps, doubling `k`
/// until the Richardson estimate of the finer result is below
/// `options.tolerance`.
pub fn propagate_from(
    p: &ValidatedParams,
    initial: &WaveState,
    t_final: f64,
    sampling: Sampling,
    options: PropagatorOptions,
) -> Result<AmplitudeTrajectory> {
    if initial.coeffs.len() != p.n_basis() {
        return Err(Error::StateLength {
            got: initial.coeffs.len(),
            expected: p.n_basis(),
        });
    }
    let times = sampling.times(t_final)?;
    let mut stepper = SplitStepper::new(p);
    // Schrodinger-picture amplitudes
    let mut state = initial.coeffs.clone();
    let norm0: f64 = state.iter().map(|c| c.norm_sqr()).sum();
    let mut substeps = 1usize;
    let mut coeffs = Vec::with_capacity(times.len());
    let mut max_drift = 0.0f64;

    let to_interaction = |a: &[C64], t: f64, energies: &[f64]| -> Vec<C64> {
        a.iter()
            .zip(energies)
            .map(|(c, e)| c * C64::from_polar(1.0, e * t))
            .collect()
    };
    coeffs.push(to_interaction(&state, 0.0, &stepper.energies));

    for w in times.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let mut coarse = stepper.advance(&state, t0, t1, substeps);
        loop {
            let fine = stepper.advance(&state, t0, t1, 2 * substeps);
            let err = coarse
                .iter()
                .zip(&fine)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
                / 15.0;
            if err <= options.tolerance {
                state = fine;
                if err < options.tolerance / 64.0 && substeps > 1 {
                    substeps /= 2;
                }
                break;
            }
            substeps *= 2;
            if 2 * substeps > options.max_substeps {
                return Err(Error::StepFailure {
                    t0,
                    t1,
                    error: err,
                    substeps,
                });
            }
            coarse = fine;
        }
        let norm: f64 = state.iter().map(|c| c.norm_sqr()).sum();
        max_drift = max_drift.max((norm - norm0).abs());
        coeffs.push(to_interaction(&state, t1, &stepper.energies));
    }

    if max_drift > NORM_DRIFT_BOUND {
        return Err(Error::UnitarityViolation {
            drift: max_drift,
            bound: NORM_DRIFT_BOUND,
        });
    }
    Ok(AmplitudeTrajectory {
        times,
        coeffs,
        method: Method::Numerical,
        params: *p,
        max_norm_drift: max_drift,
    })
}

/// `|psi(r, t)|^2` sampled on a grid, one row per trajectory instant.
#[derive(Debug, Clone, Serialize)]
pub struct DensityTable {
    pub r: Vec<f64>,
    pub times: Vec<f64>,
    pub density: Vec<Vec<f64>>,
}

impl DensityTable {
    /// Largest `|rho(r, t) - rho(r, 0)|` relative to the peak of `rho(., 0)`.
    pub fn shape_drift(&self) -> f64 {
        let first = &self.density[0];
        let peak = first.iter().copied().fold(0.0, f64::max);
        self.density
            .iter()
            .flat_map(|row| row.iter().zip(first).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
            / peak
    }
}

fn check_in_well(r: f64, d: f64) -> Result<()> {
    if !(r.abs() <= 0.5 * d) {
        return Err(Error::OutOfWell {
            r,
            half_width: 0.5 * d,
        });
    }
    Ok(())
}

/// Schrodinger-picture amplitudes `c_n exp(-i E_n t)`.
fn lab_amplitudes(coeffs: &[C64], t: f64, energies: &[f64]) -> Vec<C64> {
    coeffs
        .iter()
        .zip(energies)
        .map(|(c, e)| c * C64::from_polar(1.0, -e * t))
        .collect()
}

fn basis_samples(r: &[f64], dim: usize, d: f64) -> Result<Vec<Vec<f64>>> {
    r.iter()
        .map(|&x| (1..=dim).map(|n| eigenfunction_value(n, x, d)).collect())
        .collect()
}

pub fn density_evolution(traj: &AmplitudeTrajectory, r_grid: &[f64]) -> Result<DensityTable> {
    let p = &traj.params;
    for &r in r_grid {
        check_in_well(r, p.d())?;
    }
    let energies = spectrum_table(p).energies;
    let phi = basis_samples(r_grid, p.n_basis(), p.d())?;
    let density = traj
        .times
        .iter()
        .zip(&traj.coeffs)
        .map(|(&t, c)| {
            let amps = lab_amplitudes(c, t, &energies);
            phi.iter()
                .map(|row| {
                    row.iter()
                        .zip(&amps)
                        .map(|(f, a)| a * f)
                        .sum::<C64>()
                        .norm_sqr()
                })
                .collect()
        })
        .collect();
    Ok(DensityTable {
        r: r_grid.to_vec(),
        times: traj.times.clone(),
        density,
    })
}

/// `P(t) = int_a^b |psi(r, t)|^2 dr` at every trajectory instant.
pub fn interval_probability(traj: &AmplitudeTrajectory, a: f64, b: f64) -> Result<Vec<f64>> {
    let p = &traj.params;
    check_in_well(a, p.d())?;
    check_in_well(b, p.d())?;
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let panels = 16 + (8.0 * p.n_basis() as f64 * (hi - lo) / p.d()).ceil() as usize;
    let (nodes, weights) = gauss_legendre_nodes(lo, hi, panels);
    let nodes: Vec<f64> = nodes.iter().map(|x| x.clamp(lo, hi)).collect();
    let phi = basis_samples(&nodes, p.n_basis(), p.d())?;
    let energies = spectrum_table(p).energies;
    let sign = if a <= b { 1.0 } else { -1.0 };
    Ok(traj
        .times
        .iter()
        .zip(&traj.coeffs)
        .map(|(&t, c)| {
            let amps = lab_amplitudes(c, t, &energies);
            sign * phi
                .iter()
                .zip(&weights)
                .map(|(row, w)| {
                    w * row
                        .iter()
                        .zip(&amps)
                        .map(|(f, a)| a * f)
                        .sum::<C64>()
                        .norm_sqr()
                })
                .sum::<f64>()
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanSpec {
    pub omega_min: f64,
    pub omega_max: f64,
    pub steps: usize,
    pub t_horizon: f64,
    /// Sample intervals on `[0, t_horizon]` over which the peak is taken.
    pub time_samples: usize,
    /// Use the numerical propagator instead of first-order amplitudes.
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResonancePeak {
    /// Level whose characteristic frequency is nearest.
    pub n: usize,
    pub omega_peak: f64,
    pub omega_ref: f64,
    pub peak_prob: f64,
    /// `(omega_peak - omega_ref) / grid step`.
    pub offset_steps: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResonanceScanResult {
    pub omegas: Vec<f64>,
    pub peak_prob: Vec<f64>,
    pub located_peaks: Vec<ResonancePeak>,
    /// `(n, omega_n)` for `n = 2..=n_basis`.
    pub reference: Vec<(usize, f64)>,
    pub step: f64,
    pub spec: ScanSpec,
}

impl ResonanceScanResult {
    /// The located peak with the largest depletion.
    pub fn dominant_peak(&self) -> Option<&ResonancePeak> {
        self.located_peaks
            .iter()
            .max_by(|a, b| a.peak_prob.total_cmp(&b.peak_prob))
    }
}

fn check_scan(spec: &ScanSpec) -> Result<()> {
    if spec.steps < 3 {
        return Err(Error::InvalidScan(format!(
            "steps must be at least 3 (got {})",
            spec.steps
        )));
    }
    if !(spec.omega_min > 0.0) || !(spec.omega_max > spec.omega_min) || !spec.omega_max.is_finite() {
        return Err(Error::InvalidScan(format!(
            "need 0 < omega_min < omega_max (got {} .. {})",
            spec.omega_min, spec.omega_max
        )));
    }
    if !(spec.t_horizon > 0.0) || !spec.t_horizon.is_finite() {
        return Err(Error::InvalidScan(format!(
            "t_horizon must be positive (got {})",
            spec.t_horizon
        )));
    }
    if spec.time_samples == 0 {
        return Err(Error::InvalidScan("time_samples must be positive".into()));
    }
    Ok(())
}

/// Peak ground-level depletion `max_t sum_{n > 1} |c_n(t)|^2` across a grid
/// of drive frequencies, with local maxima matched to the nearest
/// characteristic frequency.
pub fn resonance_scan(p: &ValidatedParams, spec: &ScanSpec) -> Result<ResonanceScanResult> {
    check_scan(spec)?;
    let step = (spec.omega_max - spec.omega_min) / (spec.steps - 1) as f64;
    let omegas: Vec<f64> = (0..spec.steps)
        .map(|i| {
            if i + 1 == spec.steps {
                spec.omega_max
            } else {
                spec.omega_min + i as f64 * step
            }
        })
        .collect();
    let times = Sampling::uniform(spec.time_samples).times(spec.t_horizon)?;

    let peak_prob = omegas
        .par_iter()
        .map(|&omega| {
            let driven = p.with_drive(p.lambda(), omega)?;
            if spec.exact {
                let traj = propagate(&driven, spec.t_horizon, Sampling::uniform(spec.time_samples))?;
                Ok(traj.max_excited_probability())
            } else {
                let first = FirstOrder::new(&driven);
                Ok(times.iter().map(|&t| first.excited(t)).fold(0.0, f64::max))
            }
        })
        .collect::<Result<Vec<f64>>>()?;

    let reference: Vec<(usize, f64)> = (2..=p.n_basis())
        .map(|n| Ok((n, characteristic_frequency(n, p)?)))
        .collect::<Result<_>>()?;

    let mut located_peaks = Vec::new();
    for i in 1..omegas.len() - 1 {
        if peak_prob[i] > peak_prob[i - 1] && peak_prob[i] >= peak_prob[i + 1] {
            let omega_peak = omegas[i];
            let &(n, omega_ref) = reference
                .iter()
                .min_by(|a, b| (a.1 - omega_peak).abs().total_cmp(&(b.1 - omega_peak).abs()))
                .expect("basis has an excited level");
            located_peaks.push(ResonancePeak {
                n,
                omega_peak,
                omega_ref,
                peak_prob: peak_prob[i],
                offset_steps: (omega_peak - omega_ref) / step,
            });
        }
    }

    Ok(ResonanceScanResult {
        omegas,
        peak_prob,
        located_peaks,
        reference,
        step,
        spec: *spec,
    })
}
