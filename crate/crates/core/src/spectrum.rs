//! Eigenpairs of the hard-wall well with the quartic trend correction.
//!
//! `phi_n(r) = sqrt(2/d) sin(n pi (r + d/2) / d)` is an exact eigenfunction of
//! both `d^2/dr^2` and `d^4/dr^4` under the wall conditions, so the corrected
//! levels are available in closed form:
//!
//! `E_n = n^2 pi^2 / (2 m d^2) + beta n^4 pi^4 / (3 m d^4)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ValidatedParams;

pub fn eigenfunction_value(n: usize, r: f64, d: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::LevelOutOfRange {
            n,
            min: 1,
            max: usize::MAX,
        });
    }
    let half = 0.5 * d;
    if !(r.abs() <= half) {
        return Err(Error::OutOfWell {
            r,
            half_width: half,
        });
    }
    // exact zeros on the walls
    if r.abs() == half {
        return Ok(0.0);
    }
    Ok((2.0 / d).sqrt() * (n as f64 * PI * (r + half) / d).sin())
}

fn check_level(n: usize, p: &ValidatedParams) -> Result<()> {
    if n < 1 || n > p.n_basis() {
        return Err(Error::LevelOutOfRange {
            n,
            min: 1,
            max: p.n_basis(),
        });
    }
    Ok(())
}

/// Uncorrected level `n^2 pi^2 / (2 m d^2)`.
pub fn uncorrected_energy(n: usize, p: &ValidatedParams) -> f64 {
    let k = n as f64 * PI / p.d();
    k * k / (2.0 * p.m())
}

/// Quartic correction `beta n^4 pi^4 / (3 m d^4)`; never negative.
pub fn quartic_correction(n: usize, p: &ValidatedParams) -> f64 {
    let k = n as f64 * PI / p.d();
    p.beta() * k * k * k * k / (3.0 * p.m())
}

pub fn energy_level(n: usize, p: &ValidatedParams) -> Result<f64> {
    check_level(n, p)?;
    Ok(uncorrected_energy(n, p) + quartic_correction(n, p))
}

/// Transition frequency from the ground level in the continuum-price limit,
/// `pi^2 (n^2 - 1) / (2 m d^2)`.
pub fn continuum_frequency(n: usize, p: &ValidatedParams) -> Result<f64> {
    check_transition(n, p)?;
    let nn = (n * n - 1) as f64;
    Ok(PI * PI * nn / (2.0 * p.m() * p.d() * p.d()))
}

fn check_transition(n: usize, p: &ValidatedParams) -> Result<()> {
    if n < 2 || n > p.n_basis() {
        return Err(Error::LevelOutOfRange {
            n,
            min: 2,
            max: p.n_basis(),
        });
    }
    Ok(())
}

/// `omega_n = E_n - E_1`, the drive frequency that resonantly empties the
/// ground level into level `n`.
pub fn characteristic_frequency(n: usize, p: &ValidatedParams) -> Result<f64> {
    check_transition(n, p)?;
    Ok(energy_level(n, p)? - energy_level(1, p)?)
}

/// The same frequency written as a shift of the continuum value:
/// `omega0 * (1 + (4/3) beta m (n^2 + 1)/(n^2 - 1) * omega0)`.
pub fn shifted_frequency(n: usize, p: &ValidatedParams) -> Result<f64> {
    let w0 = continuum_frequency(n, p)?;
    let n2 = (n * n) as f64;
    Ok(w0 * (1.0 + 4.0 / 3.0 * p.beta() * p.m() * (n2 + 1.0) / (n2 - 1.0) * w0))
}

/// Upward displacement `omega_n - omega0_n` caused by the quartic term.
pub fn frequency_shift(n: usize, p: &ValidatedParams) -> Result<f64> {
    let w0 = continuum_frequency(n, p)?;
    let n2 = (n * n) as f64;
    Ok(4.0 / 3.0 * p.beta() * p.m() * (n2 + 1.0) / (n2 - 1.0) * w0 * w0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub n: usize,
    pub e0: f64,
    pub e1: f64,
    pub energy: f64,
    /// Zero for the ground level.
    pub omega0: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub params: ValidatedParams,
    pub energies: Vec<f64>,
    pub e0: Vec<f64>,
    pub e1: Vec<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Energy of level `n` (1-based).
    pub fn energy(&self, n: usize) -> f64 {
        self.energies[n - 1]
    }

    pub fn rows(&self) -> Vec<SpectrumRow> {
        let p = &self.params;
        (1..=self.len())
            .map(|n| {
                let omega0 = if n == 1 {
                    0.0
                } else {
                    continuum_frequency(n, p).expect("level in range")
                };
                // continuum part plus the correction difference, so that
                // beta = 0 reproduces omega0 bit for bit
                let omega = if n == 1 {
                    0.0
                } else {
                    omega0 + (self.e1[n - 1] - self.e1[0])
                };
                SpectrumRow {
                    n,
                    e0: self.e0[n - 1],
                    e1: self.e1[n - 1],
                    energy: self.energies[n - 1],
                    omega0,
                    omega,
                }
            })
            .collect()
    }
}

pub fn spectrum_table(p: &ValidatedParams) -> Spectrum {
    let n_max = p.n_basis();
    let e0: Vec<f64> = (1..=n_max).map(|n| uncorrected_energy(n, p)).collect();
    let e1: Vec<f64> = (1..=n_max).map(|n| quartic_correction(n, p)).collect();
    let energies = e0.iter().zip(&e1).map(|(a, b)| a + b).collect();
    Spectrum {
        params: *p,
        energies,
        e0,
        e1,
    }
}
