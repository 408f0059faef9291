//! Model parameters shared by every other module.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Basis size used when none is configured.
pub const DEFAULT_N_BASIS: usize = 64;

/// Largest tolerated value of the dimensionless quartic correction at the top
/// retained level before the first-order warning is raised.
pub const FIRST_ORDER_WARN_THRESHOLD: f64 = 0.1;

/// Seconds in one trading session (09:30-11:30 and 13:00-15:00 on the
/// Shanghai and Shenzhen exchanges).
pub const SECONDS_PER_TRADING_DAY: f64 = 4.0 * 3600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnit {
    Second,
    TradingDay,
}

impl TimeUnit {
    /// Length of one unit in seconds.
    pub fn seconds(self) -> f64 {
        match self {
            TimeUnit::Second => 1.0,
            TimeUnit::TradingDay => SECONDS_PER_TRADING_DAY,
        }
    }

    /// Multiplier taking a duration expressed in `self` to one expressed in `to`.
    pub fn duration_factor(self, to: TimeUnit) -> f64 {
        self.seconds() / to.seconds()
    }
}

/// Parameters of the driven well in the return coordinate, with `hbar = 1`.
///
/// Energies and frequencies are in inverse `time_unit`; `m` carries units of
/// `time_unit` per squared return.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub m: f64,
    pub beta: f64,
    pub d: f64,
    pub lambda: f64,
    pub omega: f64,
    pub n_basis: usize,
    pub time_unit: TimeUnit,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            m: 1.0,
            beta: 0.0,
            d: 1.0,
            lambda: 0.0,
            omega: 0.0,
            n_basis: DEFAULT_N_BASIS,
            time_unit: TimeUnit::TradingDay,
        }
    }
}

impl ModelParams {
    /// Dimensionless quartic-to-quadratic scale at the highest retained level,
    /// `beta * pi^2 * n_basis^2 / d^2`.
    pub fn first_order_ratio(&self) -> f64 {
        let n = self.n_basis as f64;
        self.beta * PI * PI * n * n / (self.d * self.d)
    }

    /// The same physical model expressed in another time unit. Lengths in
    /// return units are unchanged; rates scale inversely with the unit.
    pub fn in_unit(&self, unit: TimeUnit) -> ModelParams {
        // one old unit = k new units
        let k = self.time_unit.duration_factor(unit);
        ModelParams {
            m: self.m * k,
            lambda: self.lambda / k,
            omega: self.omega / k,
            time_unit: unit,
            ..*self
        }
    }
}

/// Parameters that passed [`validate_params`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidatedParams {
    params: ModelParams,
    first_order_warning: bool,
}

impl ValidatedParams {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn first_order_warning(&self) -> bool {
        self.first_order_warning
    }

    pub fn m(&self) -> f64 {
        self.params.m
    }

    pub fn beta(&self) -> f64 {
        self.params.beta
    }

    pub fn d(&self) -> f64 {
        self.params.d
    }

    pub fn lambda(&self) -> f64 {
        self.params.lambda
    }

    pub fn omega(&self) -> f64 {
        self.params.omega
    }

    pub fn n_basis(&self) -> usize {
        self.params.n_basis
    }

    pub fn time_unit(&self) -> TimeUnit {
        self.params.time_unit
    }

    /// Copy with a different drive; the drive does not enter the warning.
    pub fn with_drive(&self, lambda: f64, omega: f64) -> Result<ValidatedParams> {
        validate_params(&ModelParams {
            lambda,
            omega,
            ..self.params
        })
    }

    pub fn with_n_basis(&self, n_basis: usize) -> Result<ValidatedParams> {
        validate_params(&ModelParams {
            n_basis,
            ..self.params
        })
    }

    pub fn in_unit(&self, unit: TimeUnit) -> Result<ValidatedParams> {
        validate_params(&self.params.in_unit(unit))
    }
}

fn finite(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonPositive { field, value })
    }
}

pub fn validate_params(p: &ModelParams) -> Result<ValidatedParams> {
    if !(finite("m", p.m)? > 0.0) {
        return Err(Error::NonPositive {
            field: "m",
            value: p.m,
        });
    }
    if !(finite("d", p.d)? > 0.0) {
        return Err(Error::NonPositive {
            field: "d",
            value: p.d,
        });
    }
    if finite("beta", p.beta)? < 0.0 {
        return Err(Error::NegativeBeta(p.beta));
    }
    for (field, value) in [("lambda", p.lambda), ("omega", p.omega)] {
        if finite(field, value)? < 0.0 {
            return Err(Error::Negative { field, value });
        }
    }
    if p.n_basis < 2 {
        return Err(Error::BasisTooSmall(p.n_basis));
    }
    Ok(ValidatedParams {
        params: *p,
        first_order_warning: p.first_order_ratio() > FIRST_ORDER_WARN_THRESHOLD,
    })
}

/// Basis coefficients `c_n`, `n = 1..=len`, at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveState {
    pub coeffs: Vec<C64>,
    pub t: f64,
}

impl WaveState {
    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Coefficient of level `n` (1-based).
    pub fn coeff(&self, n: usize) -> Option<C64> {
        n.checked_sub(1).and_then(|i| self.coeffs.get(i)).copied()
    }
}

/// The unperturbed ground state, `c_n = delta_{1n}` at `t = 0`.
pub fn ground_state(n_basis: usize) -> Result<WaveState> {
    if n_basis < 2 {
        return Err(Error::BasisTooSmall(n_basis));
    }
    let mut coeffs = vec![C64::new(0.0, 0.0); n_basis];
    coeffs[0] = C64::new(1.0, 0.0);
    Ok(WaveState { coeffs, t: 0.0 })
}
