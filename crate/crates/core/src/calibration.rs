//! From market observables to model parameters.
//!
//! The chain is: annual volatility -> daily volatility (252 sessions per year)
//! -> mass `m = sigma_daily^-2` in the return coordinate; tick size ->
//! `beta0 = tick^2` in price units and `beta = beta0 / mean_price^2` in return
//! units; daily price limit -> well width `d = 2 * limit_fraction`.

use std::f64::consts::PI;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{validate_params, ModelParams, TimeUnit, ValidatedParams, DEFAULT_N_BASIS,
    SECONDS_PER_TRADING_DAY};

pub const TRADING_DAYS_PER_YEAR: f64 = 252.0;

/// Published reference constants for the Chinese A-share market.
pub mod reference {
    /// Quoted return-coordinate mass.
    pub const MASS: f64 = 3e3;
    /// Quoted coefficient of `(n^2 - 1)` in the continuum frequencies, per second.
    pub const OMEGA0_COEFF_PER_SECOND: f64 = 4e-3;
    /// Quoted prefactor of the frequency shift, `(4/3) beta m`.
    pub const SHIFT_PREFACTOR: f64 = 4e-3;
    /// Quoted drive period above which no large transition occurs, minutes.
    pub const SLOW_DRIVE_MINUTES: f64 = 25.0;
    pub const MEAN_PRICE: f64 = 10.0;
    pub const TICK: f64 = 0.01;
    pub const LIMIT_FRACTION: f64 = 0.10;
    /// Annual volatility quoted as "0.3%"; read as the fraction 0.3.
    pub const SIGMA_ANNUAL: f64 = 0.3;
}

/// How an annual volatility figure is quoted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolatilityQuote {
    /// The number is the fraction itself (0.3 means 30%).
    #[default]
    Fraction,
    /// The number is in percent (0.3 means 0.003).
    Percent,
}

impl VolatilityQuote {
    pub fn to_fraction(self, value: f64) -> f64 {
        match self {
            VolatilityQuote::Fraction => value,
            VolatilityQuote::Percent => value / 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketInputs {
    pub sigma_annual: f64,
    #[serde(default)]
    pub quote: VolatilityQuote,
    pub mean_price: f64,
    pub tick: f64,
    pub limit_fraction: f64,
}

impl Default for MarketInputs {
    fn default() -> Self {
        MarketInputs {
            sigma_annual: reference::SIGMA_ANNUAL,
            quote: VolatilityQuote::Fraction,
            mean_price: reference::MEAN_PRICE,
            tick: reference::TICK,
            limit_fraction: reference::LIMIT_FRACTION,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketCalibration {
    /// As a fraction, after applying the quote convention.
    pub sigma_annual: f64,
    pub sigma_daily: f64,
    pub mean_price: f64,
    pub tick: f64,
    pub limit_fraction: f64,
    /// Mass in the price coordinate, `(mean_price * sigma_daily)^-2`.
    pub m0: f64,
    /// Mass in the return coordinate, `m0 * mean_price^2 = sigma_daily^-2`.
    pub m: f64,
    pub beta0: f64,
    pub beta: f64,
    pub d: f64,
}

pub fn daily_volatility(sigma_annual: f64) -> Result<f64> {
    if !(sigma_annual >= 0.0) {
        return Err(Error::NegativeVolatility(sigma_annual));
    }
    Ok(sigma_annual / TRADING_DAYS_PER_YEAR.sqrt())
}

/// `sigma^-2`, the mass dual to a volatility.
pub fn mass_from_volatility(sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::ZeroVolatility(sigma));
    }
    Ok(1.0 / (sigma * sigma))
}

/// Runs the calibration chain. The returned parameters use trading days as
/// the time unit, carry no drive, and use the default basis size.
pub fn calibrate(inputs: &MarketInputs) -> Result<(MarketCalibration, ValidatedParams)> {
    if !(inputs.mean_price > 0.0) {
        return Err(Error::NonPositive {
            field: "mean_price",
            value: inputs.mean_price,
        });
    }
    if !(inputs.tick >= 0.0) {
        return Err(Error::Negative {
            field: "tick",
            value: inputs.tick,
        });
    }
    if !(inputs.limit_fraction > 0.0 && inputs.limit_fraction < 1.0) {
        return Err(Error::InvalidLimitFraction(inputs.limit_fraction));
    }
    let sigma_annual = inputs.quote.to_fraction(inputs.sigma_annual);
    let sigma_daily = daily_volatility(sigma_annual)?;
    let m = mass_from_volatility(sigma_daily)?;
    let m0 = mass_from_volatility(inputs.mean_price * sigma_daily)?;
    let beta0 = inputs.tick * inputs.tick;
    let beta = beta0 / (inputs.mean_price * inputs.mean_price);
    let d = 2.0 * inputs.limit_fraction;

    let calibration = MarketCalibration {
        sigma_annual,
        sigma_daily,
        mean_price: inputs.mean_price,
        tick: inputs.tick,
        limit_fraction: inputs.limit_fraction,
        m0,
        m,
        beta0,
        beta,
        d,
    };
    let params = validate_params(&ModelParams {
        m,
        beta,
        d,
        lambda: 0.0,
        omega: 0.0,
        n_basis: DEFAULT_N_BASIS,
        time_unit: TimeUnit::TradingDay,
    })?;
    Ok((calibration, params))
}

/// Recovers the market observables (as a fraction quote) from calibrated
/// parameters and the mean price.
pub fn recover_inputs(params: &ModelParams, mean_price: f64) -> MarketInputs {
    let p = params.in_unit(TimeUnit::TradingDay);
    MarketInputs {
        sigma_annual: (TRADING_DAYS_PER_YEAR / p.m).sqrt(),
        quote: VolatilityQuote::Fraction,
        mean_price,
        tick: (p.beta * mean_price * mean_price).sqrt(),
        limit_fraction: 0.5 * p.d,
    }
}

/// Calibrated quantities set against the quoted reference constants.
#[derive(Debug, Clone, Serialize)]
pub struct ReferenceComparison {
    pub mass: f64,
    pub quoted_mass: f64,
    pub shift_prefactor: f64,
    pub quoted_shift_prefactor: f64,
    /// `pi^2 / (2 m d^2)` per trading day.
    pub omega0_coeff_per_day: f64,
    pub omega0_coeff_per_second: f64,
    pub quoted_omega0_coeff_per_second: f64,
    /// Drive period `2 pi / omega_2` below which the first transition can be
    /// reached, in trading days and minutes.
    pub slow_drive_period_days: f64,
    pub slow_drive_period_minutes: f64,
    pub quoted_slow_drive_minutes: f64,
    pub seconds_per_trading_day: f64,
    pub note: String,
}

pub fn compare_with_reference(cal: &MarketCalibration) -> ReferenceComparison {
    let coeff_day = PI * PI / (2.0 * cal.m * cal.d * cal.d);
    let coeff_sec = coeff_day / SECONDS_PER_TRADING_DAY;
    let omega2 = 3.0 * coeff_day;
    let period_days = 2.0 * PI / omega2;
    let period_minutes = period_days * SECONDS_PER_TRADING_DAY / 60.0;
    let note = format!(
        "omega0_n = pi^2 (n^2 - 1) / (2 m d^2) gives {coeff_day:.4e} (n^2 - 1) per trading day, \
         i.e. {coeff_sec:.4e} per second at {SECONDS_PER_TRADING_DAY} s per session; the quoted \
         {:.0e} per second and {} minute threshold do not follow from the quoted inputs under any \
         single day-to-second conversion (the required conversion would be {:.3e} s per day)",
        reference::OMEGA0_COEFF_PER_SECOND,
        reference::SLOW_DRIVE_MINUTES,
        coeff_day / reference::OMEGA0_COEFF_PER_SECOND,
    );
    ReferenceComparison {
        mass: cal.m,
        quoted_mass: reference::MASS,
        shift_prefactor: 4.0 / 3.0 * cal.beta * cal.m,
        quoted_shift_prefactor: reference::SHIFT_PREFACTOR,
        omega0_coeff_per_day: coeff_day,
        omega0_coeff_per_second: coeff_sec,
        quoted_omega0_coeff_per_second: reference::OMEGA0_COEFF_PER_SECOND,
        slow_drive_period_days: period_days,
        slow_drive_period_minutes: period_minutes,
        quoted_slow_drive_minutes: reference::SLOW_DRIVE_MINUTES,
        seconds_per_trading_day: SECONDS_PER_TRADING_DAY,
        note,
    }
}

/// Close-to-close volatility: sample standard deviation of log returns,
/// scaled by `sqrt(periods_per_year)`.
///
/// With a single return the sample deviation is undefined; the absolute log
/// return is used instead.
pub fn volatility_from_series(closes: &[f64], periods_per_year: f64) -> Result<f64> {
    if closes.len() < 2 {
        return Err(Error::SeriesTooShort(closes.len()));
    }
    if let Some((index, &value)) = closes.iter().enumerate().find(|(_, c)| !(**c > 0.0)) {
        return Err(Error::NonPositivePrice { index, value });
    }
    if !(periods_per_year > 0.0) {
        return Err(Error::NonPositive {
            field: "periods_per_year",
            value: periods_per_year,
        });
    }
    let returns: Vec<f64> = closes.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    let per_period = if returns.len() == 1 {
        returns[0].abs()
    } else {
        let n = returns.len() as f64;
        let mean = returns.iter().sum::<f64>() / n;
        let ss: f64 = returns.iter().map(|r| (r - mean) * (r - mean)).sum();
        (ss / (n - 1.0)).sqrt()
    };
    Ok(per_period * periods_per_year.sqrt())
}

/// Reads a `date,close` CSV. Only row order matters; dates are kept as text.
pub fn read_close_series<R: Read>(reader: R) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "date" || &headers[1] != "close" {
        return Err(Error::Ingest {
            line: 1,
            message: format!("expected header `date,close`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut closes = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Ingest {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 2 {
            return Err(Error::Ingest {
                line,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        if record[0].is_empty() {
            return Err(Error::Ingest {
                line,
                message: "empty date".into(),
            });
        }
        let close: f64 = record[1].parse().map_err(|_| Error::Ingest {
            line,
            message: format!("close `{}` is not a number", &record[1]),
        })?;
        closes.push(close);
    }
    Ok(closes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn daily_volatility_examples() {
        assert_eq!(daily_volatility(0.0).unwrap(), 0.0);
        assert!((daily_volatility(0.3).unwrap() - 0.018898).abs() < 1e-6);
        assert!((daily_volatility(252f64.sqrt()).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(daily_volatility(-0.1), Err(Error::NegativeVolatility(_))));
    }

    #[test]
    fn mass_examples() {
        let m = mass_from_volatility(0.018898).unwrap();
        assert!((m - 2800.0).abs() < 0.1 * 2800.0);
        assert_eq!(mass_from_volatility(1.0).unwrap(), 1.0);
        let (a, b) = (mass_from_volatility(0.2).unwrap(), mass_from_volatility(0.1).unwrap());
        assert!((b / a - 4.0).abs() < 1e-12);
        assert!(matches!(mass_from_volatility(0.0), Err(Error::ZeroVolatility(_))));
    }

    #[test]
    fn market_reference_chain() {
        let (cal, params) = calibrate(&MarketInputs::default()).unwrap();
        assert_eq!(cal.beta0, 1e-4);
        assert_eq!(cal.beta, 1e-6);
        assert_eq!(cal.d, 0.2);
        assert!((cal.m - 2800.0).abs() < 1e-9);
        assert!((cal.m0 * 100.0 - cal.m).abs() < 1e-9);
        assert!((cal.tick - 0.01).abs() < 1e-15);
        assert_eq!(params.params().time_unit, TimeUnit::TradingDay);
        assert_eq!(params.m(), cal.m);

        let cmp = compare_with_reference(&cal);
        assert!((cmp.shift_prefactor - 4e-3).abs() < 0.1 * 4e-3);
        assert!((cmp.omega0_coeff_per_day - PI * PI / (2.0 * 2800.0 * 0.04)).abs() < 1e-15);
        assert!(cmp.omega0_coeff_per_second / reference::OMEGA0_COEFF_PER_SECOND < 0.1);
    }

    #[test]
    fn percent_quote_reading() {
        let inputs = MarketInputs {
            quote: VolatilityQuote::Percent,
            ..MarketInputs::default()
        };
        let (cal, _) = calibrate(&inputs).unwrap();
        assert!((cal.sigma_annual - 0.003).abs() < 1e-18);
        assert!((cal.m / 2.8e7 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_tick_is_continuum() {
        let (cal, params) = calibrate(&MarketInputs {
            tick: 0.0,
            ..MarketInputs::default()
        })
        .unwrap();
        assert_eq!(cal.beta0, 0.0);
        assert_eq!(params.beta(), 0.0);
    }

    #[test]
    fn calibration_rejects_bad_inputs() {
        let base = MarketInputs::default();
        assert!(matches!(
            calibrate(&MarketInputs { sigma_annual: 0.0, ..base }),
            Err(Error::ZeroVolatility(_))
        ));
        assert!(matches!(
            calibrate(&MarketInputs { limit_fraction: 1.0, ..base }),
            Err(Error::InvalidLimitFraction(_))
        ));
        assert!(calibrate(&MarketInputs { mean_price: 0.0, ..base }).is_err());
        assert!(calibrate(&MarketInputs { tick: -0.01, ..base }).is_err());
    }

    #[test]
    fn series_examples() {
        assert_eq!(volatility_from_series(&[5.0; 10], 252.0).unwrap(), 0.0);
        let two = volatility_from_series(&[100.0, 100.0 * 0.01f64.exp()], 252.0).unwrap();
        assert!((two - 0.01 * 252f64.sqrt()).abs() < 1e-12);

        let mut closes = vec![100.0];
        for i in 1..252 {
            let r: f64 = if i % 2 == 1 { 0.01 } else { -0.01 };
            closes.push(closes[i - 1] * r.exp());
        }
        // 251 returns: 126 of +0.01, 125 of -0.01
        let n: f64 = 251.0;
        let mean = 0.01 / n;
        let ss = 126.0 * (0.01 - mean).powi(2) + 125.0 * (-0.01 - mean).powi(2);
        let want = (ss / (n - 1.0)).sqrt() * 252f64.sqrt();
        let got = volatility_from_series(&closes, 252.0).unwrap();
        assert!((got - want).abs() < 1e-12);
        assert!((got - 0.1587).abs() < 1e-3);

        assert!(matches!(volatility_from_series(&[1.0], 252.0), Err(Error::SeriesTooShort(1))));
        assert!(matches!(
            volatility_from_series(&[1.0, 0.0, 2.0], 252.0),
            Err(Error::NonPositivePrice { index: 1, .. })
        ));
    }

    #[test]
    fn csv_ingestion() {
        let text = "date,close\n2024-01-02,10.0\n2024-01-03,10.1\n2024-01-04,9.9\n";
        assert_eq!(read_close_series(text.as_bytes()).unwrap(), vec![10.0, 10.1, 9.9]);

        let bad = "date,close\n2024-01-02,10.0\n2024-01-03,abc\n";
        match read_close_series(bad.as_bytes()) {
            Err(Error::Ingest { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let short = "date,close\n2024-01-02,10.0\n2024-01-03\n";
        assert!(matches!(read_close_series(short.as_bytes()), Err(Error::Ingest { line: 3, .. })));
        assert!(matches!(
            read_close_series("day,price\nx,1\n".as_bytes()),
            Err(Error::Ingest { line: 1, .. })
        ));
    }

    proptest! {
        #[test]
        fn calibration_round_trip(
            sigma in 1e-3f64..2.0,
            price in 0.5f64..500.0,
            tick in 1e-4f64..0.5,
            limit in 0.01f64..0.5,
        ) {
            let inputs = MarketInputs { sigma_annual: sigma, quote: VolatilityQuote::Fraction, mean_price: price, tick, limit_fraction: limit };
            let (cal, params) = calibrate(&inputs).unwrap();
            prop_assert_eq!(validate_params(params.params()).unwrap(), params);
            let back = recover_inputs(params.params(), cal.mean_price);
            prop_assert!((back.sigma_annual - sigma).abs() <= 1e-12 * sigma);
            prop_assert!((back.tick - tick).abs() <= 1e-12 * tick);
            prop_assert!((back.limit_fraction - limit).abs() <= 1e-12 * limit);
        }

        #[test]
        fn volatility_scale_invariant(
            steps in proptest::collection::vec(-0.05f64..0.05, 2..60),
            scale in 1e-3f64..1e3,
        ) {
            let mut closes = vec![100.0];
            for r in &steps {
                let last = *closes.last().unwrap();
                closes.push(last * r.exp());
            }
            let scaled: Vec<f64> = closes.iter().map(|c| c * scale).collect();
            let a = volatility_from_series(&closes, 252.0).unwrap();
            let b = volatility_from_series(&scaled, 252.0).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1e-12));
        }
    }
}
