//! Run configuration, table exports and the command runners behind `gupmkt`.
//!
//! Every runner writes its bulk output as CSV with a header row and finishes
//! with a JSON summary that embeds the resolved configuration and the library
//! version. Floats are written in the shortest form that parses back to the
//! same value, so identical configurations give byte-identical tables.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::calibration::{
    calibrate, compare_with_reference, read_close_series, volatility_from_series, MarketInputs, VolatilityQuote,
    TRADING_DAYS_PER_YEAR,
};
use crate::dynamics::{
    density_evolution, interval_probability, propagate, resonance_scan, Sampling, ScanSpec,
};
use crate::error::{Error, Result};
use crate::operators::dipole_matrix;
use crate::params::{validate_params, ModelParams, TimeUnit, ValidatedParams, FIRST_ORDER_WARN_THRESHOLD};
use crate::spectrum::spectrum_table;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn default_samples() -> usize {
    200
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub omega_min: f64,
    pub omega_max: f64,
    pub steps: usize,
    pub t_horizon: f64,
    #[serde(default = "default_samples")]
    pub time_samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagateConfig {
    pub t_final: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Points of the density grid across the well; 0 skips the density table.
    #[serde(default)]
    pub r_points: usize,
    /// Return interval `[a, b]` whose probability is reported over time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub propagate: Option<PropagateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub market: Option<MarketInputs>,
    /// Scans use the numerical propagator instead of first-order amplitudes.
    #[serde(default)]
    pub exact_path: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(model: ModelParams) -> Self {
        RunConfig {
            model,
            scan: None,
            propagate: None,
            market: None,
            exact_path: false,
            out_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// The same run with every rate and duration expressed in `unit`.
    pub fn in_unit(&self, unit: TimeUnit) -> RunConfig {
        let k = self.model.time_unit.duration_factor(unit);
        RunConfig {
            model: self.model.in_unit(unit),
            scan: self.scan.map(|s| ScanConfig {
                omega_min: s.omega_min / k,
                omega_max: s.omega_max / k,
                t_horizon: s.t_horizon * k,
                ..s
            }),
            propagate: self.propagate.map(|p| PropagateConfig {
                t_final: p.t_final * k,
                ..p
            }),
            ..self.clone()
        }
    }
}

/// Command-line overrides applied on top of a loaded configuration.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub unit: Option<TimeUnit>,
    pub exact: bool,
    pub n_basis: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, config: &RunConfig) -> RunConfig {
        let mut out = match self.unit {
            Some(unit) if unit != config.model.time_unit => config.in_unit(unit),
            _ => config.clone(),
        };
        if let Some(n) = self.n_basis {
            out.model.n_basis = n;
        }
        out.exact_path |= self.exact;
        out
    }
}

/// Shortest decimal form that parses back to `x`.
pub fn format_float(x: f64) -> String {
    format!("{x:?}")
}

fn write_table<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_summary(path: &Path, summary: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn warnings(p: &ValidatedParams) -> Vec<String> {
    let mut out = Vec::new();
    if p.first_order_warning() {
        out.push(format!(
            "beta pi^2 n_basis^2 / d^2 = {:e} exceeds {FIRST_ORDER_WARN_THRESHOLD}; the quartic term is not a small correction at the top of the basis",
            p.params().first_order_ratio()
        ));
    }
    out
}

fn summary(command: &str, config: &RunConfig, warnings: Vec<String>, outputs: &[&Path], result: Value) -> Value {
    json!({
        "command": command,
        "version": VERSION,
        "config": config,
        "warnings": warnings,
        "outputs": outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "result": result,
    })
}

/// Writes `spectrum.csv`, `dipole.csv` and `spectrum.json` under `out_dir`.
pub fn cmd_spectrum(config: &RunConfig, out_dir: &Path) -> Result<Value> {
    let p = validate_params(&config.model)?;
    fs::create_dir_all(out_dir)?;
    let spectrum = spectrum_table(&p);
    let rows = spectrum.rows();

    let table = out_dir.join("spectrum.csv");
    write_table(
        &table,
        &["n", "e0", "e1", "E", "omega0", "omega"],
        rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                format_float(r.e0),
                format_float(r.e1),
                format_float(r.energy),
                format_float(r.omega0),
                format_float(r.omega),
            ]
        }),
    )?;

    let dipole = dipole_matrix(&p);
    let dipole = &dipole;
    let dipole_path = out_dir.join("dipole.csv");
    let dim = dipole.dim.to_string();
    let d = format_float(dipole.d);
    write_table(
        &dipole_path,
        &["dim", "d", "n", "k", "value"],
        (1..=dipole.dim).flat_map(|n| {
            let (dim, d) = (dim.clone(), d.clone());
            (1..=dipole.dim).map(move |k| {
                vec![
                    dim.clone(),
                    d.clone(),
                    n.to_string(),
                    k.to_string(),
                    format_float(dipole.get(n, k)),
                ]
            })
        }),
    )?;

    let ratios: Vec<f64> = rows.iter().map(|r| r.e1 / r.e0).collect();
    let result = json!({
        "levels": rows.len(),
        "ground_energy": rows[0].energy,
        "omega_2": rows.get(1).map(|r| r.omega),
        "min_relative_shift": ratios.iter().copied().fold(f64::INFINITY, f64::min),
        "max_relative_shift": ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    });
    let json_path = out_dir.join("spectrum.json");
    let s = summary("spectrum", config, warnings(&p), &[&table, &dipole_path], result);
    write_summary(&json_path, &s)?;
    Ok(s)
}

/// Writes `scan.csv` and `scan.json` under `out_dir`.
pub fn cmd_scan(config: &RunConfig, out_dir: &Path) -> Result<Value> {
    let scan = config
        .scan
        .ok_or_else(|| Error::Config("missing `scan` section".into()))?;
    if scan.steps < 3 {
        return Err(Error::InvalidScan(format!("steps must be at least 3 (got {})", scan.steps)));
    }
    let p = validate_params(&config.model)?;
    let spec = ScanSpec {
        omega_min: scan.omega_min,
        omega_max: scan.omega_max,
        steps: scan.steps,
        t_horizon: scan.t_horizon,
        time_samples: scan.time_samples,
        exact: config.exact_path,
    };
    let result = resonance_scan(&p, &spec)?;
    fs::create_dir_all(out_dir)?;

    let table = out_dir.join("scan.csv");
    write_table(
        &table,
        &["omega", "peak_prob"],
        result
            .omegas
            .iter()
            .zip(&result.peak_prob)
            .map(|(w, q)| vec![format_float(*w), format_float(*q)]),
    )?;

    let in_range: Vec<Value> = result
        .reference
        .iter()
        .filter(|(_, w)| *w >= scan.omega_min && *w <= scan.omega_max)
        .map(|(n, w)| json!({ "n": n, "omega": w }))
        .collect();
    let body = json!({
        "method": if config.exact_path { "numerical" } else { "perturbative_first_order" },
        "step": result.step,
        "located_peaks": result.located_peaks,
        "dominant_peak": result.dominant_peak(),
        "reference_in_range": in_range,
    });
    let json_path = out_dir.join("scan.json");
    let s = summary("scan", config, warnings(&p), &[&table], body);
    write_summary(&json_path, &s)?;
    Ok(s)
}

/// Writes `trajectory.csv`, optionally `density.csv` and `interval.csv`, and
/// `propagate.json` under `out_dir`.
pub fn cmd_propagate(config: &RunConfig, out_dir: &Path) -> Result<Value> {
    let prop = config
        .propagate
        .ok_or_else(|| Error::Config("missing `propagate` section".into()))?;
    let p = validate_params(&config.model)?;
    let traj = propagate(&p, prop.t_final, Sampling::uniform(prop.samples))?;
    fs::create_dir_all(out_dir)?;

    let table = out_dir.join("trajectory.csv");
    write_table(
        &table,
        &["t", "n", "re", "im"],
        traj.times.iter().zip(&traj.coeffs).flat_map(|(t, c)| {
            c.iter().enumerate().map(move |(i, z)| {
                vec![format_float(*t), (i + 1).to_string(), format_float(z.re), format_float(z.im)]
            })
        }),
    )?;
    let mut outputs = vec![table];

    let mut shape_drift = None;
    if prop.r_points > 0 {
        if prop.r_points < 2 {
            return Err(Error::InvalidSampling("r_points must be 0 or at least 2".into()));
        }
        let half = 0.5 * p.d();
        let r: Vec<f64> = (0..prop.r_points)
            .map(|i| {
                if i + 1 == prop.r_points {
                    half
                } else {
                    -half + p.d() * i as f64 / (prop.r_points - 1) as f64
                }
            })
            .collect();
        let density = density_evolution(&traj, &r)?;
        let path = out_dir.join("density.csv");
        write_table(
            &path,
            &["t", "r", "density"],
            density.times.iter().zip(&density.density).flat_map(|(t, row)| {
                density
                    .r
                    .iter()
                    .zip(row)
                    .map(move |(r, rho)| vec![format_float(*t), format_float(*r), format_float(*rho)])
            }),
        )?;
        shape_drift = Some(density.shape_drift());
        outputs.push(path);
    }

    let mut interval_range = None;
    if let Some([a, b]) = prop.interval {
        let probs = interval_probability(&traj, a, b)?;
        let path = out_dir.join("interval.csv");
        let (fa, fb) = (format_float(a), format_float(b));
        write_table(
            &path,
            &["t", "a", "b", "prob"],
            traj.times
                .iter()
                .zip(&probs)
                .map(|(t, q)| vec![format_float(*t), fa.clone(), fb.clone(), format_float(*q)]),
        )?;
        interval_range = Some(json!({
            "a": a,
            "b": b,
            "min": probs.iter().copied().fold(f64::INFINITY, f64::min),
            "max": probs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }));
        outputs.push(path);
    }

    let last = traj.len() - 1;
    let body = json!({
        "method": traj.method,
        "samples": traj.len(),
        "initial_norm": traj.norm_sqr(0),
        "final_norm": traj.norm_sqr(last),
        "max_norm_drift": traj.max_norm_drift,
        "max_excited_probability": traj.max_excited_probability(),
        "density_shape_drift": shape_drift,
        "interval": interval_range,
    });
    let json_path = out_dir.join("propagate.json");
    let refs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    let s = summary("propagate", config, warnings(&p), &refs, body);
    write_summary(&json_path, &s)?;
    Ok(s)
}

/// Calibration inputs: explicit numbers, optionally with the volatility
/// replaced by one estimated from a `date,close` series.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrateRequest {
    pub inputs: MarketInputs,
    pub series: Option<PathBuf>,
    pub unit: TimeUnit,
    pub n_basis: Option<usize>,
}

/// Writes `calibration.json` and a runnable `config.json` under `out_dir`.
///
/// The emitted config carries the resolved market inputs, so calibrating from
/// it again reproduces the same model parameters.
pub fn cmd_calibrate(request: &CalibrateRequest, base: Option<&RunConfig>, out_dir: &Path) -> Result<Value> {
    let mut inputs = request.inputs;
    let mut series_info = None;
    if let Some(path) = &request.series {
        let file = fs::File::open(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let closes = read_close_series(file)?;
        let sigma = volatility_from_series(&closes, TRADING_DAYS_PER_YEAR)?;
        inputs.sigma_annual = sigma;
        inputs.quote = VolatilityQuote::Fraction;
        series_info = Some(json!({
            "path": path.display().to_string(),
            "prices": closes.len(),
            "sigma_annual": sigma,
        }));
    }
    let (cal, params) = calibrate(&inputs)?;
    let params = match request.n_basis {
        Some(n) => params.with_n_basis(n)?,
        None => params,
    };
    let params = params.in_unit(request.unit)?;

    let mut emitted = base.cloned().unwrap_or_else(|| RunConfig::new(*params.params()));
    emitted.model = *params.params();
    emitted.market = Some(inputs);
    fs::create_dir_all(out_dir)?;
    let config_path = out_dir.join("config.json");
    let mut text = emitted.to_json();
    text.push('\n');
    fs::write(&config_path, text)?;

    let body = json!({
        "inputs": inputs,
        "series": series_info,
        "calibration": cal,
        "params": params.params(),
        "reference": compare_with_reference(&cal),
    });
    let json_path = out_dir.join("calibration.json");
    let s = summary("calibrate", &emitted, warnings(&params), &[&config_path], body);
    write_summary(&json_path, &s)?;
    Ok(s)
}
