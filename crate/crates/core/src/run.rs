//! Scenario runner: JSON configuration in, CSV/JSON artifacts and a run
//! manifest out.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dispersion::{CrystalSpec, SellmeierModel};
use crate::error::Error;
use crate::exec::Execution;
use crate::fock::Basis;
use crate::jsa::{
    apply_filters, bandwidth_for_visibility, build_jsa_with, filter_sweep, relative_count_rate,
    spectral_overlap_with, visibility_from_jsa_with, FilterKind, FilterSpec, FrequencyGrid,
    GridConfig, JsaOptions, PumpSpec,
};
use crate::model::{
    misalignment_study, phase_sweep, polarization_visibility, power_sweep, theta_grid, ModelParams,
    PassConfig, PassOverlap, MAX_KAPPA_SQUARED,
};
use crate::output;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    FilterSweep,
    PassCompare,
    PhaseSweep,
    Misalign,
    PowerSweep,
    JsaDump,
    Chain,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::FilterSweep,
        Scenario::PassCompare,
        Scenario::PhaseSweep,
        Scenario::Misalign,
        Scenario::PowerSweep,
        Scenario::JsaDump,
        Scenario::Chain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::FilterSweep => "filter-sweep",
            Scenario::PassCompare => "pass-compare",
            Scenario::PhaseSweep => "phase-sweep",
            Scenario::Misalign => "misalign",
            Scenario::PowerSweep => "power-sweep",
            Scenario::JsaDump => "jsa-dump",
            Scenario::Chain => "chain",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where the spectral overlap for the mode model comes from in `chain`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XSource {
    /// `x^2` = exchange-overlap visibility of the (filtered) amplitude.
    #[default]
    Exchange,
    /// `x` = overlap of the dominant singular modes.
    DominantMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub x_squared: f64,
    pub x_phase_rad: f64,
    pub y_squared: f64,
    pub theta_rad: f64,
    pub kappa: f64,
    pub pass_overlap: PassOverlap,
    pub order: u32,
    pub efficiency: f64,
    pub n_max: u32,
    pub basis: Basis,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            x_squared: 0.91,
            x_phase_rad: 0.0,
            y_squared: 0.5,
            theta_rad: 0.0,
            kappa: 1e-3,
            pass_overlap: PassOverlap::Merged,
            order: 1,
            efficiency: 0.1,
            n_max: 4,
            basis: Basis::PM,
        }
    }
}

impl ModelConfig {
    pub fn params(&self) -> Result<ModelParams, Error> {
        if !(0.0..=1.0).contains(&self.x_squared) {
            return Err(Error::invalid(
                "model.x_squared",
                format!("{} not in [0, 1]", self.x_squared),
            ));
        }
        if !(0.0..=1.0).contains(&self.y_squared) {
            return Err(Error::invalid(
                "model.y_squared",
                format!("{} not in [0, 1]", self.y_squared),
            ));
        }
        if !self.x_phase_rad.is_finite() {
            return Err(Error::invalid("model.x_phase_rad", "must be finite"));
        }
        let p = ModelParams {
            x: Complex64::from_polar(self.x_squared.sqrt(), self.x_phase_rad),
            y: self.y_squared.sqrt(),
            theta: self.theta_rad,
            kappa: self.kappa,
            pass_overlap: self.pass_overlap,
            order: self.order,
            efficiency: self.efficiency,
            n_max: self.n_max,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub bandwidths_nm: Vec<f64>,
    /// Visibility whose crossing bandwidth the filter sweep reports.
    pub visibility_target: f64,
    /// Phase steps over `[0, 2 pi]`; the scan has `theta_samples + 1` points.
    pub theta_samples: usize,
    pub bases: Vec<Basis>,
    pub kappas: Vec<f64>,
    pub y_squared: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            bandwidths_nm: (1..=40).map(|i| 0.5 * i as f64).collect(),
            visibility_target: 0.95,
            theta_samples: 64,
            bases: Basis::ALL.to_vec(),
            kappas: (1..=20).map(|i| (0.005 * i as f64).sqrt()).collect(),
            y_squared: vec![0.12, 0.28, 0.5],
        }
    }
}

impl SweepConfig {
    fn validate(&self, scenario: Scenario) -> Result<(), Error> {
        match scenario {
            Scenario::FilterSweep => {
                if self.bandwidths_nm.is_empty()
                    || self
                        .bandwidths_nm
                        .iter()
                        .any(|b| !(*b > 0.0 && b.is_finite()))
                {
                    return Err(Error::invalid(
                        "sweep.bandwidths_nm",
                        "needs positive finite values",
                    ));
                }
                if !(self.visibility_target > 0.0 && self.visibility_target < 1.0) {
                    return Err(Error::invalid(
                        "sweep.visibility_target",
                        "must be in (0, 1)",
                    ));
                }
            }
            Scenario::PhaseSweep => {
                if self.theta_samples < 8 {
                    return Err(Error::invalid("sweep.theta_samples", "must be >= 8"));
                }
            }
            Scenario::PowerSweep => {
                if self.kappas.is_empty()
                    || self
                        .kappas
                        .iter()
                        .any(|k| !(*k > 0.0 && k * k <= MAX_KAPPA_SQUARED))
                {
                    return Err(Error::invalid(
                        "sweep.kappas",
                        format!("values must be in (0, sqrt({MAX_KAPPA_SQUARED})]"),
                    ));
                }
            }
            Scenario::Misalign
                if self.y_squared.is_empty()
                    || self.y_squared.iter().any(|y| !(0.0..=1.0).contains(y)) =>
            {
                return Err(Error::invalid(
                    "sweep.y_squared",
                    "values must be in [0, 1]",
                ));
            }
            _ => {}
        }
        if matches!(
            scenario,
            Scenario::PhaseSweep | Scenario::Misalign | Scenario::PassCompare | Scenario::Chain
        ) && self.bases.is_empty()
        {
            return Err(Error::invalid("sweep.bases", "must not be empty"));
        }
        Ok(())
    }
}

/// Full run configuration. Unknown keys anywhere are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Bundled dispersion data (`bbo-eimerl` or `bbo-kato`), used unless
    /// `sellmeier_path` is set.
    pub sellmeier: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sellmeier_path: Option<PathBuf>,
    pub crystal: CrystalSpec,
    pub pump: PumpSpec,
    pub filter: FilterSpec,
    pub grid: GridConfig,
    pub jsa: JsaOptions,
    pub model: ModelConfig,
    pub sweep: SweepConfig,
    pub x_source: XSource,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sellmeier: "bbo-eimerl".into(),
            sellmeier_path: None,
            crystal: CrystalSpec::default(),
            pump: PumpSpec::default(),
            filter: FilterSpec::default(),
            grid: GridConfig::default(),
            jsa: JsaOptions::default(),
            model: ModelConfig::default(),
            sweep: SweepConfig::default(),
            x_source: XSource::default(),
            output_dir: None,
        }
    }
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self, RunError> {
        if text.trim().is_empty() {
            return Err(RunError::Config("configuration is empty".into()));
        }
        serde_json::from_str(text).map_err(|e| RunError::Config(e.to_string()))
    }

    /// Reads a configuration file. A relative `sellmeier_path` is taken
    /// relative to the file's directory.
    pub fn from_path(path: &Path) -> Result<Self, RunError> {
        let text = fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json_str(&text)?;
        if let Some(p) = &cfg.sellmeier_path {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    cfg.sellmeier_path = Some(dir.join(p));
                }
            }
        }
        Ok(cfg)
    }

    pub fn dispersion(&self) -> Result<SellmeierModel, Error> {
        match &self.sellmeier_path {
            Some(p) => SellmeierModel::from_path(p),
            None => SellmeierModel::builtin(&self.sellmeier),
        }
    }

    /// Checks every nested invariant needed by `scenario`.
    pub fn validate(&self, scenario: Scenario) -> Result<Resolved, RunError> {
        let cfg = |e: Error| RunError::Config(e.to_string());
        let model = self.dispersion().map_err(cfg)?;
        self.crystal.validate().map_err(cfg)?;
        self.pump.validate().map_err(cfg)?;
        self.filter.validate().map_err(cfg)?;
        let grid = self
            .grid
            .resolve(&self.crystal, &self.pump, &model)
            .map_err(cfg)?;
        let params = self.model.params().map_err(cfg)?;
        self.sweep.validate(scenario).map_err(cfg)?;
        Ok(Resolved {
            dispersion: model,
            grid,
            params,
        })
    }
}

/// Validated derived inputs of a run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub dispersion: SellmeierModel,
    pub grid: FrequencyGrid,
    pub params: ModelParams,
}

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Numeric { scenario: Scenario, source: Error },
    Io(std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numeric { .. } => 3,
            RunError::Io(_) => 1,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "configuration error: {m}"),
            RunError::Numeric { scenario, source } => write!(f, "{scenario}: {source}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for RunError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            RunError::Numeric { source, .. } => Some(source),
            RunError::Io(e) => Some(e),
            RunError::Config(_) => None,
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub scenario: Scenario,
    pub config_hash: String,
    pub timestamp_unix_s: u64,
    pub threads: Option<usize>,
    pub resolved_config: RunConfig,
    pub outputs: Vec<OutputFile>,
    pub summary: serde_json::Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Runs `scenario` and writes its outputs and manifest into `out_dir`.
///
/// `threads` sizes a dedicated worker pool; `None` uses the global one.
pub fn run(
    scenario: Scenario,
    config: &RunConfig,
    out_dir: &Path,
    threads: Option<usize>,
) -> Result<RunManifest, RunError> {
    let resolved = config.validate(scenario)?;
    if threads == Some(0) {
        return Err(RunError::Config("--threads must be positive".into()));
    }
    fs::create_dir_all(out_dir)?;
    let (files, summary) =
        with_threads(threads, || execute(scenario, config, &resolved, out_dir))??;

    let mut outputs = Vec::with_capacity(files.len());
    for file in files {
        let bytes = fs::read(out_dir.join(&file))?;
        outputs.push(OutputFile {
            sha256: sha256_hex(&bytes),
            file,
        });
    }
    let mut resolved_config = config.clone();
    resolved_config.output_dir = None;
    let canonical = serde_json::to_vec(&resolved_config).expect("config serializes");
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        scenario,
        config_hash: sha256_hex(&canonical),
        timestamp_unix_s: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        threads,
        resolved_config,
        outputs,
        summary,
    };
    output::write_json(&out_dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, RunError> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| RunError::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T: Send>(
    _threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, RunError> {
    Ok(f())
}

type ScenarioOutput = (Vec<String>, serde_json::Value);

fn execute(
    scenario: Scenario,
    cfg: &RunConfig,
    r: &Resolved,
    out: &Path,
) -> Result<ScenarioOutput, RunError> {
    let num = |source: Error| RunError::Numeric { scenario, source };
    let exec = Execution::Parallel;
    let params = &r.params;
    let sweep = &cfg.sweep;
    match scenario {
        Scenario::FilterSweep => {
            let rows = filter_sweep(
                &cfg.crystal,
                &cfg.pump,
                &r.grid,
                &r.dispersion,
                &cfg.jsa,
                cfg.filter.center_nm,
                &sweep.bandwidths_nm,
                exec,
            )
            .map_err(num)?;
            output::write_filter_sweep(&out.join("fig1.csv"), &rows)?;
            let jsa = build_jsa_with(
                &cfg.crystal,
                &cfg.pump,
                &r.grid,
                &r.dispersion,
                &cfg.jsa,
                exec,
            )
            .map_err(num)?;
            let crossing = bandwidth_for_visibility(
                &jsa,
                cfg.filter.center_nm,
                sweep.visibility_target,
                0.05,
                1000.0,
            )
            .ok()
            .map(|c| {
                serde_json::json!({
                    "bandwidth_nm": c.bandwidth_nm,
                    "visibility": c.visibility,
                    "relative_rate": c.relative_rate,
                })
            });
            let summary = serde_json::json!({
                "unfiltered_visibility": rows[0].visibility,
                "visibility_target": sweep.visibility_target,
                "crossing": crossing,
            });
            Ok((vec!["fig1.csv".into()], summary))
        }
        Scenario::PassCompare => {
            let mut bases = sweep.bases.clone();
            if !bases.contains(&cfg.model.basis) {
                bases.push(cfg.model.basis);
            }
            let mut table = Vec::with_capacity(bases.len());
            for &basis in &bases {
                let mut v = [0.0; 3];
                for (slot, pc) in v.iter_mut().zip([
                    PassConfig::FirstOnly,
                    PassConfig::SecondOnly,
                    PassConfig::Double,
                ]) {
                    *slot = polarization_visibility(params, pc, basis).map_err(num)?;
                }
                table.push((basis, v));
            }
            output::write_pass_compare(&out.join("pass_compare.csv"), &table)?;
            let v = table
                .iter()
                .find(|(b, _)| *b == cfg.model.basis)
                .expect("basis evaluated")
                .1;
            let summary = serde_json::json!({
                "basis": cfg.model.basis,
                "first": v[0],
                "second": v[1],
                "double": v[2],
            });
            output::write_json(&out.join("pass_compare.json"), &summary)?;
            Ok((
                vec!["pass_compare.csv".into(), "pass_compare.json".into()],
                summary,
            ))
        }
        Scenario::PhaseSweep => {
            let thetas = theta_grid(sweep.theta_samples);
            let scan = phase_sweep(params, &thetas, &sweep.bases, exec).map_err(num)?;
            output::write_fringes(&out.join("fringes.csv"), &scan)?;
            let summary = serde_json::json!({
                "fringe_visibility": scan
                    .fringe_visibility
                    .iter()
                    .map(|(b, v)| (b.name().to_string(), serde_json::json!(v)))
                    .collect::<serde_json::Map<_, _>>(),
            });
            Ok((vec!["fringes.csv".into()], summary))
        }
        Scenario::Misalign => {
            let rows =
                misalignment_study(params, &sweep.y_squared, &sweep.bases, exec).map_err(num)?;
            output::write_misalignment(&out.join("misalign.csv"), &rows)?;
            Ok((
                vec!["misalign.csv".into()],
                serde_json::json!({ "rows": rows.len() }),
            ))
        }
        Scenario::PowerSweep => {
            let rows = power_sweep(params, &sweep.kappas, cfg.model.basis, exec).map_err(num)?;
            output::write_power_sweep(&out.join("power_sweep.csv"), &rows)?;
            let (slope, intercept) = linear_fit(
                &rows.iter().map(|r| r.kappa * r.kappa).collect::<Vec<_>>(),
                &rows.iter().map(|r| r.visibility).collect::<Vec<_>>(),
            );
            let summary = serde_json::json!({
                "basis": cfg.model.basis,
                "slope_per_kappa_squared": slope,
                "intercept": intercept,
            });
            Ok((vec!["power_sweep.csv".into()], summary))
        }
        Scenario::JsaDump => {
            let jsa = build_jsa_with(
                &cfg.crystal,
                &cfg.pump,
                &r.grid,
                &r.dispersion,
                &cfg.jsa,
                exec,
            )
            .map_err(num)?;
            let jsa = match cfg.filter.kind {
                FilterKind::None => jsa,
                FilterKind::Gaussian => apply_filters(&jsa, &cfg.filter).map_err(num)?,
            };
            output::write_jsa(&out.join("jsa.csv"), &jsa)?;
            output::write_json(&out.join("jsa.json"), &output::jsa_metadata(&jsa))?;
            let summary = serde_json::json!({
                "visibility": visibility_from_jsa_with(&jsa, exec).map_err(num)?,
            });
            Ok((vec!["jsa.csv".into(), "jsa.json".into()], summary))
        }
        Scenario::Chain => {
            let summary = chain(cfg, r, exec).map_err(num)?;
            output::write_json(&out.join("chain.json"), &summary)?;
            Ok((
                vec!["chain.json".into()],
                serde_json::to_value(&summary).expect("summary serializes"),
            ))
        }
    }
}

/// Least-squares `(slope, intercept)` of `ys` against `xs`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainVisibilities {
    pub basis: Basis,
    pub first: f64,
    pub second: f64,
    pub double: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub x_source: XSource,
    pub filtered: bool,
    pub relative_rate: f64,
    /// Exchange-overlap visibility of the amplitude.
    pub jsa_visibility: f64,
    /// `|x|^2` of the dominant singular modes.
    pub dominant_mode_x_squared: f64,
    pub rank1_fidelity: f64,
    /// `|x|^2` passed to the mode model.
    pub x_squared: f64,
    pub visibilities: Vec<ChainVisibilities>,
}

/// Dispersion, amplitude, overlap and mode model in one pass.
pub fn chain(cfg: &RunConfig, r: &Resolved, exec: Execution) -> Result<ChainSummary, Error> {
    let unfiltered = build_jsa_with(
        &cfg.crystal,
        &cfg.pump,
        &r.grid,
        &r.dispersion,
        &cfg.jsa,
        exec,
    )?;
    let (jsa, filtered) = match cfg.filter.kind {
        FilterKind::None => (unfiltered.clone(), false),
        FilterKind::Gaussian => (apply_filters(&unfiltered, &cfg.filter)?, true),
    };
    let relative_rate = relative_count_rate(&jsa, &unfiltered)?;
    let jsa_visibility = visibility_from_jsa_with(&jsa, exec)?;
    let overlap = spectral_overlap_with(&jsa, exec)?;
    let x_squared = match cfg.x_source {
        XSource::Exchange => jsa_visibility.clamp(0.0, 1.0),
        XSource::DominantMode => overlap.x_squared,
    };
    let params = ModelParams {
        x: Complex64::new(x_squared.sqrt(), 0.0),
        ..r.params
    };
    let jobs = &cfg.sweep.bases;
    let visibilities = exec
        .map_slice(jobs, |&basis| {
            Ok(ChainVisibilities {
                basis,
                first: polarization_visibility(&params, PassConfig::FirstOnly, basis)?,
                second: polarization_visibility(&params, PassConfig::SecondOnly, basis)?,
                double: polarization_visibility(&params, PassConfig::Double, basis)?,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(ChainSummary {
        x_source: cfg.x_source,
        filtered,
        relative_rate,
        jsa_visibility,
        dominant_mode_x_squared: overlap.x_squared,
        rank1_fidelity: overlap.rank1_fidelity,
        x_squared,
        visibilities,
    })
}
