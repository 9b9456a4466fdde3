//! Run configuration: JSON parsing, baseline defaults and provenance.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use pinning_core::nlse::{ControlPoint, GroundStateOptions};
use pinning_core::optics_map::{validate_config, OpticalConfig};
use pinning_core::sweep::{AxisRange, GridSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("unknown key at line {line}, column {column}: {message}")]
    UnknownKey { line: usize, column: usize, message: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid value for {field}: {message}")]
    Invalid { field: String, message: String },
}

/// Optics section with every field optional; gaps are filled from the
/// baseline parameter set.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OpticsInput {
    gamma_total: Option<f64>,
    gamma_1d_ratio: Option<f64>,
    delta0: Option<f64>,
    delta_small: Option<f64>,
    delta_p: Option<f64>,
    omega: Option<f64>,
    n0: Option<f64>,
    n1_fraction: Option<f64>,
    n_ph: Option<f64>,
    delta_omega: Option<f64>,
    v: Option<f64>,
    fiber_length: Option<f64>,
}

/// Which transition line `crossing` locates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossingModel {
    #[serde(rename = "BH")]
    BoseHubbard,
    #[serde(rename = "SG")]
    SineGordon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrossingSection {
    /// Ω/Γ search bracket at the configured Δ_p.
    pub bracket: (f64, f64),
    /// Ω/Γ samples of the J, U, U/J curves.
    pub curve: AxisRange,
    pub model: CrossingModel,
}

impl Default for CrossingSection {
    fn default() -> Self {
        Self { bracket: (0.5, 3.0), curve: AxisRange::new(0.5, 3.0, 251), model: CrossingModel::BoseHubbard }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub delta_p_range: AxisRange,
    pub omega_range: AxisRange,
    pub crossing: CrossingSection,
}

impl Default for SweepSection {
    fn default() -> Self {
        let grid = GridSpec::default_for(OpticalConfig::baseline());
        Self { delta_p_range: grid.delta_p_range, omega_range: grid.omega_range, crossing: CrossingSection::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    Uniform,
    GroundState,
}

/// NLSE run. Depth, interaction and loss left unset are derived from the
/// optics section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NlseSection {
    pub v1_over_er: Option<f64>,
    pub g_int: Option<f64>,
    pub kappa_dimless: Option<f64>,
    pub n_periods: usize,
    pub grid_points: usize,
    pub schedule: Vec<ControlPoint>,
    pub dt: f64,
    pub steps: usize,
    pub record_every: usize,
    pub initial: InitialState,
    pub ground_state: GroundStateOptions,
}

impl Default for NlseSection {
    fn default() -> Self {
        Self {
            v1_over_er: None,
            g_int: None,
            kappa_dimless: None,
            n_periods: 8,
            grid_points: 256,
            schedule: Vec::new(),
            dt: 1e-3,
            steps: 10_000,
            record_every: 100,
            initial: InitialState::GroundState,
            ground_state: GroundStateOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EdSection {
    pub sizes: Vec<usize>,
    pub ratios: Vec<f64>,
    pub n_max: usize,
    pub periodic: bool,
}

impl Default for EdSection {
    fn default() -> Self {
        Self { sizes: vec![4, 6], ratios: (1..=8).map(f64::from).collect(), n_max: 4, periodic: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub format: Format,
    pub emit_plot_script: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: PathBuf::from("out"), format: Format::Csv, emit_plot_script: false }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    optics: OpticsInput,
    #[serde(default)]
    sweep: Option<SweepSection>,
    #[serde(default)]
    nlse: Option<NlseSection>,
    #[serde(default)]
    ed: Option<EdSection>,
    #[serde(default)]
    output: Option<OutputSection>,
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub optics: OpticalConfig,
    pub sweep: SweepSection,
    pub nlse: NlseSection,
    pub ed: EdSection,
    pub output: OutputSection,
    /// One line per default that was applied.
    #[serde(skip)]
    pub provenance: Vec<String>,
}

impl RunConfig {
    pub fn grid(&self) -> GridSpec {
        GridSpec { delta_p_range: self.sweep.delta_p_range, omega_range: self.sweep.omega_range, base: self.optics }
    }

    /// The resolved configuration as JSON, without the output directory.
    pub fn hashed_value(&self) -> serde_json::Value {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(out) = value.get_mut("output").and_then(|o| o.as_object_mut()) {
            out.remove("directory");
        }
        value
    }

    /// SHA-256 of the resolved configuration without the output directory,
    /// so identical runs into different directories carry the same hash.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.hashed_value().to_string().as_bytes());
        let mut hex = String::with_capacity(64);
        for b in digest.iter() {
            write!(hex, "{b:02x}").unwrap();
        }
        hex
    }
}

fn json_error(e: serde_json::Error) -> ConfigError {
    let (line, column, message) = (e.line(), e.column(), e.to_string());
    if message.contains("unknown field") {
        ConfigError::UnknownKey { line, column, message }
    } else {
        ConfigError::Parse { line, column, message }
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_owned(), source })?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(json_error)?;
    let mut provenance = Vec::new();
    let optics = resolve_optics(&raw.optics, &mut provenance);
    validate_config(&optics).map_err(|e| ConfigError::Invalid { field: "optics".into(), message: e.to_string() })?;

    let mut section = |name: &str, present: bool| {
        if !present {
            provenance.push(format!("{name}: section absent, defaults applied"));
        }
    };
    section("sweep", raw.sweep.is_some());
    section("nlse", raw.nlse.is_some());
    section("ed", raw.ed.is_some());
    section("output", raw.output.is_some());

    let cfg = RunConfig {
        optics,
        sweep: raw.sweep.unwrap_or_default(),
        nlse: raw.nlse.unwrap_or_default(),
        ed: raw.ed.unwrap_or_default(),
        output: raw.output.unwrap_or_default(),
        provenance,
    };
    check_sections(&cfg)?;
    Ok(cfg)
}

fn resolve_optics(input: &OpticsInput, provenance: &mut Vec<String>) -> OpticalConfig {
    let base = OpticalConfig::baseline();
    let mut pick = |name: &str, value: Option<f64>, default: f64| match value {
        Some(v) => v,
        None => {
            provenance.push(format!("optics.{name} = {default} (baseline default)"));
            default
        }
    };
    OpticalConfig {
        gamma_total: pick("gamma_total", input.gamma_total, base.gamma_total),
        gamma_1d_ratio: pick("gamma_1d_ratio", input.gamma_1d_ratio, base.gamma_1d_ratio),
        delta0: pick("delta0", input.delta0, base.delta0),
        delta_small: pick("delta_small", input.delta_small, base.delta_small),
        delta_p: pick("delta_p", input.delta_p, base.delta_p),
        omega: pick("omega", input.omega, base.omega),
        n0: pick("n0", input.n0, base.n0),
        n1_fraction: pick("n1_fraction", input.n1_fraction, base.n1_fraction),
        n_ph: pick("n_ph", input.n_ph, base.n_ph),
        delta_omega: pick("delta_omega", input.delta_omega, base.delta_omega),
        v: pick("v", input.v, base.v),
        fiber_length: pick("fiber_length", input.fiber_length, base.fiber_length),
    }
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.into(), message: message.into() }
}

fn check_sections(cfg: &RunConfig) -> Result<(), ConfigError> {
    cfg.grid().validate().map_err(|e| invalid("sweep", e.to_string()))?;
    let c = &cfg.sweep.crossing;
    if !(c.bracket.0 < c.bracket.1) {
        return Err(invalid("sweep.crossing.bracket", "expected [lo, hi] with lo < hi"));
    }
    if c.curve.count < 2 || !(c.curve.min < c.curve.max) {
        return Err(invalid("sweep.crossing.curve", "expected min < max and count >= 2"));
    }
    let n = &cfg.nlse;
    if !(n.dt > 0.0 && n.dt.is_finite()) {
        return Err(invalid("nlse.dt", "must be positive"));
    }
    let e = &cfg.ed;
    if e.sizes.iter().any(|&l| l < 2) || e.n_max < 1 {
        return Err(invalid("ed", "sizes must be >= 2 and n_max >= 1"));
    }
    if e.ratios.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(invalid("ed.ratios", "must be finite and non-negative"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_baseline() {
        let cfg = parse_config_str("{}").unwrap();
        assert_eq!(cfg.optics, OpticalConfig::baseline());
        assert_eq!(cfg.provenance.iter().filter(|l| l.starts_with("optics.")).count(), 12);
    }

    #[test]
    fn empty_optics_section_logs_every_default() {
        let cfg = parse_config_str(r#"{"optics": {}}"#).unwrap();
        assert_eq!(cfg.optics, OpticalConfig::baseline());
        assert!(cfg.provenance.iter().any(|l| l.starts_with("optics.gamma_total = 20000000")));
    }

    #[test]
    fn single_override() {
        let cfg = parse_config_str(r#"{"optics": {"delta_p": 50}}"#).unwrap();
        assert_eq!(cfg.optics, OpticalConfig::baseline().with_control(50.0, 1.0));
        assert!(!cfg.provenance.iter().any(|l| l.starts_with("optics.delta_p")));
        assert_eq!(cfg.provenance.iter().filter(|l| l.starts_with("optics.")).count(), 11);
    }

    #[test]
    fn out_of_range_fraction_is_rejected() {
        let err = parse_config_str(r#"{"optics": {"n1_fraction": 1.5}}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { .. }), "{err}");
    }

    #[test]
    fn unknown_keys_are_reported_with_position() {
        let err = parse_config_str("{\n  \"optics\": {\n    \"omgea\": 1.0\n  }\n}").unwrap_err();
        match err {
            ConfigError::UnknownKey { line, .. } => assert_eq!(line, 3),
            other => panic!("{other}"),
        }
        assert!(matches!(parse_config_str(r#"{"plots": {}}"#), Err(ConfigError::UnknownKey { .. })));
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_config_str("{\n \"optics\": {\"omega\": }\n}") {
            Err(ConfigError::Parse { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hash_ignores_directory_only() {
        let a = parse_config_str(r#"{"output": {"directory": "a"}}"#).unwrap();
        let b = parse_config_str(r#"{"output": {"directory": "b"}}"#).unwrap();
        let c = parse_config_str(r#"{"optics": {"omega": 1.1}}"#).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
