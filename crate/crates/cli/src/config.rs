//! Scenario files: JSON text, leaf overrides, typed decoding and validation.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use quantum_work::casimir::{self, Geometry};
use quantum_work::charfunc;
use quantum_work::oracle::{OracleConfig, Stepper};
use quantum_work::{DriveProtocol, ModeSpec, QuadratureConfig, C64};

/// Scenario used when no `--config` is given.
pub const DEFAULT_SCENARIO: &str = include_str!("../scenarios/default.json");

/// A configuration problem, located by its field path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

/// Inverse temperature: a positive number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Beta {
    Finite(f64),
    Named(InfiniteBeta),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfiniteBeta {
    #[serde(rename = "inf")]
    Inf,
}

impl Beta {
    pub fn value(self) -> f64 {
        match self {
            Beta::Finite(b) => b,
            Beta::Named(InfiniteBeta::Inf) => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateConfig {
    Number { n: u32 },
    Thermal { beta: Beta },
    Coherent { amplitude: C64 },
}

impl StateConfig {
    pub fn to_state(&self) -> charfunc::InitialState<f64> {
        match *self {
            StateConfig::Number { n } => charfunc::InitialState::Number { n },
            StateConfig::Thermal { beta } => charfunc::InitialState::Thermal { beta: beta.value() },
            StateConfig::Coherent { amplitude } => charfunc::InitialState::Coherent { amplitude },
        }
    }
}

/// `points` evenly spaced values from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points).map(|k| self.start + step * k as f64).collect()
    }

    fn validate(&self, path: &str) -> Result<(), ConfigError> {
        if self.points == 0 {
            return Err(ConfigError::new(format!("{path}.points"), "grid must not be empty"));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(ConfigError::new(path, "grid bounds must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSettings {
    pub dim: usize,
    pub dt: Option<f64>,
    pub leak_tol: f64,
    pub tail_tol: f64,
    pub stepper: Stepper,
    /// `verify` fails when any |ΔG| exceeds this.
    pub tolerance: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        let c = OracleConfig::<f64>::default();
        Self {
            dim: c.dim,
            dt: c.dt,
            leak_tol: c.leak_tol,
            tail_tol: c.tail_tol,
            stepper: c.stepper,
            tolerance: 1e-6,
        }
    }
}

impl OracleSettings {
    pub fn to_config(&self) -> OracleConfig<f64> {
        OracleConfig {
            dim: self.dim,
            dt: self.dt,
            leak_tol: self.leak_tol,
            tail_tol: self.tail_tol,
            stepper: self.stepper,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightSettings {
    pub n: u32,
    pub z_max: f64,
    pub z_points: usize,
    /// Defaults to `−n`.
    pub s_min: Option<i64>,
    /// Defaults to `n`.
    pub s_max: Option<i64>,
}

impl Default for WeightSettings {
    fn default() -> Self {
        Self {
            n: 3,
            z_max: 12.0,
            z_points: 121,
            s_min: None,
            s_max: None,
        }
    }
}

impl WeightSettings {
    pub fn s_range(&self) -> std::ops::RangeInclusive<i64> {
        let n = self.n as i64;
        self.s_min.unwrap_or(-n)..=self.s_max.unwrap_or(n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CasimirSettings {
    pub geometry: Geometry,
    pub initial_separation: f64,
    pub separations: Vec<f64>,
    pub beta: Beta,
    /// First regulator as a fraction of the separation.
    pub regulator_fraction: f64,
    pub levels: usize,
    pub mode_cutoff: usize,
}

impl Default for CasimirSettings {
    fn default() -> Self {
        Self {
            geometry: Geometry::Plates3d,
            initial_separation: 1.0,
            separations: vec![0.5, 1.0, 2.0],
            beta: Beta::Named(InfiniteBeta::Inf),
            regulator_fraction: 0.2,
            levels: 5,
            mode_cutoff: 1_000_000,
        }
    }
}

impl CasimirSettings {
    pub fn cavity(&self, d: f64) -> quantum_work::Result<casimir::CavitySpec<f64>> {
        let c = casimir::CavitySpec {
            geometry: self.geometry,
            separation: d,
            regulator: self.regulator_fraction * d,
            mode_cutoff: self.mode_cutoff,
            levels: self.levels,
        };
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Evaluation {
    pub t: f64,
    pub t_grid: Grid,
    pub nu_grid: Grid,
    pub beta: Beta,
    pub cumulant_order: usize,
    /// Base finite-difference step; chosen from the fastest mode if absent.
    pub fd_step: Option<f64>,
    /// Tail mass allowed when truncating work distributions.
    pub eps: f64,
    pub quadrature: QuadratureConfig,
    pub oracle: OracleSettings,
    pub weights: WeightSettings,
    pub casimir: CasimirSettings,
}

impl Default for Evaluation {
    fn default() -> Self {
        Self {
            t: 5.0,
            t_grid: Grid {
                start: 0.0,
                stop: 6.0,
                points: 61,
            },
            nu_grid: Grid {
                start: -3.0,
                stop: 3.0,
                points: 64,
            },
            beta: Beta::Finite(1.0),
            cumulant_order: 3,
            fd_step: None,
            eps: 1e-10,
            quadrature: QuadratureConfig::default(),
            oracle: OracleSettings::default(),
            weights: WeightSettings::default(),
            casimir: CasimirSettings::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    #[serde(rename = "json_lines")]
    #[value(name = "jsonl")]
    JsonLines,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSettings {
    pub format: Format,
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub modes: Vec<ModeSpec>,
    pub protocol: DriveProtocol,
    pub states: Vec<StateConfig>,
    #[serde(default)]
    pub evaluation: Evaluation,
    #[serde(default)]
    pub output: OutputSettings,
}

/// A decoded scenario together with the SHA-256 of its effective JSON.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: ScenarioConfig,
    pub sha256: String,
}

impl ScenarioConfig {
    pub fn states(&self) -> Vec<charfunc::InitialState<f64>> {
        self.states.iter().map(StateConfig::to_state).collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.modes.is_empty() {
            return Err(ConfigError::new("modes", "at least one mode is required"));
        }
        if self.states.len() != self.modes.len() {
            return Err(ConfigError::new(
                "states",
                format!("expected one state per mode ({}), found {}", self.modes.len(), self.states.len()),
            ));
        }
        for (i, m) in self.modes.iter().enumerate() {
            m.frequency
                .validate()
                .map_err(|e| ConfigError::new(format!("modes[{i}].frequency"), e))?;
            if !m.coupling.re.is_finite() || !m.coupling.im.is_finite() {
                return Err(ConfigError::new(format!("modes[{i}].coupling"), "coupling must be finite"));
            }
        }
        self.protocol.validate().map_err(|e| ConfigError::new("protocol", e))?;
        for (i, s) in self.states.iter().enumerate() {
            match *s {
                StateConfig::Thermal { beta } if !(beta.value() > 0.0) => {
                    return Err(ConfigError::new(format!("states[{i}].beta"), "β must be > 0 or \"inf\""));
                }
                StateConfig::Coherent { amplitude } if !amplitude.re.is_finite() || !amplitude.im.is_finite() => {
                    return Err(ConfigError::new(format!("states[{i}].amplitude"), "amplitude must be finite"));
                }
                _ => {}
            }
        }
        let ev = &self.evaluation;
        if !(ev.t >= 0.0) || !ev.t.is_finite() {
            return Err(ConfigError::new("evaluation.t", "time must be finite and ≥ 0"));
        }
        ev.t_grid.validate("evaluation.t_grid")?;
        if ev.t_grid.start < 0.0 || ev.t_grid.stop < 0.0 {
            return Err(ConfigError::new("evaluation.t_grid", "times must be ≥ 0"));
        }
        ev.nu_grid.validate("evaluation.nu_grid")?;
        if !(ev.beta.value() > 0.0) {
            return Err(ConfigError::new("evaluation.beta", "β must be > 0 or \"inf\""));
        }
        if !(1..=4).contains(&ev.cumulant_order) {
            return Err(ConfigError::new("evaluation.cumulant_order", "order must be within 1..=4"));
        }
        if matches!(ev.fd_step, Some(h) if !(h > 0.0)) {
            return Err(ConfigError::new("evaluation.fd_step", "step must be > 0"));
        }
        if !(ev.eps > 0.0 && ev.eps < 1.0) {
            return Err(ConfigError::new("evaluation.eps", "tail tolerance must lie in (0, 1)"));
        }
        ev.oracle
            .to_config()
            .validate()
            .map_err(|e| ConfigError::new("evaluation.oracle", e))?;
        let w = &ev.weights;
        if w.z_points == 0 {
            return Err(ConfigError::new("evaluation.weights.z_points", "grid must not be empty"));
        }
        if !(w.z_max >= 0.0) || !w.z_max.is_finite() {
            return Err(ConfigError::new("evaluation.weights.z_max", "z_max must be finite and ≥ 0"));
        }
        if w.s_range().is_empty() {
            return Err(ConfigError::new("evaluation.weights", "s_min exceeds s_max"));
        }
        let c = &ev.casimir;
        if c.separations.is_empty() {
            return Err(ConfigError::new("evaluation.casimir.separations", "list must not be empty"));
        }
        if !(c.beta.value() > 0.0) {
            return Err(ConfigError::new("evaluation.casimir.beta", "β must be > 0 or \"inf\""));
        }
        c.cavity(c.initial_separation)
            .map_err(|e| ConfigError::new("evaluation.casimir.initial_separation", e))?;
        for (i, &d) in c.separations.iter().enumerate() {
            c.cavity(d)
                .map_err(|e| ConfigError::new(format!("evaluation.casimir.separations[{i}]"), e))?;
        }
        Ok(())
    }
}

/// Parses an override value: JSON if it parses, otherwise a bare string.
fn parse_leaf(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Applies `a.b.0.c=value` to a JSON document, creating missing object keys.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<(), ConfigError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| ConfigError::new(assignment, "override must have the form path=value"))?;
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(ConfigError::new(path, "empty path segment"));
    }
    let mut node = doc;
    for (depth, key) in keys.iter().enumerate() {
        let here = keys[..=depth].join(".");
        node = match node {
            Value::Object(map) => map.entry(key.to_string()).or_insert(Value::Null),
            Value::Array(items) => {
                let len = items.len();
                let idx: usize = key
                    .parse()
                    .map_err(|_| ConfigError::new(here.clone(), "expected an array index"))?;
                items
                    .get_mut(idx)
                    .ok_or_else(|| ConfigError::new(here.clone(), format!("index out of range (length {len})")))?
            }
            Value::Null => {
                *node = Value::Object(Default::default());
                match node {
                    Value::Object(map) => map.entry(key.to_string()).or_insert(Value::Null),
                    _ => unreachable!(),
                }
            }
            _ => return Err(ConfigError::new(here, "cannot descend into a scalar")),
        };
    }
    *node = parse_leaf(raw);
    Ok(())
}

/// Reads, overrides, decodes and validates a scenario.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Loaded, ConfigError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", p.display())))?,
        None => DEFAULT_SCENARIO.to_string(),
    };
    let mut doc: Value = serde_json::from_str(&text).map_err(|e| ConfigError::new("", format!("invalid JSON: {e}")))?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    let canonical = serde_json::to_string(&doc).expect("JSON values serialise");
    let config: ScenarioConfig = serde_path_to_error::deserialize(&doc).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::new(if path == "." { String::new() } else { path }, e.into_inner())
    })?;
    config.validate()?;
    let sha256 = format!("{:x}", Sha256::digest(canonical.as_bytes()));
    Ok(Loaded { config, sha256 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scenario_is_valid() {
        let l = load(None, &[]).unwrap();
        assert_eq!(l.config.modes.len(), l.config.states.len());
        assert_eq!(l.sha256.len(), 64);
    }

    #[test]
    fn overrides_reach_nested_leaves() {
        let l = load(None, &["evaluation.t=7.5".into(), "modes.0.coupling.1=0.25".into()]).unwrap();
        assert_eq!(l.config.evaluation.t, 7.5);
        assert_eq!(l.config.modes[0].coupling.im, 0.25);
        assert_ne!(l.sha256, load(None, &[]).unwrap().sha256);
    }

    #[test]
    fn infinite_beta_is_accepted() {
        let l = load(None, &["states.0={\"kind\":\"thermal\",\"beta\":\"inf\"}".into()]).unwrap();
        assert_eq!(l.config.states()[0], charfunc::InitialState::Thermal { beta: f64::INFINITY });
    }

    #[test]
    fn errors_carry_field_paths() {
        let e = load(None, &["modes=[]".into()]).unwrap_err();
        assert_eq!(e.path, "modes");
        let e = load(None, &["modes.0.frequency.omega=\"fast\"".into()]).unwrap_err();
        assert_eq!(e.path, "modes[0].frequency");
        let e = load(None, &["evaluation.nu_grid.points=0".into()]).unwrap_err();
        assert_eq!(e.path, "evaluation.nu_grid.points");
        let e = load(None, &["evaluation.t.x=1".into()]).unwrap_err();
        assert_eq!(e.path, "evaluation.t.x");
    }
}
