//! Scenario files: TOML with one `[scenario.<name>]` table per run.
//!
//! Builtin scenarios are always loaded first; a user file adds scenarios or
//! replaces builtin ones of the same name. `--param key=value` overrides are
//! applied to the selected table before it is checked, so they go through the
//! same validation as file contents.

use std::f64::consts::{FRAC_PI_4, TAU};
use std::path::Path;

use collapse_core::wavepacket::{BlochVector, GridSpec};
use collapse_core::ModelParams;
use serde::Deserialize;
use toml::{Table, Value};

use crate::error::CliError;

pub const BUILTIN: &str = include_str!("builtin.toml");

pub const EXPERIMENTS: [&str; 7] = ["fig1", "fig2a", "fig2b", "fig3", "widths", "bath-convergence", "bell"];

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub mass: f64,
    pub omega0: f64,
    pub eta: f64,
    pub hbar: f64,
    pub field: Option<f64>,
    pub displacement: Option<f64>,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { mass: 1.0, omega0: TAU, eta: 2.0, hbar: 1.0, field: None, displacement: None }
    }
}

impl ModelSection {
    pub fn params(&self) -> Result<ModelParams, CliError> {
        let p = match (self.field, self.displacement) {
            (Some(_), Some(_)) => {
                return Err(CliError::InvalidConfig("give either model.field or model.displacement, not both".into()))
            }
            (Some(b), None) => ModelParams::new(self.mass, self.omega0, self.eta, b, self.hbar)?,
            (None, d) => ModelParams::with_displacement(self.mass, self.omega0, self.eta, d.unwrap_or(3.0), self.hbar)?,
        };
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpinSection {
    pub theta: f64,
    pub phi: f64,
}

impl Default for SpinSection {
    fn default() -> Self {
        Self { theta: FRAC_PI_4, phi: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BathSection {
    pub n: usize,
    /// Cutoff in units of `omega0`.
    pub cutoff_ratio: f64,
    /// `k_B T` in energy units.
    pub temperature: f64,
    /// Use the long-time closed form instead of the mode sum.
    pub analytic: bool,
}

impl Default for BathSection {
    fn default() -> Self {
        Self { n: 4096, cutoff_ratio: 50.0, temperature: 0.0, analytic: false }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub q: GridSpec,
    pub t: GridSpec,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { q: GridSpec::default_q(), t: GridSpec::default_t() }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    #[serde(skip)]
    pub name: String,
    pub experiment: Option<String>,
    pub model: ModelSection,
    pub spin: SpinSection,
    pub bath: BathSection,
    pub grid: GridSection,
    pub include_brownian: bool,
    /// fig3: profile times of the early-separation panel.
    pub early: Vec<f64>,
    /// fig3: profile times of the with/without Brownian comparison.
    pub late: Vec<f64>,
    /// bath-convergence: mode counts.
    pub sizes: Vec<usize>,
    /// bath-convergence: evaluation time, `20 / eta` when absent.
    pub t: Option<f64>,
    /// bell: planar setting angles of a, b, c.
    pub angles: [f64; 3],
    pub samples: u64,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: String::new(),
            experiment: None,
            model: ModelSection::default(),
            spin: SpinSection::default(),
            bath: BathSection::default(),
            grid: GridSection::default(),
            include_brownian: true,
            early: vec![0.0, 0.05],
            late: vec![0.0, 2.0],
            sizes: vec![512, 1024, 2048, 4096, 8192],
            t: None,
            angles: [0.0, std::f64::consts::FRAC_PI_2, FRAC_PI_4],
            samples: 1_000_000,
            seed: 20_240_601,
        }
    }
}

impl Scenario {
    pub fn experiment(&self) -> &str {
        self.experiment.as_deref().unwrap_or(&self.name)
    }

    pub fn params(&self) -> Result<ModelParams, CliError> {
        self.model.params()
    }

    pub fn spin(&self) -> Result<BlochVector, CliError> {
        Ok(BlochVector::new(self.spin.theta, self.spin.phi)?)
    }

    fn validate(&self) -> Result<(), CliError> {
        if !EXPERIMENTS.contains(&self.experiment()) {
            return Err(CliError::UnknownExperiment(self.experiment().to_string()));
        }
        self.params()?;
        self.spin()?;
        self.grid.q.validate()?;
        self.grid.t.validate()?;
        if self.grid.q.points < 2 {
            return Err(CliError::InvalidConfig("grid.q needs at least two points".into()));
        }
        if self.bath.n < 2 || !(self.bath.cutoff_ratio > 0.0 && self.bath.cutoff_ratio.is_finite()) {
            return Err(CliError::InvalidConfig("bath needs n >= 2 and a positive finite cutoff_ratio".into()));
        }
        if !(self.bath.temperature >= 0.0 && self.bath.temperature.is_finite()) {
            return Err(CliError::InvalidConfig("bath.temperature must be >= 0".into()));
        }
        if self.early.iter().chain(&self.late).any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(CliError::InvalidConfig("profile times must be finite and >= 0".into()));
        }
        if self.sizes.iter().any(|&n| n < 2) {
            return Err(CliError::InvalidConfig("bath sizes must be >= 2".into()));
        }
        Ok(())
    }
}

/// Short override names and the dotted keys they stand for.
const ALIASES: [(&str, &str); 12] = [
    ("mass", "model.mass"),
    ("omega0", "model.omega0"),
    ("eta", "model.eta"),
    ("hbar", "model.hbar"),
    ("field", "model.field"),
    ("displacement", "model.displacement"),
    ("d", "model.displacement"),
    ("theta", "spin.theta"),
    ("phi", "spin.phi"),
    ("n", "bath.n"),
    ("temperature", "bath.temperature"),
    ("cutoff_ratio", "bath.cutoff_ratio"),
];

#[derive(Debug, Clone)]
pub struct Config {
    scenarios: Table,
}

fn scenario_table(doc: Table, origin: &str) -> Result<Table, CliError> {
    let mut scenarios = Table::new();
    for (key, value) in doc {
        if key != "scenario" {
            return Err(CliError::InvalidConfig(format!("{origin}: unexpected top-level key `{key}`")));
        }
        match value {
            Value::Table(t) => scenarios = t,
            _ => return Err(CliError::InvalidConfig(format!("{origin}: `scenario` must be a table"))),
        }
    }
    Ok(scenarios)
}

impl Config {
    pub fn builtin() -> Self {
        let doc: Table = BUILTIN.parse().expect("builtin scenarios parse");
        Self { scenarios: scenario_table(doc, "builtin").expect("builtin scenarios are well formed") }
    }

    pub fn from_str_with_builtin(text: &str, origin: &str) -> Result<Self, CliError> {
        let mut cfg = Self::builtin();
        let doc: Table = text.parse().map_err(|e| CliError::InvalidConfig(format!("{origin}: {e}")))?;
        for (name, value) in scenario_table(doc, origin)? {
            cfg.scenarios.insert(name, value);
        }
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::builtin()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p.display().to_string(), e))?;
                Self::from_str_with_builtin(&text, &p.display().to_string())
            }
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.scenarios.keys().map(String::as_str)
    }

    /// Resolves `name`, applies overrides and validates.
    pub fn scenario(&self, name: &str, overrides: &[String]) -> Result<Scenario, CliError> {
        let mut table = match self.scenarios.get(name) {
            Some(Value::Table(t)) => t.clone(),
            Some(_) => return Err(CliError::InvalidConfig(format!("scenario `{name}` must be a table"))),
            None if EXPERIMENTS.contains(&name) => Table::new(),
            None => return Err(CliError::UnknownExperiment(name.to_string())),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let mut scenario: Scenario = Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::InvalidConfig(format!("scenario `{name}`: {}", e.message())))?;
        scenario.name = name.to_string();
        scenario.validate()?;
        Ok(scenario)
    }
}

fn parse_value(raw: &str) -> Value {
    let probe = format!("v = {raw}");
    match probe.parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.to_string())),
        Err(_) => Value::String(raw.to_string()),
    }
}

/// Fills in the default axis so a single-field override like
/// `grid.t.max=10` has the other two fields to go with it.
fn seed_grid(table: &mut Table, axis: &str) -> Result<(), CliError> {
    let spec = if axis == "q" { GridSpec::default_q() } else { GridSpec::default_t() };
    let grid = table.entry("grid").or_insert_with(|| Value::Table(Table::new()));
    let Value::Table(grid) = grid else {
        return Err(CliError::InvalidConfig("`grid` is not a table".into()));
    };
    if !grid.contains_key(axis) {
        let mut t = Table::new();
        t.insert("min".into(), Value::Float(spec.min));
        t.insert("max".into(), Value::Float(spec.max));
        t.insert("points".into(), Value::Integer(spec.points as i64));
        grid.insert(axis.to_string(), Value::Table(t));
    }
    Ok(())
}

/// Applies one `key=value` override. Keys are dotted paths or short aliases.
pub fn apply_override(table: &mut Table, raw: &str) -> Result<(), CliError> {
    let (key, value) =
        raw.split_once('=').ok_or_else(|| CliError::InvalidConfig(format!("override `{raw}` is not key=value")))?;
    let key = key.trim();
    let path = ALIASES.iter().find(|(a, _)| *a == key).map(|(_, p)| *p).unwrap_or(key);
    let mut value = parse_value(value.trim());
    // integers are fine wherever floats are expected
    if let Value::Integer(i) = value {
        if !matches!(path, "bath.n" | "samples" | "seed" | "grid.q.points" | "grid.t.points") {
            value = Value::Float(i as f64);
        }
    }
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::InvalidConfig(format!("bad override key `{key}`")));
    }
    if let ["grid", axis @ ("q" | "t"), _] = parts.as_slice() {
        seed_grid(table, axis)?;
    }
    let (last, parents) = parts.split_last().expect("non-empty");
    let mut node = table;
    for p in parents {
        let entry = node.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        node = match entry {
            Value::Table(t) => t,
            _ => return Err(CliError::InvalidConfig(format!("override `{key}`: `{p}` is not a table"))),
        };
    }
    // field and displacement are alternative ways to place the wells
    if path == "model.field" {
        node.remove("displacement");
    } else if path == "model.displacement" {
        node.remove("field");
    }
    node.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_scenarios_all_validate() {
        let cfg = Config::builtin();
        for name in EXPERIMENTS {
            let s = cfg.scenario(name, &[]).unwrap();
            assert_eq!(s.experiment(), name);
        }
        assert_eq!(cfg.names().count(), EXPERIMENTS.len());
    }

    #[test]
    fn figure_parameters_by_default() {
        let s = Config::builtin().scenario("fig1", &[]).unwrap();
        let p = s.params().unwrap();
        assert_eq!(p, ModelParams::figure_defaults());
        assert_eq!(s.grid.q, GridSpec::default_q());
    }

    #[test]
    fn overrides_and_aliases() {
        let cfg = Config::builtin();
        let s = cfg.scenario("widths", &["eta=0".into(), "bath.n=128".into(), "grid.t.max=3".into()]).unwrap();
        assert_eq!(s.model.eta, 0.0);
        assert_eq!(s.bath.n, 128);
        assert_eq!(s.grid.t.max, 3.0);
        let s = cfg.scenario("fig2a", &["grid.t.max=10".into()]).unwrap();
        assert_eq!(s.grid.t, GridSpec::new(0.0, 10.0, 301).unwrap());
        let s = cfg.scenario("fig1", &["field=10".into()]).unwrap();
        assert_eq!(s.params().unwrap().field, 10.0);
    }

    #[test]
    fn rejects_bad_input() {
        let cfg = Config::builtin();
        assert!(matches!(cfg.scenario("fig9", &[]), Err(CliError::UnknownExperiment(_))));
        assert!(matches!(cfg.scenario("fig1", &["nonsense=1".into()]), Err(CliError::InvalidConfig(_))));
        assert!(matches!(cfg.scenario("fig1", &["eta".into()]), Err(CliError::InvalidConfig(_))));
        assert!(matches!(cfg.scenario("fig1", &["theta=4".into()]), Err(CliError::InvalidConfig(_))));
        assert!(matches!(cfg.scenario("fig1", &["grid.q.points=1".into()]), Err(CliError::InvalidConfig(_))));
        assert!(matches!(Config::from_str_with_builtin("x = 1", "inline"), Err(CliError::InvalidConfig(_))));
    }

    #[test]
    fn user_scenarios_extend_and_replace() {
        let text = r#"
            [scenario.slow]
            experiment = "widths"
            model = { eta = 0.5 }

            [scenario.fig1]
            include_brownian = false
        "#;
        let cfg = Config::from_str_with_builtin(text, "inline").unwrap();
        let s = cfg.scenario("slow", &[]).unwrap();
        assert_eq!(s.experiment(), "widths");
        assert_eq!(s.model.eta, 0.5);
        assert!(!cfg.scenario("fig1", &[]).unwrap().include_brownian);
        let bad = Config::from_str_with_builtin("[scenario.x]\nexperiment = \"fig7\"\n", "inline").unwrap();
        assert!(matches!(bad.scenario("x", &[]), Err(CliError::UnknownExperiment(_))));
    }
}
