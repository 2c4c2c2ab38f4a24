//! Run configuration: a flat JSON object whose keys double as long flags.
//!
//! Values are applied in order: defaults, then the file, then flags. Every
//! error names the key it came from.

use std::path::{Path, PathBuf};

use herdfield_core::sweep::{
    BaseParams, PhasePredicate, SweepSetup, DEFAULT_HORIZON, DEFAULT_PROBES,
};
use herdfield_core::{Grid, ModelParams, RawParams, SelectionRule, SolveOptions, TypeMeanField};
use serde_json::{Map, Value};

use crate::error::ConfigError;
use crate::format::to_json_string;

/// Subcommands of the tool.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Solve,
    Simulate,
    Sweep,
    Threshold,
    Figures,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Threshold => "threshold",
            Command::Figures => "figures",
        }
    }
}

/// Every recognised key, in serialization order.
pub const KEYS: [&str; 22] = [
    "alpha",
    "delta",
    "p1",
    "p2",
    "grid",
    "tol",
    "max_iter",
    "selection",
    "horizon",
    "z0",
    "probes",
    "population",
    "seeds",
    "alpha_start",
    "alpha_stop",
    "alpha_step",
    "predicate",
    "lo",
    "hi",
    "threshold_tol",
    "out_dir",
    "equilibrium",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub alpha: Option<f64>,
    pub delta: f64,
    pub p1: f64,
    pub p2: f64,
    pub grid: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub selection: SelectionRule,
    pub horizon: usize,
    pub z0: f64,
    pub probes: Vec<f64>,
    /// Finite population size for `simulate`; 0 skips the agent runs.
    pub population: usize,
    pub seeds: Vec<u64>,
    pub alpha_start: f64,
    pub alpha_stop: f64,
    pub alpha_step: f64,
    pub predicate: Option<PhasePredicate>,
    pub lo: f64,
    pub hi: f64,
    pub threshold_tol: f64,
    pub out_dir: PathBuf,
    /// Previously written equilibrium, read by `figures` and `simulate`.
    pub equilibrium: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let base = BaseParams::default();
        RunConfig {
            alpha: None,
            delta: base.delta,
            p1: base.p1,
            p2: base.p2,
            grid: Grid::DEFAULT_POINTS,
            tol: SolveOptions::DEFAULT_TOL,
            max_iter: SolveOptions::DEFAULT_MAX_ITER,
            selection: SelectionRule::default(),
            horizon: DEFAULT_HORIZON,
            z0: 0.5,
            probes: DEFAULT_PROBES.to_vec(),
            population: 0,
            seeds: vec![0],
            alpha_start: 0.0,
            alpha_stop: 1.0,
            alpha_step: 0.02,
            predicate: None,
            lo: 0.0,
            hi: 1.0,
            threshold_tol: 0.01,
            out_dir: PathBuf::from("."),
            equilibrium: None,
        }
    }
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_owned(),
        reason: reason.into(),
    }
}

fn as_f64(key: &str, v: &Value) -> Result<f64, ConfigError> {
    let x = match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    };
    x.filter(|x: &f64| x.is_finite())
        .ok_or_else(|| invalid(key, format!("expected a finite number, got {v}")))
}

fn as_usize(key: &str, v: &Value) -> Result<usize, ConfigError> {
    let x = match v {
        Value::Number(n) => n.as_u64().and_then(|n| usize::try_from(n).ok()),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    };
    x.ok_or_else(|| invalid(key, format!("expected a non-negative integer, got {v}")))
}

fn as_u64(key: &str, v: &Value) -> Result<u64, ConfigError> {
    let x = match v {
        Value::Number(n) => n.as_u64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    };
    x.ok_or_else(|| invalid(key, format!("expected a non-negative integer, got {v}")))
}

fn as_str<'a>(key: &str, v: &'a Value) -> Result<&'a str, ConfigError> {
    v.as_str()
        .ok_or_else(|| invalid(key, format!("expected a string, got {v}")))
}

/// Arrays, or comma separated strings as given on the command line.
fn as_list<T>(
    key: &str,
    v: &Value,
    item: fn(&str, &Value) -> Result<T, ConfigError>,
) -> Result<Vec<T>, ConfigError> {
    match v {
        Value::Array(items) => items.iter().map(|x| item(key, x)).collect(),
        Value::String(s) => s
            .split(',')
            .filter(|part| !part.trim().is_empty())
            .map(|part| item(key, &Value::String(part.to_owned())))
            .collect(),
        other => Ok(vec![item(key, other)?]),
    }
}

impl RunConfig {
    /// Sets one key from a JSON value. Strings are accepted for numeric keys.
    pub fn set(&mut self, key: &str, v: &Value) -> Result<(), ConfigError> {
        match key {
            "alpha" => self.alpha = Some(as_f64(key, v)?),
            "delta" => self.delta = as_f64(key, v)?,
            "p1" => self.p1 = as_f64(key, v)?,
            "p2" => self.p2 = as_f64(key, v)?,
            "grid" => self.grid = as_usize(key, v)?,
            "tol" => self.tol = as_f64(key, v)?,
            "max_iter" => self.max_iter = as_usize(key, v)?,
            "selection" => {
                let s = as_str(key, v)?;
                self.selection = s.parse().map_err(|_| {
                    let names: Vec<_> = SelectionRule::ALL.iter().map(|r| r.as_str()).collect();
                    invalid(
                        key,
                        format!("unknown rule {s:?}, expected one of {}", names.join(", ")),
                    )
                })?;
            }
            "horizon" => self.horizon = as_usize(key, v)?,
            "z0" => self.z0 = as_f64(key, v)?,
            "probes" => self.probes = as_list(key, v, as_f64)?,
            "population" => self.population = as_usize(key, v)?,
            "seeds" => self.seeds = as_list(key, v, as_u64)?,
            "alpha_start" => self.alpha_start = as_f64(key, v)?,
            "alpha_stop" => self.alpha_stop = as_f64(key, v)?,
            "alpha_step" => self.alpha_step = as_f64(key, v)?,
            "predicate" => {
                let s = as_str(key, v)?;
                self.predicate = Some(s.parse().map_err(|_| {
                    invalid(
                        key,
                        format!("unknown predicate {s:?}, expected herd-always, herd-never or initial-condition-dependent"),
                    )
                })?);
            }
            "lo" => self.lo = as_f64(key, v)?,
            "hi" => self.hi = as_f64(key, v)?,
            "threshold_tol" => self.threshold_tol = as_f64(key, v)?,
            "out_dir" => self.out_dir = PathBuf::from(as_str(key, v)?),
            "equilibrium" => self.equilibrium = Some(PathBuf::from(as_str(key, v)?)),
            other => return Err(ConfigError::UnknownKey(other.to_owned())),
        }
        Ok(())
    }

    /// Applies a flat JSON object key by key.
    pub fn apply_json(&mut self, text: &str) -> Result<(), ConfigError> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        let Value::Object(map) = value else {
            return Err(ConfigError::Syntax("top level must be an object".into()));
        };
        for (key, v) in &map {
            self.set(key, v)?;
        }
        Ok(())
    }

    /// Applies command-line flag values, given as raw strings.
    pub fn apply_flags<'a>(
        &mut self,
        flags: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<(), ConfigError> {
        for (key, raw) in flags {
            self.set(key, &Value::String(raw.to_owned()))?;
        }
        Ok(())
    }

    /// Checks value ranges and model invariants.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let alpha = self.alpha.unwrap_or(0.0);
        herdfield_core::validate_params(RawParams {
            p1: self.p1,
            p2: self.p2,
            alpha,
            delta: self.delta,
        })
        .map_err(|e| {
            use herdfield_core::ParamError as P;
            let key = match e {
                P::NotFinite { name, .. } => name,
                P::NegativeP1 { .. } | P::P1NotBelowP2 { .. } => "p1",
                P::P2NotBelowHalf { .. } => "p2",
                P::AlphaOutOfRange { .. } => "alpha",
                P::DeltaOutOfRange { .. } => "delta",
            };
            invalid(key, e.to_string())
        })?;
        if self.grid < 2 {
            return Err(invalid("grid", "needs at least 2 points"));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(invalid("tol", "must be positive"));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.z0) {
            return Err(invalid("z0", "must lie in [0, 1]"));
        }
        if self.probes.is_empty() {
            return Err(invalid("probes", "must not be empty"));
        }
        if let Some(p) = self.probes.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(invalid("probes", format!("{p} is outside [0, 1]")));
        }
        if self.seeds.is_empty() {
            return Err(invalid("seeds", "must not be empty"));
        }
        for (key, v) in [
            ("alpha_start", self.alpha_start),
            ("alpha_stop", self.alpha_stop),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(key, "must lie in [0, 1]"));
            }
        }
        if self.alpha_stop < self.alpha_start {
            return Err(invalid("alpha_stop", "must not be below alpha_start"));
        }
        if self.alpha_step.is_nan() || self.alpha_step <= 0.0 {
            return Err(invalid("alpha_step", "must be positive"));
        }
        for (key, v) in [("lo", self.lo), ("hi", self.hi)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(key, "must lie in [0, 1]"));
            }
        }
        if self.threshold_tol.is_nan() || self.threshold_tol <= 0.0 {
            return Err(invalid("threshold_tol", "must be positive"));
        }
        Ok(())
    }

    /// Keys a subcommand cannot run without.
    pub fn check_required(&self, command: Command) -> Result<(), ConfigError> {
        match command {
            Command::Solve if self.alpha.is_none() => Err(ConfigError::Missing("alpha")),
            Command::Simulate if self.alpha.is_none() && self.equilibrium.is_none() => {
                Err(ConfigError::Missing("alpha"))
            }
            Command::Threshold if self.predicate.is_none() => {
                Err(ConfigError::Missing("predicate"))
            }
            Command::Figures if self.equilibrium.is_none() => {
                Err(ConfigError::Missing("equilibrium"))
            }
            _ => Ok(()),
        }
    }

    pub fn base(&self) -> BaseParams {
        BaseParams {
            p1: self.p1,
            p2: self.p2,
            delta: self.delta,
        }
    }

    /// Full model parameters; `None` without `alpha`.
    pub fn params(&self) -> Option<ModelParams> {
        let alpha = self.alpha?;
        ModelParams::new(self.p1, self.p2, alpha, self.delta).ok()
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.grid).expect("validated grid")
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            selection: self.selection,
            ..SolveOptions::default()
        }
    }

    pub fn sweep_setup(&self) -> SweepSetup {
        let mut setup = SweepSetup::new(self.base(), self.grid());
        setup.probes = self
            .probes
            .iter()
            .map(|&z| TypeMeanField::new(z).expect("validated probe"))
            .collect();
        setup.horizon = self.horizon;
        setup.solve = self.solve_options();
        setup
    }

    /// The alpha list of a sweep.
    pub fn alphas(&self) -> Vec<f64> {
        herdfield_core::sweep::alpha_range(self.alpha_start, self.alpha_stop, self.alpha_step)
    }

    /// Flat JSON object with every set key; parses back to the same config.
    pub fn to_json(&self) -> String {
        let mut map = Map::new();
        let num = |x: f64| Value::from(x);
        let path = |p: &Path| Value::String(p.to_string_lossy().into_owned());
        if let Some(a) = self.alpha {
            map.insert("alpha".into(), num(a));
        }
        map.insert("delta".into(), num(self.delta));
        map.insert("p1".into(), num(self.p1));
        map.insert("p2".into(), num(self.p2));
        map.insert("grid".into(), Value::from(self.grid));
        map.insert("tol".into(), num(self.tol));
        map.insert("max_iter".into(), Value::from(self.max_iter));
        map.insert("selection".into(), Value::from(self.selection.as_str()));
        map.insert("horizon".into(), Value::from(self.horizon));
        map.insert("z0".into(), num(self.z0));
        map.insert("probes".into(), Value::from(self.probes.clone()));
        map.insert("population".into(), Value::from(self.population));
        map.insert("seeds".into(), Value::from(self.seeds.clone()));
        map.insert("alpha_start".into(), num(self.alpha_start));
        map.insert("alpha_stop".into(), num(self.alpha_stop));
        map.insert("alpha_step".into(), num(self.alpha_step));
        if let Some(p) = self.predicate {
            map.insert("predicate".into(), Value::from(p.as_str()));
        }
        map.insert("lo".into(), num(self.lo));
        map.insert("hi".into(), num(self.hi));
        map.insert("threshold_tol".into(), num(self.threshold_tol));
        map.insert("out_dir".into(), path(&self.out_dir));
        if let Some(p) = &self.equilibrium {
            map.insert("equilibrium".into(), path(p));
        }
        to_json_string(&Value::Object(map))
    }
}

/// Builds the configuration for `command` from an optional file and flag
/// overrides.
pub fn parse_config<'a>(
    command: Command,
    file: Option<&Path>,
    flags: impl IntoIterator<Item = (&'a str, &'a str)>,
) -> Result<RunConfig, ConfigError> {
    let mut config = RunConfig::default();
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        config.apply_json(&text)?;
    }
    config.apply_flags(flags)?;
    config.validate()?;
    config.check_required(command)?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_only_gives_defaults() {
        let c = parse_config(Command::Solve, None, [("alpha", "0.1")]).unwrap();
        assert_eq!(c.alpha, Some(0.1));
        assert_eq!((c.delta, c.p1, c.p2), (0.9, 0.1, 0.3));
        assert_eq!(
            (c.grid, c.tol, c.max_iter, c.horizon, c.z0),
            (1001, 1e-9, 10_000, 500, 0.5)
        );
    }

    #[test]
    fn empty_input_requires_alpha() {
        let err = parse_config(Command::Solve, None, []).unwrap_err();
        assert!(matches!(err, ConfigError::Missing("alpha")));
        assert!(err.to_string().contains("alpha"));
        // the sweep does not need one
        assert!(parse_config(Command::Sweep, None, []).is_ok());
    }

    #[test]
    fn flags_override_file() {
        let mut c = RunConfig::default();
        c.apply_json(r#"{"alpha": 0.2, "grid": 51}"#).unwrap();
        c.apply_flags([("alpha", "0.9")]).unwrap();
        assert_eq!(c.alpha, Some(0.9));
        assert_eq!(c.grid, 51);
    }

    #[test]
    fn errors_name_the_key() {
        let mut c = RunConfig::default();
        let e = c.apply_json(r#"{"gird": 3}"#).unwrap_err();
        assert!(e.to_string().contains("gird"));
        let e = c.apply_flags([("tol", "abc")]).unwrap_err();
        assert!(e.to_string().contains("tol"));
        let e = parse_config(Command::Solve, None, [("alpha", "0.1"), ("p2", "0.6")]).unwrap_err();
        assert!(
            matches!(&e, ConfigError::Invalid { key, .. } if key == "p2"),
            "{e}"
        );
        let e = parse_config(Command::Solve, None, [("alpha", "0.1"), ("p1", "0.4")]).unwrap_err();
        assert!(
            matches!(&e, ConfigError::Invalid { key, .. } if key == "p1"),
            "{e}"
        );
        let e = parse_config(Command::Sweep, None, [("probes", "0.1,1.5")]).unwrap_err();
        assert!(
            matches!(&e, ConfigError::Invalid { key, .. } if key == "probes"),
            "{e}"
        );
    }

    #[test]
    fn lists_from_flags_and_json() {
        let mut c = RunConfig::default();
        c.apply_flags([("seeds", "1,2,3"), ("probes", "0.1, 0.9")])
            .unwrap();
        assert_eq!(c.seeds, vec![1, 2, 3]);
        assert_eq!(c.probes, vec![0.1, 0.9]);
        c.apply_json(r#"{"seeds": [7], "probes": [0.5]}"#).unwrap();
        assert_eq!(c.seeds, vec![7]);
        assert_eq!(c.probes, vec![0.5]);
    }

    #[test]
    fn round_trip() {
        let mut c = RunConfig::default();
        c.apply_flags([
            ("alpha", "0.123456789012345678"),
            ("selection", "truthful-first"),
            ("predicate", "herd-never"),
            ("equilibrium", "eq.json"),
            ("tol", "3e-11"),
            ("seeds", "4,5"),
        ])
        .unwrap();
        let text = c.to_json();
        let mut back = RunConfig::default();
        back.apply_json(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_json(), text);
        let defaults = RunConfig::default();
        let mut back = RunConfig::default();
        back.apply_json(&defaults.to_json()).unwrap();
        assert_eq!(back, defaults);
    }

    #[test]
    fn every_key_is_settable() {
        let c = RunConfig {
            alpha: Some(0.5),
            predicate: Some(PhasePredicate::Dependent),
            equilibrium: Some("x".into()),
            ..RunConfig::default()
        };
        let v: Value = serde_json::from_str(&c.to_json()).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys.len(), KEYS.len());
        for k in KEYS {
            assert!(keys.contains(&k), "{k}");
        }
    }
}
