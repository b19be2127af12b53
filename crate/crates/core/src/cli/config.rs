//! Flat `section.key = value` experiment configuration.
//!
//! ```text
//! # dissipative Ising scan
//! model.name = ising_dephasing
//! model.J = 1.0
//! observable.label = Z
//! evolution.times = [0.5, 1.0]
//! run.seed = 7
//! ```
//!
//! Values are numbers, bare or quoted strings, or `[a, b, ...]` lists.
//! The key set is closed: anything not in [`KEYS`] is rejected.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{OpLabel, Site};
use crate::limits::{CauchyCriteria, GrowthRule};
use crate::semigroup::{EvolutionBackend, LindbladModel, OdeParams, DEFAULT_EXACT_CAP};

/// Every accepted key.
pub const KEYS: &[&str] = &[
    "model.name",
    "model.J",
    "model.h",
    "model.kappa",
    "model.d",
    "observable.label",
    "observable.site",
    "evolution.times",
    "evolution.splits",
    "schedule.rule",
    "schedule.steps",
    "schedule.first_shell",
    "schedule.max_sites",
    "backend.kind",
    "backend.exact_cap",
    "backend.ode_tol",
    "backend.norm_step",
    "backend.max_steps",
    "tolerance.unitality",
    "tolerance.cp",
    "tolerance.kraus",
    "tolerance.duality",
    "tolerance.semigroup",
    "tolerance.tensor",
    "tolerance.cauchy_epsilon",
    "tolerance.cauchy_ratio",
    "channel.source",
    "channel.parameter",
    "channel.sites",
    "channel.trials",
    "tensor.k",
    "tensor.samples",
    "run.seed",
    "run.output",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSpec {
    pub name: String,
    pub params: BTreeMap<String, f64>,
}

impl ModelSpec {
    pub fn build(&self) -> Result<LindbladModel> {
        LindbladModel::catalog(&self.name, &self.params)
    }

    pub fn lattice_dim(&self) -> usize {
        self.params.get("d").map_or(1, |&d| d as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableSpec {
    pub label: OpLabel,
    pub site: Vec<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduleSpec {
    pub rule: GrowthRule,
    pub steps: usize,
    pub max_sites: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub unitality: f64,
    pub cp: f64,
    pub kraus: f64,
    pub duality: f64,
    pub semigroup: f64,
    pub tensor: f64,
    pub cauchy_epsilon: f64,
    pub cauchy_ratio: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            unitality: 1e-10,
            cp: 1e-9,
            kraus: 1e-9,
            duality: 1e-10,
            semigroup: 1e-8,
            tensor: 1e-9,
            cauchy_epsilon: 1e-2,
            cauchy_ratio: 0.9,
        }
    }
}

impl Tolerances {
    pub fn cauchy(&self) -> CauchyCriteria {
        CauchyCriteria::new(self.cauchy_epsilon, self.cauchy_ratio)
    }
}

/// Where the channel for `verify` and `kraus` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelSource {
    /// `γ_t` of the configured model on a chain of `channel.sites` sites.
    Lindblad,
    Identity,
    /// Qubit dephasing with probability `channel.parameter`.
    Dephasing,
    /// Qubit amplitude damping with rate `channel.parameter`.
    AmplitudeDamping,
    /// Transpose map on `channel.sites` qubits (not CP).
    Transpose,
}

impl ChannelSource {
    const NAMES: [&'static str; 5] = ["lindblad", "identity", "dephasing", "amplitude_damping", "transpose"];

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "lindblad" => ChannelSource::Lindblad,
            "identity" => ChannelSource::Identity,
            "dephasing" => ChannelSource::Dephasing,
            "amplitude_damping" => ChannelSource::AmplitudeDamping,
            "transpose" => ChannelSource::Transpose,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelSpec {
    pub source: ChannelSource,
    pub parameter: Option<f64>,
    pub sites: usize,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TensorSpec {
    pub k: Vec<usize>,
    pub samples: usize,
}

/// Fully resolved experiment; its JSON form is the config echo of every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub model: Option<ModelSpec>,
    pub observable: ObservableSpec,
    pub times: Vec<f64>,
    /// Semigroup-law splits `s`: `γ_t` is compared with `γ_{st} ∘ γ_{(1-s)t}`.
    pub splits: Vec<f64>,
    pub schedule: ScheduleSpec,
    pub backend: EvolutionBackend,
    pub tolerances: Tolerances,
    pub channel: ChannelSpec,
    pub tensor: TensorSpec,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn observable_site(&self) -> Result<Site> {
        Site::new(self.observable.site.clone(), 2)
    }

    pub fn require_model(&self) -> Result<LindbladModel> {
        match &self.model {
            Some(m) => m.build(),
            None => Err(config_err("model.name", "this command needs a model")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Str(String),
    List(Vec<String>),
}

#[derive(Debug)]
struct Entry {
    line: usize,
    value: Value,
}

fn config_err(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config { location: location.into(), message: message.into() }
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, ch) in line.char_indices() {
        match ch {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn unquote(s: &str) -> String {
    let s = s.trim();
    if s.len() >= 2 && s.starts_with('"') && s.ends_with('"') {
        s[1..s.len() - 1].to_string()
    } else {
        s.to_string()
    }
}

fn parse_value(raw: &str) -> Value {
    let raw = raw.trim();
    if let Some(inner) = raw.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
        let items = inner.split(',').map(unquote).filter(|s| !s.is_empty()).collect();
        Value::List(items)
    } else {
        Value::Str(unquote(raw))
    }
}

struct Fields {
    entries: BTreeMap<String, Entry>,
}

impl Fields {
    fn location(&self, key: &str) -> String {
        match self.entries.get(key) {
            Some(e) => format!("line {} ({key})", e.line),
            None => key.to_string(),
        }
    }

    fn err(&self, key: &str, message: impl Into<String>) -> Error {
        config_err(self.location(key), message)
    }

    fn string(&self, key: &str) -> Result<Option<String>> {
        match self.entries.get(key).map(|e| &e.value) {
            None => Ok(None),
            Some(Value::Str(s)) => Ok(Some(s.clone())),
            Some(Value::List(_)) => Err(self.err(key, "expected a single value, found a list")),
        }
    }

    fn number<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<T>> {
        match self.string(key)? {
            None => Ok(None),
            Some(s) => s.parse::<T>().map(Some).map_err(|_| self.err(key, format!("expected {what}, found {s:?}"))),
        }
    }

    fn float(&self, key: &str) -> Result<Option<f64>> {
        let v: Option<f64> = self.number(key, "a number")?;
        match v {
            Some(x) if !x.is_finite() => Err(self.err(key, format!("value {x} is not finite"))),
            other => Ok(other),
        }
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.float(key)?.unwrap_or(default);
        if v <= 0.0 {
            return Err(self.err(key, format!("must be > 0, got {v}")));
        }
        Ok(v)
    }

    fn count(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.number(key, "a non-negative integer")?.unwrap_or(default))
    }

    fn list<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<Vec<T>>> {
        let items = match self.entries.get(key).map(|e| &e.value) {
            None => return Ok(None),
            Some(Value::List(items)) => items.clone(),
            Some(Value::Str(s)) => vec![s.clone()],
        };
        items
            .iter()
            .map(|s| s.parse::<T>().map_err(|_| self.err(key, format!("expected {what}, found {s:?}"))))
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }
}

/// Parses and resolves a configuration, filling defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    parse_config_with_seed(text, None)
}

/// As [`parse_config`], with `seed` taking precedence over `run.seed`.
pub fn parse_config_with_seed(text: &str, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut entries = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let at = |msg: String| config_err(format!("line {line_no}"), msg);
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| at(format!("expected `section.key = value`, found {line:?}")))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(at(format!("unknown key {key:?}")));
        }
        if value.trim().is_empty() {
            return Err(at(format!("missing value for {key:?}")));
        }
        if let Some(prev) = entries.insert(key.to_string(), Entry { line: line_no, value: parse_value(value) }) {
            return Err(at(format!("duplicate key {key:?} (first set on line {})", prev.line)));
        }
    }
    resolve(&Fields { entries }, seed)
}

fn resolve(f: &Fields, seed_override: Option<u64>) -> Result<ExperimentConfig> {
    let seed = f
        .number::<u64>("run.seed", "a non-negative integer")?
        .or(seed_override)
        .ok_or_else(|| config_err("run.seed", "a random seed is required for reproducibility"))?;

    let model = match f.string("model.name")? {
        None => {
            if let Some(k) = ["model.J", "model.h", "model.kappa", "model.d"].iter().find(|k| f.entries.contains_key(**k)) {
                return Err(f.err(k, "model parameter given without model.name"));
            }
            None
        }
        Some(name) => {
            let mut params = BTreeMap::new();
            for p in ["J", "h", "kappa", "d"] {
                let key = format!("model.{p}");
                if let Some(v) = f.float(&key)? {
                    params.insert(p.to_string(), v);
                }
            }
            let spec = ModelSpec { name, params };
            spec.build().map_err(|e| f.err("model.name", e.to_string()))?;
            Some(spec)
        }
    };
    let lattice_dim = model.as_ref().map_or(1, ModelSpec::lattice_dim);

    let label = match f.string("observable.label")? {
        None => OpLabel::Z,
        Some(s) => s.parse::<OpLabel>().map_err(|e| f.err("observable.label", e.to_string()))?,
    };
    label.matrix(2).map_err(|e| f.err("observable.label", e.to_string()))?;
    let site = f.list::<i64>("observable.site", "an integer coordinate")?.unwrap_or_else(|| vec![0; lattice_dim]);
    if site.len() != lattice_dim {
        return Err(f.err("observable.site", format!("expected {lattice_dim} coordinate(s), got {}", site.len())));
    }

    let times = f.list::<f64>("evolution.times", "a number")?.unwrap_or_else(|| vec![1.0]);
    if times.is_empty() {
        return Err(f.err("evolution.times", "at least one time is required"));
    }
    if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(f.err("evolution.times", format!("times must be finite and >= 0, got {t}")));
    }
    let splits = f.list::<f64>("evolution.splits", "a number")?.unwrap_or_else(|| vec![0.3, 0.5]);
    if let Some(s) = splits.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(f.err("evolution.splits", format!("splits must lie in [0, 1], got {s}")));
    }

    match f.string("schedule.rule")?.as_deref() {
        None | Some("shell") => {}
        Some(other) => return Err(f.err("schedule.rule", format!("unknown growth rule {other:?}; accepted: shell"))),
    }
    let schedule = ScheduleSpec {
        rule: GrowthRule::Shell { first: f.count("schedule.first_shell", 1)? },
        steps: f.count("schedule.steps", 4)?,
        max_sites: f.count("schedule.max_sites", 9)?,
    };
    if schedule.steps < 2 {
        return Err(f.err("schedule.steps", "a schedule needs at least 2 volumes"));
    }

    let ode = OdeParams {
        tol: f.positive("backend.ode_tol", OdeParams::default().tol)?,
        norm_step: f.positive("backend.norm_step", OdeParams::default().norm_step)?,
        max_steps: f.count("backend.max_steps", OdeParams::default().max_steps)?,
    };
    let cap = f.count("backend.exact_cap", DEFAULT_EXACT_CAP)?;
    let backend = match f.string("backend.kind")?.as_deref() {
        None | Some("ode") => {
            if f.entries.contains_key("backend.exact_cap") {
                return Err(f.err("backend.exact_cap", "only applies to backend.kind = exact"));
            }
            EvolutionBackend::ObservableOde(ode)
        }
        Some("exact") => {
            if let Some(k) = ["backend.ode_tol", "backend.norm_step", "backend.max_steps"].iter().find(|k| f.entries.contains_key(**k)) {
                return Err(f.err(k, "only applies to backend.kind = ode"));
            }
            EvolutionBackend::ExactExponential { cap }
        }
        Some(other) => return Err(f.err("backend.kind", format!("unknown backend {other:?}; accepted: ode, exact"))),
    };

    let d = Tolerances::default();
    let tolerances = Tolerances {
        unitality: f.positive("tolerance.unitality", d.unitality)?,
        cp: f.positive("tolerance.cp", d.cp)?,
        kraus: f.positive("tolerance.kraus", d.kraus)?,
        duality: f.positive("tolerance.duality", d.duality)?,
        semigroup: f.positive("tolerance.semigroup", d.semigroup)?,
        tensor: f.positive("tolerance.tensor", d.tensor)?,
        cauchy_epsilon: f.positive("tolerance.cauchy_epsilon", d.cauchy_epsilon)?,
        cauchy_ratio: f.positive("tolerance.cauchy_ratio", d.cauchy_ratio)?,
    };

    let source = match f.string("channel.source")? {
        None => ChannelSource::Lindblad,
        Some(s) => ChannelSource::parse(&s).ok_or_else(|| {
            f.err("channel.source", format!("unknown channel source {s:?}; accepted: {}", ChannelSource::NAMES.join(", ")))
        })?,
    };
    let parameter = f.float("channel.parameter")?;
    match source {
        ChannelSource::Dephasing | ChannelSource::AmplitudeDamping => match parameter {
            Some(p) if (0.0..=1.0).contains(&p) => {}
            Some(p) => return Err(f.err("channel.parameter", format!("must lie in [0, 1], got {p}"))),
            None => return Err(f.err("channel.parameter", "required for this channel source")),
        },
        _ if parameter.is_some() => return Err(f.err("channel.parameter", "not used by this channel source")),
        _ => {}
    }
    if source == ChannelSource::Lindblad && model.is_none() && f.entries.contains_key("channel.source") {
        return Err(f.err("channel.source", "the lindblad source needs model.name"));
    }
    let channel = ChannelSpec {
        source,
        parameter,
        sites: f.count("channel.sites", 2)?,
        trials: f.count("channel.trials", 20)?,
    };
    if channel.sites == 0 {
        return Err(f.err("channel.sites", "must be at least 1"));
    }

    let tensor = TensorSpec {
        k: f.list::<usize>("tensor.k", "a positive integer")?.unwrap_or_else(|| vec![2, 4]),
        samples: f.count("tensor.samples", 50)?,
    };
    if tensor.k.contains(&0) {
        return Err(f.err("tensor.k", "ancilla dimensions must be at least 1"));
    }

    Ok(ExperimentConfig {
        model,
        observable: ObservableSpec { label, site },
        times,
        splits,
        schedule,
        backend,
        tolerances,
        channel,
        tensor,
        seed,
        output: f.string("run.output")?.map(PathBuf::from),
    })
}
