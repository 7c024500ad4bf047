//! Strict run configuration.
//!
//! A run is described by one TOML document. Validation walks the document
//! against the schema and collects every violation — unknown keys, type
//! mismatches, and range errors — before anything is deserialized, so a bad
//! config reports all of its problems at once. `--override key.path=value`
//! pairs are applied to the document before validation.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;
use toml::Value;

use skgw_core::model::{CutoffSpec, ModelParams, PotentialSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Read(String),
    #[error("config is not valid TOML: {0}")]
    Parse(String),
    #[error("invalid override '{0}' (expected key.path=value)")]
    BadOverride(String),
    #[error("configuration rejected:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExperimentKind {
    Flow,
    Scatter,
    Hartree,
    QuantumSweep,
    GroundSweep,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Flow => "flow",
            ExperimentKind::Scatter => "scatter",
            ExperimentKind::Hartree => "hartree",
            ExperimentKind::QuantumSweep => "quantum-sweep",
            ExperimentKind::GroundSweep => "ground-sweep",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InitialStateConfig {
    /// "gaussian" or "minimizer".
    pub kind: String,
    pub u_center: f64,
    pub u_width: f64,
    pub u_norm: f64,
    pub u_momentum: f64,
    /// Momentum-space Gaussian amplitude for z, centered in the dictionary band.
    pub z_amplitude: f64,
    pub z_center: f64,
}

impl Default for InitialStateConfig {
    fn default() -> Self {
        Self {
            kind: "gaussian".into(),
            u_center: 0.4,
            u_width: 1.0,
            u_norm: 0.5,
            u_momentum: 0.3,
            z_amplitude: 0.3,
            z_center: 1.4,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowConfigBlock {
    pub dt: f64,
    pub horizon: f64,
    pub stride: usize,
    pub snapshot_stride: usize,
    pub initial: InitialStateConfig,
}

impl Default for FlowConfigBlock {
    fn default() -> Self {
        Self { dt: 1e-3, horizon: 10.0, stride: 100, snapshot_stride: 0, initial: Default::default() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScatterConfigBlock {
    pub annulus: (f64, f64),
    pub dictionary: usize,
    /// "forward", "backward", or "both".
    pub direction: String,
    pub dt: f64,
    pub initial_horizon: f64,
    pub max_horizon: f64,
    pub tol: f64,
    pub profile_horizon: f64,
    pub radiationless_threshold: Option<f64>,
    pub initial: InitialStateConfig,
}

impl Default for ScatterConfigBlock {
    fn default() -> Self {
        Self {
            annulus: (1.0, 2.0),
            dictionary: 8,
            direction: "forward".into(),
            dt: 1e-3,
            initial_horizon: 10.0,
            max_horizon: 80.0,
            tol: 1e-6,
            profile_horizon: 80.0,
            radiationless_threshold: None,
            initial: Default::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HartreeConfigBlock {
    pub delta: f64,
    /// "scf" or "pg".
    pub method: String,
    pub tol: f64,
    pub max_iter: usize,
    pub starts: usize,
}

impl Default for HartreeConfigBlock {
    fn default() -> Self {
        Self { delta: 0.5, method: "scf".into(), tol: 1e-10, max_iter: 400, starts: 5 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QuantumSweepBlock {
    pub hslash_list: Vec<f64>,
    pub delta: f64,
    pub d_u: usize,
    pub annulus: (f64, f64),
    pub dictionary: usize,
    pub horizon: f64,
    pub checkpoint_dt: f64,
    /// Any of "weyl", "field", "corr".
    pub observables: Vec<String>,
}

impl Default for QuantumSweepBlock {
    fn default() -> Self {
        Self {
            hslash_list: vec![0.5, 0.25, 0.125],
            delta: 0.5,
            d_u: 4,
            annulus: (0.9, 1.9),
            dictionary: 3,
            horizon: 24.0,
            checkpoint_dt: 0.05,
            observables: vec!["weyl".into(), "field".into()],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundSweepBlock {
    pub pairs: Vec<(u8, f64)>,
    pub d_u: usize,
    pub annulus: (f64, f64),
    pub dictionary: usize,
    pub meson_cap: u8,
    pub horizon: f64,
    pub checkpoint_dt: f64,
}

impl Default for GroundSweepBlock {
    fn default() -> Self {
        Self {
            pairs: vec![(1, 0.25), (2, 0.125), (4, 0.0625)],
            d_u: 4,
            annulus: (0.9, 1.9),
            dictionary: 3,
            meson_cap: 6,
            horizon: 12.0,
            checkpoint_dt: 0.05,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub model: ModelParams,
    pub kind: ExperimentKind,
    pub output_directory: PathBuf,
    pub export_grids: bool,
    pub flow: FlowConfigBlock,
    pub scatter: ScatterConfigBlock,
    pub hartree: HartreeConfigBlock,
    pub quantum_sweep: QuantumSweepBlock,
    pub ground_sweep: GroundSweepBlock,
    /// The fully resolved document, echoed into the manifest.
    #[serde(skip)]
    pub resolved: Value,
}

fn parse_scalar(text: &str) -> Value {
    if let Ok(b) = text.parse::<bool>() {
        return Value::Boolean(b);
    }
    if let Ok(i) = text.parse::<i64>() {
        return Value::Integer(i);
    }
    if let Ok(f) = text.parse::<f64>() {
        return Value::Float(f);
    }
    // comma-separated lists become float arrays
    if text.contains(',') {
        let parts: Result<Vec<f64>, _> = text.split(',').map(|p| p.trim().parse::<f64>()).collect();
        if let Ok(parts) = parts {
            return Value::Array(parts.into_iter().map(Value::Float).collect());
        }
    }
    Value::String(text.to_string())
}

/// Applies `key.path=value` into the document, creating tables as needed.
pub fn apply_override(doc: &mut Value, spec: &str) -> Result<(), ConfigError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| ConfigError::BadOverride(spec.to_string()))?;
    let keys: Vec<&str> = path.split('.').collect();
    if keys.is_empty() || keys.iter().any(|k| k.is_empty()) {
        return Err(ConfigError::BadOverride(spec.to_string()));
    }
    let mut cursor = doc;
    for key in &keys[..keys.len() - 1] {
        if !cursor.is_table() {
            return Err(ConfigError::BadOverride(spec.to_string()));
        }
        let table = cursor.as_table_mut().unwrap();
        cursor = table
            .entry(key.to_string())
            .or_insert_with(|| Value::Table(Default::default()));
    }
    let table = cursor
        .as_table_mut()
        .ok_or_else(|| ConfigError::BadOverride(spec.to_string()))?;
    table.insert(keys[keys.len() - 1].to_string(), parse_scalar(raw));
    Ok(())
}

struct Checker<'v> {
    errors: Vec<String>,
    doc: &'v Value,
}

impl<'v> Checker<'v> {
    fn table<'a>(&mut self, value: &'a Value, path: &str, allowed: &[&str]) -> Option<&'a toml::Table> {
        match value.as_table() {
            Some(t) => {
                for key in t.keys() {
                    if !allowed.contains(&key.as_str()) {
                        self.errors.push(format!("{path}.{key}: unknown key"));
                    }
                }
                Some(t)
            }
            None => {
                self.errors.push(format!("{path}: expected a table"));
                None
            }
        }
    }

    fn float(&mut self, t: &toml::Table, path: &str, key: &str, default: f64, min: Option<f64>) -> f64 {
        match t.get(key) {
            None => default,
            Some(Value::Float(f)) => self.check_min(*f, path, key, min),
            Some(Value::Integer(i)) => self.check_min(*i as f64, path, key, min),
            Some(_) => {
                self.errors.push(format!("{path}.{key}: expected a number"));
                default
            }
        }
    }

    fn check_min(&mut self, v: f64, path: &str, key: &str, min: Option<f64>) -> f64 {
        if let Some(m) = min {
            if v <= m {
                self.errors.push(format!("{path}.{key}: must be greater than {m} (got {v})"));
            }
        }
        v
    }

    fn integer(&mut self, t: &toml::Table, path: &str, key: &str, default: i64, min: i64) -> i64 {
        match t.get(key) {
            None => default,
            Some(Value::Integer(i)) => {
                if *i < min {
                    self.errors.push(format!("{path}.{key}: must be at least {min} (got {i})"));
                }
                *i
            }
            Some(_) => {
                self.errors.push(format!("{path}.{key}: expected an integer"));
                default
            }
        }
    }

    fn boolean(&mut self, t: &toml::Table, path: &str, key: &str, default: bool) -> bool {
        match t.get(key) {
            None => default,
            Some(Value::Boolean(b)) => *b,
            Some(_) => {
                self.errors.push(format!("{path}.{key}: expected a boolean"));
                default
            }
        }
    }

    fn string(
        &mut self,
        t: &toml::Table,
        path: &str,
        key: &str,
        default: &str,
        allowed: &[&str],
    ) -> String {
        match t.get(key) {
            None => default.to_string(),
            Some(Value::String(s)) => {
                if !allowed.is_empty() && !allowed.contains(&s.as_str()) {
                    self.errors.push(format!(
                        "{path}.{key}: expected one of {allowed:?} (got '{s}')"
                    ));
                }
                s.clone()
            }
            Some(_) => {
                self.errors.push(format!("{path}.{key}: expected a string"));
                default.to_string()
            }
        }
    }

    fn float_list(&mut self, t: &toml::Table, path: &str, key: &str, default: &[f64]) -> Vec<f64> {
        match t.get(key) {
            None => default.to_vec(),
            Some(Value::Array(a)) => {
                let mut out = Vec::with_capacity(a.len());
                for (i, v) in a.iter().enumerate() {
                    match v {
                        Value::Float(f) => out.push(*f),
                        Value::Integer(n) => out.push(*n as f64),
                        _ => self.errors.push(format!("{path}.{key}[{i}]: expected a number")),
                    }
                }
                out
            }
            Some(_) => {
                self.errors.push(format!("{path}.{key}: expected an array of numbers"));
                default.to_vec()
            }
        }
    }

    fn pair(&mut self, t: &toml::Table, path: &str, key: &str, default: (f64, f64)) -> (f64, f64) {
        let list = self.float_list(t, path, key, &[default.0, default.1]);
        if list.len() != 2 {
            self.errors.push(format!("{path}.{key}: expected exactly two numbers"));
            default
        } else {
            (list[0], list[1])
        }
    }
}

const ROOT_KEYS: &[&str] = &["seed", "model", "experiment", "output", "tolerances"];
const MODEL_KEYS: &[&str] = &[
    "dimension",
    "box_half_length",
    "grid_size",
    "mass",
    "potential",
    "cutoff",
];
const EXPERIMENT_KEYS: &[&str] = &[
    "kind",
    "flow",
    "scatter",
    "hartree",
    "quantum_sweep",
    "ground_sweep",
];
const INITIAL_KEYS: &[&str] = &[
    "kind",
    "u_center",
    "u_width",
    "u_norm",
    "u_momentum",
    "z_amplitude",
    "z_center",
];

/// Validates a parsed document and builds the typed configuration, reporting
/// every violation.
pub fn resolve(doc: Value) -> Result<RunConfig, ConfigError> {
    let mut ck = Checker { errors: Vec::new(), doc: &doc };
    let root = match ck.table(ck.doc, "", ROOT_KEYS) {
        Some(t) => t.clone(),
        None => return Err(ConfigError::Invalid(ck.errors)),
    };
    let seed = ck.integer(&root, "", "seed", 42, 0) as u64;

    // model block
    let model_value = root.get("model").cloned().unwrap_or(Value::Table(Default::default()));
    let model_table = ck.table(&model_value, "model", MODEL_KEYS).cloned().unwrap_or_default();
    let potential_value = model_table
        .get("potential")
        .cloned()
        .unwrap_or(Value::Table(Default::default()));
    let potential_table = ck
        .table(&potential_value, "model.potential", &["c0", "nu"])
        .cloned()
        .unwrap_or_default();
    let cutoff_value = model_table
        .get("cutoff")
        .cloned()
        .unwrap_or(Value::Table(Default::default()));
    let cutoff_table = ck
        .table(&cutoff_value, "model.cutoff", &["radius", "amplitude"])
        .cloned()
        .unwrap_or_default();
    let model = ModelParams {
        dimension: ck.integer(&model_table, "model", "dimension", 1, 1) as usize,
        box_half_length: ck.float(&model_table, "model", "box_half_length", 16.0, Some(0.0)),
        grid_size: ck.integer(&model_table, "model", "grid_size", 256, 8) as usize,
        mass: ck.float(&model_table, "model", "mass", 1.0, Some(0.0)),
        potential: PotentialSpec {
            c0: ck.float(&potential_table, "model.potential", "c0", 1.0, Some(0.0)),
            nu: ck.float(&potential_table, "model.potential", "nu", 1.0, Some(0.0)),
        },
        cutoff: CutoffSpec {
            radius: ck.float(&cutoff_table, "model.cutoff", "radius", 2.0, Some(0.0)),
            amplitude: ck.float(&cutoff_table, "model.cutoff", "amplitude", 1.0, None),
        },
    };
    if let Err(model_errs) = model.validate() {
        for e in model_errs {
            ck.errors.push(format!("model: {e}"));
        }
    }

    // experiment block
    let experiment_value = root
        .get("experiment")
        .cloned()
        .unwrap_or(Value::Table(Default::default()));
    let experiment_table = ck
        .table(&experiment_value, "experiment", EXPERIMENT_KEYS)
        .cloned()
        .unwrap_or_default();
    let kind_str = ck.string(
        &experiment_table,
        "experiment",
        "kind",
        "flow",
        &["flow", "scatter", "hartree", "quantum-sweep", "ground-sweep"],
    );
    let kind = match kind_str.as_str() {
        "scatter" => ExperimentKind::Scatter,
        "hartree" => ExperimentKind::Hartree,
        "quantum-sweep" => ExperimentKind::QuantumSweep,
        "ground-sweep" => ExperimentKind::GroundSweep,
        _ => ExperimentKind::Flow,
    };

    let initial_of = |ck: &mut Checker, table: &toml::Table, path: &str| -> InitialStateConfig {
        let value = table.get("initial").cloned().unwrap_or(Value::Table(Default::default()));
        let t = ck
            .table(&value, &format!("{path}.initial"), INITIAL_KEYS)
            .cloned()
            .unwrap_or_default();
        let d = InitialStateConfig::default();
        InitialStateConfig {
            kind: ck.string(
                &t,
                &format!("{path}.initial"),
                "kind",
                &d.kind,
                &["gaussian", "minimizer"],
            ),
            u_center: ck.float(&t, path, "u_center", d.u_center, None),
            u_width: ck.float(&t, path, "u_width", d.u_width, Some(0.0)),
            u_norm: ck.float(&t, path, "u_norm", d.u_norm, Some(0.0)),
            u_momentum: ck.float(&t, path, "u_momentum", d.u_momentum, None),
            z_amplitude: ck.float(&t, path, "z_amplitude", d.z_amplitude, None),
            z_center: ck.float(&t, path, "z_center", d.z_center, None),
        }
    };

    let flow = {
        let value = experiment_table
            .get("flow")
            .cloned()
            .unwrap_or(Value::Table(Default::default()));
        let t = ck
            .table(&value, "experiment.flow", &["dt", "horizon", "stride", "snapshot_stride", "initial"])
            .cloned()
            .unwrap_or_default();
        let d = FlowConfigBlock::default();
        FlowConfigBlock {
            dt: ck.float(&t, "experiment.flow", "dt", d.dt, Some(0.0)),
            horizon: ck.float(&t, "experiment.flow", "horizon", d.horizon, Some(0.0)),
            stride: ck.integer(&t, "experiment.flow", "stride", d.stride as i64, 1) as usize,
            snapshot_stride: ck.integer(
                &t,
                "experiment.flow",
                "snapshot_stride",
                d.snapshot_stride as i64,
                0,
            ) as usize,
            initial: initial_of(&mut ck, &t, "experiment.flow"),
        }
    };

    let scatter = {
        let value = experiment_table
            .get("scatter")
            .cloned()
            .unwrap_or(Value::Table(Default::default()));
        let t = ck
            .table(
                &value,
                "experiment.scatter",
                &[
                    "annulus",
                    "dictionary",
                    "direction",
                    "dt",
                    "initial_horizon",
                    "max_horizon",
                    "tol",
                    "profile_horizon",
                    "radiationless_threshold",
                    "initial",
                ],
            )
            .cloned()
            .unwrap_or_default();
        let d = ScatterConfigBlock::default();
        let threshold = match t.get("radiationless_threshold") {
            None => None,
            Some(Value::Float(f)) => Some(*f),
            Some(Value::Integer(i)) => Some(*i as f64),
            Some(_) => {
                ck.errors
                    .push("experiment.scatter.radiationless_threshold: expected a number".into());
                None
            }
        };
        ScatterConfigBlock {
            annulus: ck.pair(&t, "experiment.scatter", "annulus", d.annulus),
            dictionary: ck.integer(&t, "experiment.scatter", "dictionary", d.dictionary as i64, 1)
                as usize,
            direction: ck.string(
                &t,
                "experiment.scatter",
                "direction",
                &d.direction,
                &["forward", "backward", "both"],
            ),
            dt: ck.float(&t, "experiment.scatter", "dt", d.dt, Some(0.0)),
            initial_horizon: ck.float(
                &t,
                "experiment.scatter",
                "initial_horizon",
                d.initial_horizon,
                Some(0.0),
            ),
            max_horizon: ck.float(&t, "experiment.scatter", "max_horizon", d.max_horizon, Some(0.0)),
            tol: ck.float(&t, "experiment.scatter", "tol", d.tol, Some(0.0)),
            profile_horizon: ck.float(
                &t,
                "experiment.scatter",
                "profile_horizon",
                d.profile_horizon,
                Some(0.0),
            ),
            radiationless_threshold: threshold,
            initial: initial_of(&mut ck, &t, "experiment.scatter"),
        }
    };

    let hartree = {
        let value = experiment_table
            .get("hartree")
            .cloned()
            .unwrap_or(Value::Table(Default::default()));
        let t = ck
            .table(
                &value,
                "experiment.hartree",
                &["delta", "method", "tol", "max_iter", "starts"],
            )
            .cloned()
            .unwrap_or_default();
        let d = HartreeConfigBlock::default();
        HartreeConfigBlock {
            delta: ck.float(&t, "experiment.hartree", "delta", d.delta, Some(0.0)),
            method: ck.string(&t, "experiment.hartree", "method", &d.method, &["scf", "pg"]),
            tol: ck.float(&t, "experiment.hartree", "tol", d.tol, Some(0.0)),
            max_iter: ck.integer(&t, "experiment.hartree", "max_iter", d.max_iter as i64, 1)
                as usize,
            starts: ck.integer(&t, "experiment.hartree", "starts", d.starts as i64, 1) as usize,
        }
    };

    let quantum_sweep = {
        let value = experiment_table
            .get("quantum_sweep")
            .cloned()
            .unwrap_or(Value::Table(Default::default()));
        let t = ck
            .table(
                &value,
                "experiment.quantum_sweep",
                &[
                    "hslash_list",
                    "delta",
                    "d_u",
                    "annulus",
                    "dictionary",
                    "horizon",
                    "checkpoint_dt",
                    "observables",
                ],
            )
            .cloned()
            .unwrap_or_default();
        let d = QuantumSweepBlock::default();
        let observables = match t.get("observables") {
            None => d.observables.clone(),
            Some(Value::Array(a)) => {
                let mut out = Vec::new();
                for (i, v) in a.iter().enumerate() {
                    match v.as_str() {
                        Some(s) if ["weyl", "field", "corr"].contains(&s) => out.push(s.to_string()),
                        _ => ck.errors.push(format!(
                            "experiment.quantum_sweep.observables[{i}]: expected weyl|field|corr"
                        )),
                    }
                }
                out
            }
            Some(_) => {
                ck.errors
                    .push("experiment.quantum_sweep.observables: expected an array".into());
                d.observables.clone()
            }
        };
        let hslash_list = ck.float_list(&t, "experiment.quantum_sweep", "hslash_list", &d.hslash_list);
        for (i, h) in hslash_list.iter().enumerate() {
            if !(*h > 0.0 && *h <= 1.0) {
                ck.errors.push(format!(
                    "experiment.quantum_sweep.hslash_list[{i}]: must lie in (0, 1] (got {h})"
                ));
            }
        }
        QuantumSweepBlock {
            hslash_list,
            delta: ck.float(&t, "experiment.quantum_sweep", "delta", d.delta, Some(0.0)),
            d_u: ck.integer(&t, "experiment.quantum_sweep", "d_u", d.d_u as i64, 1) as usize,
            annulus: ck.pair(&t, "experiment.quantum_sweep", "annulus", d.annulus),
            dictionary: ck.integer(
                &t,
                "experiment.quantum_sweep",
                "dictionary",
                d.dictionary as i64,
                1,
            ) as usize,
            horizon: ck.float(&t, "experiment.quantum_sweep", "horizon", d.horizon, Some(0.0)),
            checkpoint_dt: ck.float(
                &t,
                "experiment.quantum_sweep",
                "checkpoint_dt",
                d.checkpoint_dt,
                Some(0.0),
            ),
            observables,
        }
    };

    let ground_sweep = {
        let value = experiment_table
            .get("ground_sweep")
            .cloned()
            .unwrap_or(Value::Table(Default::default()));
        let t = ck
            .table(
                &value,
                "experiment.ground_sweep",
                &[
                    "pairs",
                    "d_u",
                    "annulus",
                    "dictionary",
                    "meson_cap",
                    "horizon",
                    "checkpoint_dt",
                ],
            )
            .cloned()
            .unwrap_or_default();
        let d = GroundSweepBlock::default();
        let pairs = match t.get("pairs") {
            None => d.pairs.clone(),
            Some(Value::Array(a)) => {
                let mut out = Vec::new();
                for (i, v) in a.iter().enumerate() {
                    let ok = v.as_array().and_then(|pair| {
                        if pair.len() != 2 {
                            return None;
                        }
                        let n = pair[0].as_integer()?;
                        let h = match &pair[1] {
                            Value::Float(f) => *f,
                            Value::Integer(k) => *k as f64,
                            _ => return None,
                        };
                        Some((n as u8, h))
                    });
                    match ok {
                        Some(p) if p.1 > 0.0 && p.1 <= 1.0 && p.0 >= 1 => out.push(p),
                        _ => ck.errors.push(format!(
                            "experiment.ground_sweep.pairs[{i}]: expected [n >= 1, hslash in (0,1]]"
                        )),
                    }
                }
                out
            }
            Some(_) => {
                ck.errors
                    .push("experiment.ground_sweep.pairs: expected an array of pairs".into());
                d.pairs.clone()
            }
        };
        GroundSweepBlock {
            pairs,
            d_u: ck.integer(&t, "experiment.ground_sweep", "d_u", d.d_u as i64, 1) as usize,
            annulus: ck.pair(&t, "experiment.ground_sweep", "annulus", d.annulus),
            dictionary: ck.integer(
                &t,
                "experiment.ground_sweep",
                "dictionary",
                d.dictionary as i64,
                1,
            ) as usize,
            meson_cap: ck.integer(&t, "experiment.ground_sweep", "meson_cap", d.meson_cap as i64, 1)
                as u8,
            horizon: ck.float(&t, "experiment.ground_sweep", "horizon", d.horizon, Some(0.0)),
            checkpoint_dt: ck.float(
                &t,
                "experiment.ground_sweep",
                "checkpoint_dt",
                d.checkpoint_dt,
                Some(0.0),
            ),
        }
    };

    // output block
    let output_value = root.get("output").cloned().unwrap_or(Value::Table(Default::default()));
    let output_table = ck
        .table(&output_value, "output", &["directory", "export_grids"])
        .cloned()
        .unwrap_or_default();
    let output_directory =
        PathBuf::from(ck.string(&output_table, "output", "directory", "run_output", &[]));
    let export_grids = ck.boolean(&output_table, "output", "export_grids", false);

    // tolerances block is reserved for overrides; reject unknown keys
    if let Some(tol_value) = root.get("tolerances") {
        ck.table(tol_value, "tolerances", &[]);
    }

    if !ck.errors.is_empty() {
        return Err(ConfigError::Invalid(ck.errors));
    }
    Ok(RunConfig {
        seed,
        model,
        kind,
        output_directory,
        export_grids,
        flow,
        scatter,
        hartree,
        quantum_sweep,
        ground_sweep,
        resolved: doc,
    })
}

/// Loads, applies overrides, and validates.
pub fn load(path: &std::path::Path, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read(e.to_string()))?;
    from_str(&text, overrides)
}

pub fn from_str(text: &str, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    let mut doc = Value::Table(table);
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    resolve(doc)
}

/// The fully resolved configuration as a TOML document (defaults included),
/// for the manifest echo.
pub fn echo_resolved(cfg: &RunConfig) -> BTreeMap<String, serde_json::Value> {
    let mut map = BTreeMap::new();
    map.insert("seed".into(), serde_json::json!(cfg.seed));
    map.insert("kind".into(), serde_json::json!(cfg.kind.as_str()));
    map.insert("model".into(), serde_json::to_value(&cfg.model).unwrap());
    map.insert("output_directory".into(), serde_json::json!(cfg.output_directory));
    map.insert("export_grids".into(), serde_json::json!(cfg.export_grids));
    map.insert("flow".into(), serde_json::to_value(&cfg.flow).unwrap());
    map.insert("scatter".into(), serde_json::to_value(&cfg.scatter).unwrap());
    map.insert("hartree".into(), serde_json::to_value(&cfg.hartree).unwrap());
    map.insert(
        "quantum_sweep".into(),
        serde_json::to_value(&cfg.quantum_sweep).unwrap(),
    );
    map.insert(
        "ground_sweep".into(),
        serde_json::to_value(&cfg.ground_sweep).unwrap(),
    );
    map
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let cfg = from_str("", &[]).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::Flow);
        assert_eq!(cfg.model.grid_size, 256);
        assert_eq!(cfg.seed, 42);
    }

    #[test]
    fn unknown_keys_and_bad_values_all_reported() {
        let text = r#"
            seed = 3
            [model]
            grid_size = 200
            masss = 1.0
            [experiment]
            kind = "warp"
            [experiment.hartree]
            delta = -0.5
        "#;
        let err = from_str(text, &[]).unwrap_err();
        match err {
            ConfigError::Invalid(errors) => {
                let joined = errors.join("\n");
                assert!(joined.contains("masss"), "{joined}");
                assert!(joined.contains("200"), "{joined}");
                assert!(joined.contains("kind"), "{joined}");
                assert!(joined.contains("delta"), "{joined}");
                assert!(errors.len() >= 4, "expected all violations, got {joined}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn overrides_apply_before_validation() {
        let cfg = from_str(
            "",
            &[
                "experiment.kind=hartree".into(),
                "experiment.hartree.delta=0.3".into(),
                "model.grid_size=512".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.kind, ExperimentKind::Hartree);
        assert_eq!(cfg.hartree.delta, 0.3);
        assert_eq!(cfg.model.grid_size, 512);
    }

    #[test]
    fn bad_override_shape_is_rejected() {
        assert!(matches!(
            from_str("", &["novalue".into()]),
            Err(ConfigError::BadOverride(_))
        ));
    }

    #[test]
    fn hslash_range_is_enforced() {
        let err = from_str("", &["experiment.quantum_sweep.hslash_list=2.0,0.5".into()])
            .unwrap_err();
        match err {
            ConfigError::Invalid(errors) => {
                assert!(errors.iter().any(|e| e.contains("hslash_list[0]")));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
