//! Experiment configuration: JSON parsing, defaults and cross-checks.
//!
//! Every field is optional. Missing values fall back to the defaults of the
//! chosen experiment, so `{"experiment": "aah"}` is a complete config.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use serde_json::{json, Map, Value};

use crate::fock::{configuration_count, FockState, MAX_CONFIGURATIONS, MAX_PERMANENT_ORDER};
use crate::lattice::{bloch_scales, Onsite, TightBindingSpec, TimeGrid, INVERSE_GOLDEN_MEAN};
use crate::observables::ObservableKind;
use crate::sampler::DEFAULT_SHOT_GRID;

/// Mode count above which common Fock-backend simulators refuse a circuit.
pub const FOCK_BACKEND_MODE_CAP: usize = 23;

/// Number of equally spaced AAH phases used when none are given.
pub const DEFAULT_PHASE_COUNT: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Bloch,
    Dynloc,
    Aah,
    ShotsStudy,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 4] = [
        ExperimentKind::Bloch,
        ExperimentKind::Dynloc,
        ExperimentKind::Aah,
        ExperimentKind::ShotsStudy,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Bloch => "bloch",
            ExperimentKind::Dynloc => "dynloc",
            ExperimentKind::Aah => "aah",
            ExperimentKind::ShotsStudy => "shots_study",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// Onsite physics of the chain.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelKind {
    Bloch { field: f64 },
    Dynloc { amplitude: f64, omega: f64 },
    /// One realization per entry of `phases`.
    Aah { lambda: f64, alpha: f64, phases: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub sites: usize,
    pub hopping: f64,
    pub hbar: f64,
    pub lattice_a: f64,
    pub kind: ModelKind,
}

impl ModelConfig {
    pub fn realizations(&self) -> usize {
        match &self.kind {
            ModelKind::Aah { phases, .. } => phases.len(),
            _ => 1,
        }
    }

    /// Chain specification of realization `index`.
    pub fn spec(&self, index: usize) -> TightBindingSpec {
        let onsite = match &self.kind {
            ModelKind::Bloch { field } => Onsite::StaticField { field: *field },
            ModelKind::Dynloc { amplitude, omega } => Onsite::Sinusoidal {
                amplitude: *amplitude,
                omega: *omega,
            },
            ModelKind::Aah { lambda, alpha, phases } => Onsite::Aah {
                lambda: *lambda,
                alpha: *alpha,
                phase: phases[index],
            },
        };
        let mut spec = TightBindingSpec::chain(self.sites, self.hopping, onsite);
        spec.hbar = self.hbar;
        spec.lattice_a = self.lattice_a;
        spec
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    ExactProbs,
    Shots { shots: u64, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompilePath {
    Rectangular,
    /// Lie-product circuit with `steps` steps per grid interval.
    Trotter { steps: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotsStudyConfig {
    pub shot_counts: Vec<u64>,
    pub repetitions: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub model: ModelConfig,
    pub grid: TimeGrid,
    pub initial_state: FockState,
    pub backend: Backend,
    pub compile_path: CompilePath,
    pub observables: Vec<ObservableKind>,
    pub output_dir: PathBuf,
    pub shots_study: Option<ShotsStudyConfig>,
}

impl ExperimentConfig {
    /// Replaces every base seed in the config.
    pub fn with_seed(mut self, seed: u64) -> Self {
        if let Backend::Shots { seed: s, .. } = &mut self.backend {
            *s = seed;
        }
        if let Some(study) = &mut self.shots_study {
            study.seed = seed;
        }
        self
    }

    /// Base seeds by name.
    pub fn seeds(&self) -> Vec<(&'static str, u64)> {
        let mut out = Vec::new();
        if let Backend::Shots { seed, .. } = self.backend {
            out.push(("backend", seed));
        }
        if let Some(study) = &self.shots_study {
            out.push(("shots_study", study.seed));
        }
        out
    }

    /// JSON document that [`validate_config`] maps back to `self`.
    pub fn to_json(&self) -> Value {
        let mut model = Map::new();
        model.insert("sites".into(), json!(self.model.sites));
        model.insert("hopping".into(), json!(self.model.hopping));
        model.insert("hbar".into(), json!(self.model.hbar));
        model.insert("lattice_a".into(), json!(self.model.lattice_a));
        match &self.model.kind {
            ModelKind::Bloch { field } => {
                model.insert("field".into(), json!(field));
            }
            ModelKind::Dynloc { amplitude, omega } => {
                model.insert("amplitude".into(), json!(amplitude));
                model.insert("omega".into(), json!(omega));
            }
            ModelKind::Aah { lambda, alpha, phases } => {
                model.insert("lambda".into(), json!(lambda));
                model.insert("alpha".into(), json!(alpha));
                model.insert("phases".into(), json!(phases));
            }
        }
        let backend = match self.backend {
            Backend::ExactProbs => json!({"kind": "exact_probs"}),
            Backend::Shots { shots, seed } => json!({"kind": "shots", "shots": shots, "seed": seed}),
        };
        let compile_path = match self.compile_path {
            CompilePath::Rectangular => json!({"kind": "rectangular"}),
            CompilePath::Trotter { steps } => json!({"kind": "trotter", "steps": steps}),
        };
        let mut doc = json!({
            "experiment": self.experiment.name(),
            "model": model,
            "grid": {"t_start": self.grid.t_start, "t_end": self.grid.t_end, "steps": self.grid.steps},
            "initial_state": self.initial_state.occupations(),
            "backend": backend,
            "compile_path": compile_path,
            "output_dir": self.output_dir.to_string_lossy(),
        });
        let map = doc.as_object_mut().expect("object literal");
        match &self.shots_study {
            Some(study) => {
                map.insert(
                    "shots_study".into(),
                    json!({
                        "shot_counts": study.shot_counts,
                        "repetitions": study.repetitions,
                        "seed": study.seed,
                    }),
                );
            }
            None => {
                let names: Vec<&str> = self.observables.iter().map(|o| o.name()).collect();
                map.insert("observables".into(), json!(names));
            }
        }
        doc
    }
}

/// One rejected field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

/// Every violation found in a config document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl ConfigErrors {
    pub fn single(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self(vec![ConfigIssue {
            path: path.into(),
            message: message.into(),
        }])
    }

    pub fn issues(&self) -> &[ConfigIssue] {
        &self.0
    }

    pub fn mentions(&self, path: &str) -> bool {
        self.0.iter().any(|i| i.path == path)
    }
}

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config ({} issue{})", self.0.len(), if self.0.len() == 1 { "" } else { "s" })?;
        for issue in &self.0 {
            write!(f, "\n  {issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidatedConfig {
    pub config: ExperimentConfig,
    pub warnings: Vec<String>,
}

/// `n` phases equally spaced over `[−π, π)`.
pub fn phase_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| -PI + 2.0 * PI * i as f64 / n as f64).collect()
}

/// Recursive merge: object members of `overlay` replace those of `base`.
pub fn merge_json(base: &mut Value, overlay: &Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (key, value) in o {
                match b.get_mut(key) {
                    Some(existing) if existing.is_object() && value.is_object() => merge_json(existing, value),
                    _ => {
                        b.insert(key.clone(), value.clone());
                    }
                }
            }
        }
        (b, o) => *b = o.clone(),
    }
}

/// Parses, defaults and cross-checks a config document.
pub fn validate_config(raw: &str) -> Result<ValidatedConfig, ConfigErrors> {
    let value: Value = if raw.trim().is_empty() {
        Value::Object(Map::new())
    } else {
        serde_json::from_str(raw).map_err(|e| ConfigErrors::single("", format!("not valid JSON: {e}")))?
    };
    validate_value(&value)
}

pub fn validate_value(value: &Value) -> Result<ValidatedConfig, ConfigErrors> {
    let mut cx = Checker::default();
    let config = cx.config(value);
    match config {
        Some(config) if cx.issues.is_empty() => Ok(ValidatedConfig {
            config,
            warnings: cx.warnings,
        }),
        _ => Err(ConfigErrors(cx.issues)),
    }
}

#[derive(Default)]
struct Checker {
    issues: Vec<ConfigIssue>,
    warnings: Vec<String>,
}

/// Members of one JSON object still waiting to be consumed.
struct Fields {
    path: String,
    map: Map<String, Value>,
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

impl Checker {
    fn issue(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            path: path.into(),
            message: message.into(),
        });
    }

    fn object(&mut self, value: Option<Value>, path: &str) -> Fields {
        let map = match value {
            None | Some(Value::Null) => Map::new(),
            Some(Value::Object(map)) => map,
            Some(other) => {
                self.issue(path, format!("expected an object, found {other}"));
                Map::new()
            }
        };
        Fields {
            path: path.to_string(),
            map,
        }
    }

    fn finish(&mut self, fields: Fields) {
        for key in fields.map.keys() {
            self.issue(join(&fields.path, key), "unknown field");
        }
    }

    fn unused(&mut self, fields: &mut Fields, keys: &[&str], experiment: ExperimentKind) {
        for key in keys {
            if fields.map.remove(*key).is_some() {
                self.issue(
                    join(&fields.path, key),
                    format!("not used by experiment {}", experiment.name()),
                );
            }
        }
    }

    fn real(&mut self, fields: &mut Fields, key: &str) -> Option<f64> {
        let path = join(&fields.path, key);
        match fields.map.remove(key)? {
            Value::Number(n) => match n.as_f64() {
                Some(x) if x.is_finite() => Some(x),
                _ => {
                    self.issue(path, "must be a finite number");
                    None
                }
            },
            other => {
                self.issue(path, format!("expected a number, found {other}"));
                None
            }
        }
    }

    fn positive(&mut self, fields: &mut Fields, key: &str, default: f64) -> f64 {
        let path = join(&fields.path, key);
        match self.real(fields, key) {
            Some(x) if x > 0.0 => x,
            Some(x) => {
                self.issue(path, format!("must be positive, got {x}"));
                default
            }
            None => default,
        }
    }

    fn integer_value(&mut self, value: Value, path: &str, min: u64) -> Option<u64> {
        let parsed = match &value {
            Value::Number(n) => n
                .as_u64()
                .or_else(|| n.as_f64().filter(|x| x.fract() == 0.0 && *x >= 0.0 && *x < 2f64.powi(63)).map(|x| x as u64)),
            _ => None,
        };
        match parsed {
            Some(x) if x >= min => Some(x),
            _ => {
                let what = if min == 0 { "non-negative" } else { "positive" };
                self.issue(path, format!("must be a {what} integer, found {value}"));
                None
            }
        }
    }

    fn integer(&mut self, fields: &mut Fields, key: &str, min: u64) -> Option<u64> {
        let path = join(&fields.path, key);
        let value = fields.map.remove(key)?;
        self.integer_value(value, &path, min)
    }

    fn config(&mut self, value: &Value) -> Option<ExperimentConfig> {
        let mut root = self.object(Some(value.clone()), "");

        let experiment = match root.map.remove("experiment") {
            None => {
                self.issue("experiment", "required; one of bloch, dynloc, aah, shots_study");
                None
            }
            Some(Value::String(s)) => {
                let kind = ExperimentKind::from_name(&s);
                if kind.is_none() {
                    self.issue(
                        "experiment",
                        format!("unknown experiment {s:?}; expected bloch, dynloc, aah or shots_study"),
                    );
                }
                kind
            }
            Some(other) => {
                self.issue("experiment", format!("expected a string, found {other}"));
                None
            }
        };
        let Some(experiment) = experiment else {
            return None;
        };

        let model = self.model(root.map.remove("model"), experiment);
        let grid = self.grid(root.map.remove("grid"), experiment, model.as_ref());
        let initial_state = model
            .as_ref()
            .and_then(|m| self.initial_state(root.map.remove("initial_state"), m.sites));
        let backend = self.backend(root.map.remove("backend"), experiment);
        let compile_path = self.compile_path(root.map.remove("compile_path"));
        let observables = self.observables(root.map.remove("observables"), experiment);
        let output_dir = match root.map.remove("output_dir") {
            None | Some(Value::Null) => PathBuf::from(format!("out/{}", experiment.name())),
            Some(Value::String(s)) if !s.is_empty() => PathBuf::from(s),
            Some(other) => {
                self.issue("output_dir", format!("expected a non-empty path string, found {other}"));
                PathBuf::new()
            }
        };
        let shots_study = match experiment {
            ExperimentKind::ShotsStudy => Some(self.shots_study(root.map.remove("shots_study"))),
            _ => {
                if root.map.remove("shots_study").is_some() {
                    self.issue("shots_study", format!("not used by experiment {}", experiment.name()));
                }
                None
            }
        };
        self.finish(root);

        let (model, grid, initial_state) = (model?, grid?, initial_state?);
        if model.sites > FOCK_BACKEND_MODE_CAP {
            self.warnings.push(format!(
                "model.sites = {} exceeds the {FOCK_BACKEND_MODE_CAP}-mode cap of Fock-backend photonic simulators; \
                 results here are exact but cannot be reproduced on such a backend",
                model.sites
            ));
        }
        Some(ExperimentConfig {
            experiment,
            model,
            grid,
            initial_state,
            backend,
            compile_path,
            observables,
            output_dir,
            shots_study,
        })
    }

    fn model(&mut self, value: Option<Value>, experiment: ExperimentKind) -> Option<ModelConfig> {
        let mut f = self.object(value, "model");
        let sites = if f.map.contains_key("sites") {
            self.integer(&mut f, "sites", 1).map(|m| m as usize)
        } else {
            Some(7)
        };
        let default_hopping = if experiment == ExperimentKind::Dynloc { 0.5 } else { 1.0 };
        let hopping = self.real(&mut f, "hopping").unwrap_or(default_hopping);
        let hbar = self.positive(&mut f, "hbar", 1.0);
        let lattice_a = self.positive(&mut f, "lattice_a", 1.0);

        let kind = match experiment {
            ExperimentKind::Bloch => {
                self.unused(&mut f, &["amplitude", "omega", "lambda", "alpha", "phases"], experiment);
                let field = match self.real(&mut f, "field") {
                    Some(0.0) => {
                        self.issue("model.field", "must be nonzero");
                        2.0
                    }
                    Some(x) => x,
                    None => 2.0,
                };
                ModelKind::Bloch { field }
            }
            ExperimentKind::Dynloc => {
                self.unused(&mut f, &["field", "lambda", "alpha", "phases"], experiment);
                let amplitude = self.real(&mut f, "amplitude").unwrap_or(2.405);
                let omega = self.positive(&mut f, "omega", 1.0);
                ModelKind::Dynloc { amplitude, omega }
            }
            ExperimentKind::Aah | ExperimentKind::ShotsStudy => {
                self.unused(&mut f, &["field", "amplitude", "omega"], experiment);
                let lambda = self.real(&mut f, "lambda").unwrap_or(2.0);
                let alpha = self.real(&mut f, "alpha").unwrap_or(INVERSE_GOLDEN_MEAN);
                let default_phases = if experiment == ExperimentKind::ShotsStudy {
                    vec![0.0]
                } else {
                    phase_grid(DEFAULT_PHASE_COUNT)
                };
                let phases = self.phases(f.map.remove("phases"), default_phases);
                if experiment == ExperimentKind::ShotsStudy && phases.len() != 1 {
                    self.issue("model.phases", "shots_study uses exactly one phase");
                }
                ModelKind::Aah { lambda, alpha, phases }
            }
        };
        self.finish(f);
        sites.map(|sites| ModelConfig {
            sites,
            hopping,
            hbar,
            lattice_a,
            kind,
        })
    }

    fn phases(&mut self, value: Option<Value>, default: Vec<f64>) -> Vec<f64> {
        let path = "model.phases";
        match value {
            None | Some(Value::Null) => default,
            Some(Value::Number(n)) => match n.as_f64() {
                Some(x) if x.is_finite() => vec![x],
                _ => {
                    self.issue(path, "must be finite");
                    default
                }
            },
            Some(Value::Array(items)) => {
                if items.is_empty() {
                    self.issue(path, "needs at least one phase");
                    return default;
                }
                let mut out = Vec::with_capacity(items.len());
                for (i, item) in items.into_iter().enumerate() {
                    match item.as_f64() {
                        Some(x) if x.is_finite() => out.push(x),
                        _ => self.issue(format!("{path}[{i}]"), format!("expected a finite number, found {item}")),
                    }
                }
                out
            }
            Some(Value::Object(map)) => {
                let mut f = Fields {
                    path: path.to_string(),
                    map,
                };
                let count = self.integer(&mut f, "count", 1).map(|n| n as usize);
                self.finish(f);
                count.map(phase_grid).unwrap_or(default)
            }
            Some(other) => {
                self.issue(path, format!("expected a list of phases or {{\"count\": n}}, found {other}"));
                default
            }
        }
    }

    fn grid(&mut self, value: Option<Value>, experiment: ExperimentKind, model: Option<&ModelConfig>) -> Option<TimeGrid> {
        let mut f = self.object(value, "grid");
        let (default_end, default_steps) = match (experiment, model.map(|m| &m.kind)) {
            (ExperimentKind::Bloch, Some(ModelKind::Bloch { field })) => {
                let m = model.expect("matched");
                let period = bloch_scales(m.hopping, *field, m.lattice_a, m.hbar)
                    .map(|s| s.period.abs())
                    .unwrap_or(PI);
                (3.0 * period, 300)
            }
            (ExperimentKind::Dynloc, _) => (50.0, 2000),
            (ExperimentKind::Aah, _) => (75.0, 100),
            (ExperimentKind::ShotsStudy, _) => (25.0, 100),
            _ => (1.0, 100),
        };
        let t_start = self.real(&mut f, "t_start").unwrap_or(0.0);
        let t_end = self.real(&mut f, "t_end").unwrap_or(default_end);
        let steps = if f.map.contains_key("steps") {
            self.integer(&mut f, "steps", 1).map(|s| s as usize)
        } else {
            Some(default_steps)
        };
        self.finish(f);
        if !(t_end > t_start) {
            self.issue("grid.t_end", format!("must exceed grid.t_start ({t_end} ≤ {t_start})"));
            return None;
        }
        steps.map(|steps| TimeGrid { t_start, t_end, steps })
    }

    fn initial_state(&mut self, value: Option<Value>, sites: usize) -> Option<FockState> {
        let path = "initial_state";
        let occupations = match value {
            None | Some(Value::Null) => {
                let mut v = vec![0; sites];
                v[sites / 2] = 1;
                v
            }
            Some(Value::Array(items)) => {
                let mut v = Vec::with_capacity(items.len());
                let before = self.issues.len();
                for (i, item) in items.into_iter().enumerate() {
                    if let Some(n) = self.integer_value(item, &format!("{path}[{i}]"), 0) {
                        v.push(n as usize);
                    }
                }
                if self.issues.len() > before {
                    return None;
                }
                v
            }
            Some(other) => {
                self.issue(path, format!("expected an occupation list, found {other}"));
                return None;
            }
        };
        if occupations.len() != sites {
            self.issue(
                path,
                format!("has {} modes but model.sites = {sites}", occupations.len()),
            );
            return None;
        }
        let photons: usize = occupations.iter().sum();
        if photons == 0 {
            self.issue(path, "needs at least one photon");
            return None;
        }
        if photons > MAX_PERMANENT_ORDER {
            self.issue(path, format!("{photons} photons exceed the supported maximum of {MAX_PERMANENT_ORDER}"));
            return None;
        }
        let space = configuration_count(sites, photons);
        if space > MAX_CONFIGURATIONS as u128 {
            self.issue(
                path,
                format!("{space} output configurations exceed the supported maximum of {MAX_CONFIGURATIONS}"),
            );
            return None;
        }
        Some(FockState::new(occupations))
    }

    fn backend(&mut self, value: Option<Value>, experiment: ExperimentKind) -> Backend {
        let mut f = match value {
            Some(Value::String(s)) => {
                let mut map = Map::new();
                map.insert("kind".into(), Value::String(s));
                Fields {
                    path: "backend".into(),
                    map,
                }
            }
            other => self.object(other, "backend"),
        };
        let kind = match f.map.remove("kind") {
            None => "exact_probs".to_string(),
            Some(Value::String(s)) => s,
            Some(other) => {
                self.issue("backend.kind", format!("expected a string, found {other}"));
                String::new()
            }
        };
        let backend = match kind.as_str() {
            "exact_probs" => Backend::ExactProbs,
            "shots" => {
                if experiment == ExperimentKind::ShotsStudy {
                    self.issue("backend.kind", "shots_study draws its own samples; use exact_probs");
                }
                let shots = match self.integer(&mut f, "shots", 1) {
                    Some(s) => s,
                    None => {
                        if !self.issues.iter().any(|i| i.path == "backend.shots") {
                            self.issue("backend.shots", "required for the shots backend");
                        }
                        1
                    }
                };
                let seed = self.integer(&mut f, "seed", 0).unwrap_or(0);
                Backend::Shots { shots, seed }
            }
            "" => Backend::ExactProbs,
            other => {
                self.issue("backend.kind", format!("unknown backend {other:?}; expected exact_probs or shots"));
                Backend::ExactProbs
            }
        };
        self.finish(f);
        backend
    }

    fn compile_path(&mut self, value: Option<Value>) -> CompilePath {
        let mut f = match value {
            Some(Value::String(s)) => {
                let mut map = Map::new();
                map.insert("kind".into(), Value::String(s));
                Fields {
                    path: "compile_path".into(),
                    map,
                }
            }
            other => self.object(other, "compile_path"),
        };
        let kind = match f.map.remove("kind") {
            None => "rectangular".to_string(),
            Some(Value::String(s)) => s,
            Some(other) => {
                self.issue("compile_path.kind", format!("expected a string, found {other}"));
                String::new()
            }
        };
        let path = match kind.as_str() {
            "rectangular" | "" => CompilePath::Rectangular,
            "trotter" => CompilePath::Trotter {
                steps: self.integer(&mut f, "steps", 1).unwrap_or(8) as usize,
            },
            other => {
                self.issue(
                    "compile_path.kind",
                    format!("unknown compile path {other:?}; expected rectangular or trotter"),
                );
                CompilePath::Rectangular
            }
        };
        self.finish(f);
        path
    }

    fn observables(&mut self, value: Option<Value>, experiment: ExperimentKind) -> Vec<ObservableKind> {
        let default = match experiment {
            ExperimentKind::Bloch | ExperimentKind::Dynloc => vec![ObservableKind::Msd],
            ExperimentKind::Aah => vec![ObservableKind::S2Norm, ObservableKind::Ipr, ObservableKind::Rmsd],
            ExperimentKind::ShotsStudy => Vec::new(),
        };
        let Some(value) = value else {
            return default;
        };
        if experiment == ExperimentKind::ShotsStudy {
            self.issue("observables", "not used by experiment shots_study");
            return default;
        }
        let Value::Array(items) = value else {
            self.issue("observables", format!("expected a list of names, found {value}"));
            return default;
        };
        let mut out = Vec::new();
        for (i, item) in items.iter().enumerate() {
            match item.as_str().and_then(ObservableKind::from_name) {
                Some(kind) if !out.contains(&kind) => out.push(kind),
                Some(_) => self.issue(format!("observables[{i}]"), "listed twice"),
                None => {
                    let names: Vec<&str> = ObservableKind::ALL.iter().map(|k| k.name()).collect();
                    self.issue(
                        format!("observables[{i}]"),
                        format!("unknown observable {item}; expected one of {}", names.join(", ")),
                    )
                }
            }
        }
        out
    }

    fn shots_study(&mut self, value: Option<Value>) -> ShotsStudyConfig {
        let mut f = self.object(value, "shots_study");
        let shot_counts = match f.map.remove("shot_counts") {
            None => DEFAULT_SHOT_GRID.to_vec(),
            Some(Value::Array(items)) if !items.is_empty() => items
                .into_iter()
                .enumerate()
                .filter_map(|(i, item)| self.integer_value(item, &format!("shots_study.shot_counts[{i}]"), 1))
                .collect(),
            Some(other) => {
                self.issue("shots_study.shot_counts", format!("expected a non-empty list, found {other}"));
                Vec::new()
            }
        };
        let repetitions = self.integer(&mut f, "repetitions", 1).unwrap_or(1) as usize;
        let seed = self.integer(&mut f, "seed", 0).unwrap_or(0);
        self.finish(f);
        ShotsStudyConfig {
            shot_counts,
            repetitions,
            seed,
        }
    }
}
