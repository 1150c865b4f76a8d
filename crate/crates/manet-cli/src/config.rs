//! Configuration schema and validation.
//!
//! Configs are flat `key = value` text (`#` comments, lists as
//! comma-separated values, grids as `start:stop:step`) or a JSON object
//! with the same keys. Unknown keys are rejected. Every derived run
//! configuration is validated up front; Z0 floor violations are reported
//! with the regime bound named.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use manet_core::analysis::z0_constraint;
use manet_core::simcore::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Simulate,
    Sweep,
    Oracle,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Command::Analyze => "analyze",
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Oracle => "oracle",
        };
        write!(f, "{name}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Syntax { line: usize, message: String },
    Json(String),
    UnknownKeys(Vec<String>),
    MissingKey(&'static str),
    BadValue { key: String, message: String },
    DuplicateSeeds,
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Syntax { line, message } => write!(f, "line {line}: {message}"),
            ConfigError::Json(m) => write!(f, "invalid JSON config: {m}"),
            ConfigError::UnknownKeys(keys) => write!(f, "unknown keys: {}", keys.join(", ")),
            ConfigError::MissingKey(k) => write!(f, "missing required key `{k}`"),
            ConfigError::BadValue { key, message } => write!(f, "key `{key}`: {message}"),
            ConfigError::DuplicateSeeds => write!(f, "seeds must be distinct"),
            ConfigError::Invalid(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Z0 specification: a fixed length or the regime floor times a multiplier.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum Z0Spec {
    Fixed(f64),
    Auto { mult: f64 },
}

impl Z0Spec {
    pub fn resolve(&self, delta: f64, n: f64) -> f64 {
        match *self {
            Z0Spec::Fixed(z) => z,
            Z0Spec::Auto { mult } => mult * z0_constraint(delta, n),
        }
    }
}

/// The swept parameter and its values.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub enum SweepAxis {
    N(Vec<u32>),
    Delta(Vec<f64>),
    Z0(Vec<f64>),
    Lambda(Vec<f64>),
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::N(_) => "n",
            SweepAxis::Delta(_) => "delta",
            SweepAxis::Z0(_) => "z0",
            SweepAxis::Lambda(_) => "lambda",
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            SweepAxis::N(v) => v.iter().map(|&x| x as f64).collect(),
            SweepAxis::Delta(v) | SweepAxis::Z0(v) | SweepAxis::Lambda(v) => v.clone(),
        }
    }
}

/// Which estimator an `oracle` run drives.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub enum OracleSpec {
    /// Same-cell probability of two homes at the given distances.
    Meeting {
        home_distances: Vec<f64>,
        cell_area: f64,
        trials: u64,
    },
    /// Populated-squarelet probability at a routing step.
    Populated {
        step: u32,
        cell_area: Option<f64>,
        instances: u32,
        slots_per_instance: u32,
    },
    /// In-cell contention factor under saturation.
    PBeta {
        step: u32,
        cell_area: Option<f64>,
        instances: u32,
        slots_per_instance: u32,
    },
}

/// Grids for the `analyze` command.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CurvePlan {
    pub delta_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
}

/// A fully validated experiment plan.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub command: Command,
    pub base: SimConfig,
    pub z0_spec: Z0Spec,
    pub sweep: Option<SweepAxis>,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub workers: usize,
    pub oracle: Option<OracleSpec>,
    pub curves: CurvePlan,
    pub export_shape: bool,
}

/// Command-line overrides applied after the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

const KNOWN_KEYS: &[&str] = &[
    "n",
    "delta",
    "z0",
    "z0_mult",
    "lambda",
    "slots",
    "warmup",
    "seed",
    "seeds",
    "guard",
    "area_mult",
    "c_far",
    "shape_resolution",
    "queue_cap",
    "saturate",
    "verify_protocol",
    "record_service",
    "trace_samples",
    "sweep",
    "values",
    "out",
    "workers",
    "estimator",
    "trials",
    "instances",
    "slots_per_instance",
    "home_distances",
    "cell_area",
    "step",
    "delta_grid",
    "beta_grid",
    "export_shape",
];

/// Raw key-value map with helpers that consume keys.
struct Raw {
    map: BTreeMap<String, String>,
}

impl Raw {
    fn parse(text: &str) -> Result<Raw, ConfigError> {
        let trimmed = text.trim_start();
        let map = if trimmed.starts_with('{') {
            Self::parse_json(text)?
        } else {
            Self::parse_flat(text)?
        };
        let unknown: Vec<String> = map
            .keys()
            .filter(|k| !KNOWN_KEYS.contains(&k.as_str()))
            .cloned()
            .collect();
        if !unknown.is_empty() {
            return Err(ConfigError::UnknownKeys(unknown));
        }
        Ok(Raw { map })
    }

    fn parse_flat(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
        let mut map = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = match line.find('#') {
                Some(pos) => &line[..pos],
                None => line,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: idx + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim().to_string();
            if map.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(ConfigError::Syntax {
                    line: idx + 1,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(map)
    }

    fn parse_json(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ConfigError::Json(e.to_string()))?;
        let obj = value
            .as_object()
            .ok_or_else(|| ConfigError::Json("top level must be an object".into()))?;
        let mut map = BTreeMap::new();
        for (k, v) in obj {
            let s = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::Bool(b) => b.to_string(),
                serde_json::Value::Array(items) => {
                    let parts: Result<Vec<String>, ConfigError> = items
                        .iter()
                        .map(|item| match item {
                            serde_json::Value::Number(n) => Ok(n.to_string()),
                            serde_json::Value::String(s) => Ok(s.clone()),
                            other => Err(ConfigError::Json(format!(
                                "unsupported array element for `{k}`: {other}"
                            ))),
                        })
                        .collect();
                    parts?.join(",")
                }
                other => {
                    return Err(ConfigError::Json(format!(
                        "unsupported value for `{k}`: {other}"
                    )))
                }
            };
            map.insert(k.clone(), s);
        }
        Ok(map)
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn take_parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.take(key) {
            None => Ok(None),
            Some(s) => s.parse::<T>().map(Some).map_err(|e| ConfigError::BadValue {
                key: key.to_string(),
                message: format!("cannot parse `{s}`: {e}"),
            }),
        }
    }

    fn take_bool(&mut self, key: &str, default: bool) -> Result<bool, ConfigError> {
        Ok(self.take_parsed::<bool>(key)?.unwrap_or(default))
    }

    fn take_list_f64(&mut self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(s) => parse_grid(&s).map(Some).map_err(|message| ConfigError::BadValue {
                key: key.to_string(),
                message,
            }),
        }
    }
}

/// Parse `a,b,c` or `start:stop:step` into a list.
fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("grid `{s}` must be start:stop:step"));
        }
        let start: f64 = parts[0].trim().parse().map_err(|e| format!("{e}"))?;
        let stop: f64 = parts[1].trim().parse().map_err(|e| format!("{e}"))?;
        let step: f64 = parts[2].trim().parse().map_err(|e| format!("{e}"))?;
        if !(step > 0.0) || stop < start {
            return Err(format!("grid `{s}` must have positive step and stop >= start"));
        }
        let count = ((stop - start) / step).round() as usize + 1;
        Ok((0..count)
            .map(|i| start + i as f64 * step)
            .filter(|&v| v <= stop + 1e-9)
            .collect())
    } else {
        s.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
            .collect()
    }
}

fn default_curve_plan() -> CurvePlan {
    CurvePlan {
        delta_grid: (0..=40).map(|i| i as f64 * 0.1).collect(),
        beta_grid: (0..=20).map(|i| i as f64 * 0.025).collect(),
    }
}

impl ExperimentPlan {
    /// Parse and fully validate a plan for the given command.
    pub fn parse(
        command: Command,
        text: &str,
        overrides: Overrides,
    ) -> Result<ExperimentPlan, ConfigError> {
        let mut raw = Raw::parse(text)?;

        // Simulation baseline (required for everything but `analyze`).
        let needs_sim = !matches!(command, Command::Analyze);
        let n: u32 = match raw.take_parsed("n")? {
            Some(v) => v,
            None if needs_sim => return Err(ConfigError::MissingKey("n")),
            None => 1024,
        };
        let delta: f64 = match raw.take_parsed("delta")? {
            Some(v) => v,
            None if needs_sim => return Err(ConfigError::MissingKey("delta")),
            None => 2.0,
        };
        let z0_mult: f64 = raw.take_parsed("z0_mult")?.unwrap_or(1.0);
        let z0_spec = match raw.take("z0") {
            None => Z0Spec::Auto { mult: z0_mult },
            Some(s) if s == "auto" => Z0Spec::Auto { mult: z0_mult },
            Some(s) => Z0Spec::Fixed(s.parse().map_err(|e| ConfigError::BadValue {
                key: "z0".into(),
                message: format!("expected `auto` or a number, got `{s}`: {e}"),
            })?),
        };
        let lambda: f64 = raw.take_parsed("lambda")?.unwrap_or(0.0);
        let slots: u64 = match raw.take_parsed("slots")? {
            Some(v) => v,
            None if matches!(command, Command::Simulate | Command::Sweep) => {
                return Err(ConfigError::MissingKey("slots"))
            }
            None => 1000,
        };
        let seed: u64 = overrides
            .seed
            .or(raw.take_parsed("seed")?)
            .unwrap_or(1);
        let seeds: Vec<u64> = match raw.take("seeds") {
            Some(s) => {
                let parsed: Result<Vec<u64>, _> = s
                    .split(',')
                    .map(|p| p.trim().parse::<u64>())
                    .collect();
                parsed.map_err(|e| ConfigError::BadValue {
                    key: "seeds".into(),
                    message: e.to_string(),
                })?
            }
            None => vec![seed],
        };
        {
            let mut sorted = seeds.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != seeds.len() {
                return Err(ConfigError::DuplicateSeeds);
            }
        }

        let mut base = SimConfig::new(n, delta, z0_spec.resolve(delta, n as f64), lambda, slots, seed);
        if let Some(w) = raw.take_parsed("warmup")? {
            base.warmup = w;
        }
        if let Some(g) = raw.take_parsed("guard")? {
            base.guard = g;
        }
        if let Some(a) = raw.take_parsed("area_mult")? {
            base.area_const = a;
        }
        if let Some(c) = raw.take_parsed("c_far")? {
            base.c_far = c;
        }
        if let Some(r) = raw.take_parsed("shape_resolution")? {
            base.shape_resolution = r;
        }
        if let Some(q) = raw.take_parsed("queue_cap")? {
            base.queue_cap = q;
        }
        if let Some(t) = raw.take_parsed("trace_samples")? {
            base.trace_samples = t;
        }
        base.saturate = raw.take_bool("saturate", false)?;
        base.verify_protocol = raw.take_bool("verify_protocol", false)?;
        base.record_service_samples = raw.take_bool("record_service", false)?;

        // Sweep axis.
        let sweep = match (raw.take("sweep"), raw.take_list_f64("values")?) {
            (None, None) => None,
            (Some(_), None) => return Err(ConfigError::MissingKey("values")),
            (None, Some(_)) => return Err(ConfigError::MissingKey("sweep")),
            (Some(axis), Some(values)) => Some(match axis.as_str() {
                "n" => SweepAxis::N(
                    values
                        .iter()
                        .map(|&v| {
                            if v >= 4.0 && v.fract() == 0.0 {
                                Ok(v as u32)
                            } else {
                                Err(ConfigError::BadValue {
                                    key: "values".into(),
                                    message: format!("n value {v} must be an integer >= 4"),
                                })
                            }
                        })
                        .collect::<Result<Vec<u32>, _>>()?,
                ),
                "delta" => SweepAxis::Delta(values),
                "z0" => SweepAxis::Z0(values),
                "lambda" => SweepAxis::Lambda(values),
                other => {
                    return Err(ConfigError::BadValue {
                        key: "sweep".into(),
                        message: format!("unknown axis `{other}` (n, delta, z0, lambda)"),
                    })
                }
            }),
        };
        if matches!(command, Command::Sweep) && sweep.is_none() {
            return Err(ConfigError::MissingKey("sweep"));
        }

        // Oracle estimator.
        let oracle = match raw.take("estimator") {
            None if matches!(command, Command::Oracle) => {
                return Err(ConfigError::MissingKey("estimator"))
            }
            None => None,
            Some(which) => {
                let instances: u32 = raw.take_parsed("instances")?.unwrap_or(100);
                let slots_per_instance: u32 =
                    raw.take_parsed("slots_per_instance")?.unwrap_or(100);
                let trials: u64 = raw.take_parsed("trials")?.unwrap_or(1_000_000);
                let cell_area: Option<f64> = match raw.take("cell_area") {
                    None => None,
                    Some(s) if s == "auto" => None,
                    Some(s) => Some(s.parse().map_err(|e| ConfigError::BadValue {
                        key: "cell_area".into(),
                        message: format!("{e}"),
                    })?),
                };
                let step: u32 = raw.take_parsed("step")?.unwrap_or(0);
                match which.as_str() {
                    "meeting" => OracleSpec::Meeting {
                        home_distances: raw
                            .take_list_f64("home_distances")?
                            .ok_or(ConfigError::MissingKey("home_distances"))?,
                        cell_area: cell_area
                            .ok_or(ConfigError::MissingKey("cell_area"))?,
                        trials,
                    },
                    "populated" => OracleSpec::Populated {
                        step,
                        cell_area,
                        instances,
                        slots_per_instance,
                    },
                    "pbeta" => OracleSpec::PBeta {
                        step,
                        cell_area,
                        instances,
                        slots_per_instance,
                    },
                    other => {
                        return Err(ConfigError::BadValue {
                            key: "estimator".into(),
                            message: format!(
                                "unknown estimator `{other}` (meeting, populated, pbeta)"
                            ),
                        })
                    }
                }
                .into()
            }
        };

        let curves = CurvePlan {
            delta_grid: raw
                .take_list_f64("delta_grid")?
                .unwrap_or_else(|| default_curve_plan().delta_grid),
            beta_grid: raw
                .take_list_f64("beta_grid")?
                .unwrap_or_else(|| default_curve_plan().beta_grid),
        };

        let output_dir = overrides
            .out
            .or_else(|| raw.take("out").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("results"));
        let workers = overrides
            .workers
            .or(raw.take_parsed("workers")?)
            .unwrap_or(1)
            .max(1);
        let export_shape = raw.take_bool("export_shape", false)?;

        let plan = ExperimentPlan {
            command,
            base,
            z0_spec,
            sweep,
            seeds,
            output_dir,
            workers,
            oracle,
            curves,
            export_shape,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Validate every run configuration this plan derives.
    pub fn validate(&self) -> Result<(), ConfigError> {
        match self.command {
            Command::Analyze => Ok(()),
            Command::Oracle => {
                // The estimators need a valid geometry and Z0.
                self.base
                    .validate()
                    .map_err(|e| ConfigError::Invalid(e.to_string()))
            }
            Command::Simulate => self
                .base
                .validate()
                .map_err(|e| ConfigError::Invalid(e.to_string())),
            Command::Sweep => {
                for cfg in self.derived_configs() {
                    cfg.validate().map_err(|e| {
                        ConfigError::Invalid(format!(
                            "derived config ({} = {}, seed {}): {e}",
                            self.sweep.as_ref().unwrap().name(),
                            sweep_value_of(&cfg, self.sweep.as_ref().unwrap()),
                            cfg.seed
                        ))
                    })?;
                }
                Ok(())
            }
        }
    }

    /// All run configurations of a sweep (sweep value major, seed minor).
    /// Auto Z0 re-resolves against each derived (n, delta).
    pub fn derived_configs(&self) -> Vec<SimConfig> {
        let mut out = Vec::new();
        let values: Vec<f64> = match &self.sweep {
            Some(axis) => axis.values(),
            None => vec![f64::NAN],
        };
        for &value in &values {
            for &seed in &self.seeds {
                let mut cfg = self.base.clone();
                if let Some(axis) = &self.sweep {
                    match axis {
                        SweepAxis::N(_) => {
                            cfg.n = value as u32;
                            cfg.z0 = self.z0_spec.resolve(cfg.delta, cfg.n as f64);
                        }
                        SweepAxis::Delta(_) => {
                            cfg.delta = value;
                            cfg.z0 = self.z0_spec.resolve(cfg.delta, cfg.n as f64);
                        }
                        SweepAxis::Z0(_) => cfg.z0 = value,
                        SweepAxis::Lambda(_) => cfg.lambda = value,
                    }
                }
                cfg.seed = seed;
                out.push(cfg);
            }
        }
        out
    }
}

pub(crate) fn sweep_value_of(cfg: &SimConfig, axis: &SweepAxis) -> f64 {
    match axis {
        SweepAxis::N(_) => cfg.n as f64,
        SweepAxis::Delta(_) => cfg.delta,
        SweepAxis::Z0(_) => cfg.z0,
        SweepAxis::Lambda(_) => cfg.lambda,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
n = 1024
delta = 2
z0 = auto
lambda = 0.01
slots = 10000
seed = 1
";

    #[test]
    fn minimal_config_resolves_auto_z0() {
        let plan = ExperimentPlan::parse(Command::Simulate, MINIMAL, Overrides::default()).unwrap();
        let expect = (1024.0f64).ln().sqrt();
        assert!((plan.base.z0 - expect).abs() < 1e-12);
        assert_eq!(plan.base.warmup, 1000);
        assert_eq!(plan.seeds, vec![1]);
    }

    #[test]
    fn z0_below_floor_is_rejected_with_the_bound_named() {
        let text = "\
n = 262144
delta = 0.5
z0 = 3.0
lambda = 0.01
slots = 100
";
        let err = ExperimentPlan::parse(Command::Simulate, text, Overrides::default())
            .unwrap_err()
            .to_string();
        assert!(err.contains("n^(1/6)"), "{err}");
    }

    #[test]
    fn duplicate_seeds_rejected() {
        let text = format!("{MINIMAL}seeds = 1,2,2\n");
        assert_eq!(
            ExperimentPlan::parse(Command::Simulate, &text, Overrides::default()).unwrap_err(),
            ConfigError::DuplicateSeeds
        );
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = format!("{MINIMAL}lambda_rate = 3\n");
        match ExperimentPlan::parse(Command::Simulate, &text, Overrides::default()) {
            Err(ConfigError::UnknownKeys(keys)) => assert_eq!(keys, vec!["lambda_rate"]),
            other => panic!("expected unknown-key rejection, got {other:?}"),
        }
    }

    #[test]
    fn json_config_is_equivalent() {
        let flat = ExperimentPlan::parse(Command::Simulate, MINIMAL, Overrides::default()).unwrap();
        let json = r#"{"n": 1024, "delta": 2, "z0": "auto", "lambda": 0.01, "slots": 10000, "seed": 1}"#;
        let parsed = ExperimentPlan::parse(Command::Simulate, json, Overrides::default()).unwrap();
        assert_eq!(flat, parsed);
    }

    #[test]
    fn sweep_derives_validated_configs() {
        let text = "\
n = 1024
delta = 2
z0 = auto
z0_mult = 2
lambda = 0.005
slots = 2000
sweep = n
values = 1024, 4096
seeds = 1, 2, 3
";
        let plan = ExperimentPlan::parse(Command::Sweep, text, Overrides::default()).unwrap();
        let configs = plan.derived_configs();
        assert_eq!(configs.len(), 6);
        assert_eq!(configs[0].n, 1024);
        assert_eq!(configs[5].n, 4096);
        // Auto Z0 re-resolves per n.
        assert!(configs[5].z0 > configs[0].z0);
        assert_eq!(configs[3].seed, 1);
    }

    #[test]
    fn grids_parse_both_forms() {
        assert_eq!(parse_grid("1, 2, 3").unwrap(), vec![1.0, 2.0, 3.0]);
        let g = parse_grid("0:1:0.25").unwrap();
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(parse_grid("1:0:1").is_err());
    }
}
