//! Experiment configs: a versioned JSON envelope around kind-specific
//! parameters. Unknown keys are rejected at every level.

use std::fmt;
use std::path::Path;

use hv_core::literal::{BorelLit, ContextLit, GaugeLit, OperatorLit, PhaseSpeedLit, StateLit};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl From<hv_core::HvError> for ConfigError {
    fn from(e: hv_core::HvError) -> Self {
        ConfigError(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Born,
    Dynamics,
    Uncertainty,
    Context,
    Partition,
    Independence,
    Frame,
    Factorize,
}

impl Kind {
    pub const ALL: [Kind; 8] = [
        Kind::Born,
        Kind::Dynamics,
        Kind::Uncertainty,
        Kind::Context,
        Kind::Partition,
        Kind::Independence,
        Kind::Frame,
        Kind::Factorize,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Born => "born",
            Kind::Dynamics => "dynamics",
            Kind::Uncertainty => "uncertainty",
            Kind::Context => "context",
            Kind::Partition => "partition",
            Kind::Independence => "independence",
            Kind::Frame => "frame",
            Kind::Factorize => "factorize",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Kind::Born => "exact arc probabilities vs phase-sampled frequencies",
            Kind::Dynamics => "RK4 field integration vs closed-form hamiltonian flow",
            Kind::Uncertainty => {
                "bracket identities, dispersion forms and the uncertainty relation"
            }
            Kind::Context => "truth-value disagreements of one projector under different contexts",
            Kind::Partition => "stacked partitions of resolutions and the boolean morphism",
            Kind::Independence => "banal vs non-banal independence of projector pairs",
            Kind::Frame => "weight-one frame functions and shared-vector disagreements",
            Kind::Factorize => "factorization g = b∘f of hidden observables",
        }
    }

    /// Keys of `params` without defaults.
    pub fn required(self) -> &'static [&'static str] {
        match self {
            Kind::Born => &[],
            Kind::Dynamics => &["generator", "state"],
            Kind::Uncertainty => &[],
            Kind::Context => &[],
            Kind::Partition => &[],
            Kind::Independence => &[],
            Kind::Frame => &[],
            Kind::Factorize => &["f"],
        }
    }
}

/// The envelope shared by all experiments.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope {
    pub version: u32,
    pub kind: Kind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub gauge: GaugeLit,
    #[serde(default = "empty_object")]
    pub params: Value,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BornCase {
    pub operator: OperatorLit,
    pub state: StateLit,
    pub set: BorelLit,
    #[serde(default)]
    pub context: ContextLit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BornParams {
    #[serde(default)]
    pub cases: Vec<BornCase>,
    /// Seeded random cases appended after the explicit ones.
    #[serde(default)]
    pub random_cases: usize,
    #[serde(default = "default_max_n")]
    pub max_n: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// Cases allowed outside `sigma` standard errors, per 50 cases.
    #[serde(default = "default_misses_per_50")]
    pub misses_per_50: usize,
    #[serde(default = "default_exact_tol")]
    pub exact_tolerance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsParams {
    pub generator: OperatorLit,
    #[serde(default)]
    pub phase_speed: PhaseSpeedLit,
    pub state: StateLit,
    #[serde(default = "one")]
    pub t_end: f64,
    #[serde(default = "default_step")]
    pub step: f64,
    /// Allowed sup-distance between integrated and closed-form trajectories.
    #[serde(default = "default_flow_tol")]
    pub tolerance: f64,
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
    #[serde(default = "default_group_tol")]
    pub group_tolerance: f64,
    /// Write every k-th integrator step to the trajectory CSV.
    #[serde(default = "one_usize")]
    pub output_every: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UncertaintyParams {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_max_n")]
    pub max_n: usize,
    #[serde(default = "default_bracket_tol")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextParams {
    #[serde(default = "default_context_projector")]
    pub projector: OperatorLit,
    /// The first context is compared against each of the others.
    #[serde(default = "default_contexts")]
    pub contexts: Vec<ContextLit>,
    #[serde(default = "default_budget")]
    pub budget: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionParams {
    /// An explicit resolution of the identity.
    #[serde(default)]
    pub projectors: Vec<OperatorLit>,
    #[serde(default = "default_resolutions")]
    pub random_resolutions: usize,
    #[serde(default = "default_max_n")]
    pub max_n: usize,
    #[serde(default = "default_states")]
    pub states: usize,
    #[serde(default)]
    pub context: ContextLit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndependenceParams {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_independence_n")]
    pub max_n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameParams {
    #[serde(default = "default_frame_dims")]
    pub dims: Vec<usize>,
    /// Random bases per dimension, besides the standard basis and one sharing `e₁`.
    #[serde(default = "default_bases")]
    pub random_bases: usize,
    #[serde(default = "default_budget")]
    pub phases: usize,
    #[serde(default)]
    pub context: ContextLit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorizeParams {
    pub f: OperatorLit,
    /// Target observable; omitted means a seeded random collapse of `f`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<OperatorLit>,
    #[serde(default = "default_expect_nested")]
    pub expect_nested: bool,
    #[serde(default = "default_pointwise_trials")]
    pub trials: usize,
    #[serde(default)]
    pub context: ContextLit,
}

fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}
fn default_max_n() -> usize {
    8
}
fn default_samples() -> usize {
    100_000
}
fn default_sigma() -> f64 {
    3.0
}
fn default_misses_per_50() -> usize {
    1
}
fn default_exact_tol() -> f64 {
    1e-12
}
fn default_step() -> f64 {
    1e-3
}
fn default_flow_tol() -> f64 {
    1e-6
}
fn default_quad_tol() -> f64 {
    1e-9
}
fn default_group_tol() -> f64 {
    2e-9
}
fn default_trials() -> usize {
    1000
}
fn default_bracket_tol() -> f64 {
    1e-10
}
fn default_context_projector() -> OperatorLit {
    OperatorLit::Diag(vec![1.0, 0.0])
}
fn default_contexts() -> Vec<ContextLit> {
    use hv_core::literal::{OffsetLit, RigidLit};
    use std::f64::consts::PI;
    std::iter::once(ContextLit::Identity)
        .chain([PI / 4.0, PI / 2.0, PI].map(|x| {
            ContextLit::Rigid(RigidLit {
                offset: OffsetLit::Radians(x),
                salt: 0,
            })
        }))
        .collect()
}
fn default_budget() -> usize {
    1000
}
fn default_resolutions() -> usize {
    20
}
fn default_states() -> usize {
    100
}
fn default_independence_n() -> usize {
    4
}
fn default_frame_dims() -> Vec<usize> {
    vec![3, 4, 5]
}
fn default_bases() -> usize {
    333
}
fn default_expect_nested() -> bool {
    true
}
fn default_pointwise_trials() -> usize {
    10_000
}

#[derive(Debug, Clone)]
pub enum Params {
    Born(BornParams),
    Dynamics(DynamicsParams),
    Uncertainty(UncertaintyParams),
    Context(ContextParams),
    Partition(PartitionParams),
    Independence(IndependenceParams),
    Frame(FrameParams),
    Factorize(FactorizeParams),
}

/// A validated config with every default materialized.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub envelope: Envelope,
    pub params: Params,
}

fn typed<P: DeserializeOwned>(kind: Kind, v: &Value) -> Result<P, ConfigError> {
    serde_json::from_value(v.clone())
        .map_err(|e| ConfigError(format!("params for kind `{}`: {e}", kind.name())))
}

impl ExperimentConfig {
    pub fn from_value(raw: Value) -> Result<Self, ConfigError> {
        let mut envelope: Envelope =
            serde_json::from_value(raw).map_err(|e| ConfigError(format!("config: {e}")))?;
        if envelope.version != SCHEMA_VERSION {
            return Err(ConfigError(format!(
                "unsupported config version {} (expected {SCHEMA_VERSION})",
                envelope.version
            )));
        }
        let k = envelope.kind;
        let p = &envelope.params;
        let params = match k {
            Kind::Born => Params::Born(typed(k, p)?),
            Kind::Dynamics => Params::Dynamics(typed(k, p)?),
            Kind::Uncertainty => Params::Uncertainty(typed(k, p)?),
            Kind::Context => Params::Context(typed(k, p)?),
            Kind::Partition => Params::Partition(typed(k, p)?),
            Kind::Independence => Params::Independence(typed(k, p)?),
            Kind::Frame => Params::Frame(typed(k, p)?),
            Kind::Factorize => Params::Factorize(typed(k, p)?),
        };
        let resolved = match &params {
            Params::Born(x) => serde_json::to_value(x),
            Params::Dynamics(x) => serde_json::to_value(x),
            Params::Uncertainty(x) => serde_json::to_value(x),
            Params::Context(x) => serde_json::to_value(x),
            Params::Partition(x) => serde_json::to_value(x),
            Params::Independence(x) => serde_json::to_value(x),
            Params::Frame(x) => serde_json::to_value(x),
            Params::Factorize(x) => serde_json::to_value(x),
        }
        .map_err(|e| ConfigError(e.to_string()))?;
        envelope.params = resolved;
        Ok(ExperimentConfig { envelope, params })
    }

    /// Reads a config, then applies `--seed` and `key=value` overrides
    /// (dotted paths, values parsed as JSON or taken as strings).
    pub fn load(path: &Path, seed: Option<u64>, sets: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        let mut raw: Value = serde_json::from_str(&text)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        for s in sets {
            apply_override(&mut raw, s)?;
        }
        if let Some(seed) = seed {
            set_path(&mut raw, "seed", Value::from(seed))?;
        }
        Self::from_value(raw)
    }

    pub fn kind(&self) -> Kind {
        self.envelope.kind
    }

    pub fn seed(&self) -> u64 {
        self.envelope.seed
    }

    pub fn resolved(&self) -> Value {
        serde_json::to_value(&self.envelope).expect("envelope serializes")
    }
}

pub fn apply_override(raw: &mut Value, assignment: &str) -> Result<(), ConfigError> {
    let (key, val) = assignment
        .split_once('=')
        .ok_or_else(|| ConfigError(format!("override `{assignment}` is not key=value")))?;
    let v = serde_json::from_str(val).unwrap_or_else(|_| Value::String(val.to_string()));
    set_path(raw, key, v)
}

fn set_path(raw: &mut Value, key: &str, v: Value) -> Result<(), ConfigError> {
    let mut cur = raw;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(ConfigError(format!("empty segment in key `{key}`")));
        }
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| ConfigError(format!("`{key}`: parent of `{part}` is not an object")))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), v);
            return Ok(());
        }
        cur = obj.entry(part.to_string()).or_insert_with(empty_object);
    }
    unreachable!("split yields at least one segment")
}
