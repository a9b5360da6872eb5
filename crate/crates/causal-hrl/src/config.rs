//! Run configuration: environment selection, all hyperparameters with their
//! published defaults baked in, ablation switches, and dotted-path overrides.

use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::env::{EnvVarSchema, VarId, VarKind, World};
use crate::error::{Error, Result};
use crate::hrl::HrlHyper;
use crate::rng::stream;
use crate::scm::ScmHyper;
use crate::worlds::{ChainCraft, ChainCraftConfig, MiniCraft, MiniCraftConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum EnvConfig {
    Chaincraft(ChainCraftConfig),
    Minicraft(MiniCraftConfig),
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig::Chaincraft(ChainCraftConfig::default())
    }
}

impl EnvConfig {
    /// Builds the world; the run seed folds into the config's own seed so a
    /// run is fully determined by (config, seed).
    pub fn build(&self, run_seed: u64) -> Result<Box<dyn World>> {
        match self {
            EnvConfig::Chaincraft(cfg) => {
                let mut cfg = cfg.clone();
                cfg.seed ^= crate::rng::derive_seed(run_seed, "world");
                Ok(Box::new(ChainCraft::new(cfg)?))
            }
            EnvConfig::Minicraft(cfg) => {
                let mut cfg = cfg.clone();
                cfg.seed ^= crate::rng::derive_seed(run_seed, "world");
                Ok(Box::new(MiniCraft::new(cfg)?))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EnvConfig::Chaincraft(cfg) => cfg.validate(),
            EnvConfig::Minicraft(cfg) => cfg.validate(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DriverConfig {
    /// Outer-loop cap; `null` means twice the variable count.
    pub max_iterations: Option<usize>,
    pub samples_per_var: usize,
    pub adaptation_steps: u64,
    /// Train the task controller over primitives only, ignoring the
    /// hierarchy (the flat baseline).
    pub flat_baseline: bool,
    /// Re-collect the action bootstrap data every iteration.
    pub refresh_bootstrap: bool,
    pub max_attempts: usize,
}

impl Default for DriverConfig {
    fn default() -> Self {
        Self {
            max_iterations: None,
            samples_per_var: 512,
            adaptation_steps: 50_000,
            flat_baseline: false,
            refresh_bootstrap: true,
            max_attempts: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationMode {
    None,
    RandomIntervention,
    EvDropout,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct AblationConfig {
    pub mode: AblationMode,
    pub dropout_ratio: f64,
    /// Explicit hidden-variable choice; when absent, `dropout_ratio` picks
    /// uniformly among effective (non-action, non-distractor) variables.
    pub dropped_vars: Option<Vec<VarId>>,
}

impl Default for AblationConfig {
    fn default() -> Self {
        Self {
            mode: AblationMode::None,
            dropout_ratio: 0.0,
            dropped_vars: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub env: EnvConfig,
    pub scm: ScmHyper,
    pub hrl: HrlHyper,
    pub driver: DriverConfig,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub ablation: AblationConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            env: EnvConfig::default(),
            scm: ScmHyper::default(),
            hrl: HrlHyper::default(),
            driver: DriverConfig::default(),
            seed: 0,
            out_dir: PathBuf::from("runs/out"),
            ablation: AblationConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.scm.validate()?;
        self.hrl.validate()?;
        if self.driver.samples_per_var == 0 {
            return Err(Error::Config("samples_per_var must be positive".into()));
        }
        if self.driver.max_attempts == 0 {
            return Err(Error::Config("max_attempts must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.ablation.dropout_ratio) {
            return Err(Error::Config(format!(
                "dropout_ratio {} must lie in [0, 1)",
                self.ablation.dropout_ratio
            )));
        }
        Ok(())
    }

    pub fn is_random_intervention_arm(&self) -> bool {
        self.ablation.mode == AblationMode::RandomIntervention
    }

    /// The hidden-variable set in effect for this run: empty unless the
    /// dropout ablation is on; explicit list wins over the random draw.
    pub fn resolved_hidden_vars(&self, schema: &EnvVarSchema) -> Result<Vec<VarId>> {
        if self.ablation.mode != AblationMode::EvDropout {
            return Ok(Vec::new());
        }
        if let Some(vars) = &self.ablation.dropped_vars {
            return Ok(vars.clone());
        }
        let effective: Vec<VarId> = schema
            .vars()
            .iter()
            .filter(|v| v.kind != VarKind::Action && v.kind != VarKind::Distractor)
            .map(|v| v.id)
            .collect();
        let count = (self.ablation.dropout_ratio * effective.len() as f64).ceil() as usize;
        if count == 0 {
            return Ok(Vec::new());
        }
        use rand::seq::SliceRandom as _;
        let mut rng = stream(self.seed, "ev-dropout");
        let mut pool = effective;
        pool.shuffle(&mut rng);
        let mut chosen: Vec<VarId> = pool.into_iter().take(count).collect();
        chosen.sort_unstable();
        Ok(chosen)
    }

    pub fn from_json_value(value: serde_json::Value) -> Result<Self> {
        Ok(serde_json::from_value(value)?)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

/// Applies one `key.path=value` override to a config JSON value. The value
/// parses as JSON when possible and falls back to a string.
pub fn apply_override(config: &mut serde_json::Value, spec: &str) -> Result<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{spec}' is not key=value")))?;
    let parsed: serde_json::Value = serde_json::from_str(raw)
        .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
    let mut cursor = config;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if i + 1 == parts.len() {
            match cursor {
                serde_json::Value::Object(map) => {
                    map.insert((*part).to_string(), parsed);
                    return Ok(());
                }
                _ => return Err(Error::Config(format!("cannot set '{path}'"))),
            }
        }
        cursor = cursor
            .get_mut(*part)
            .ok_or_else(|| Error::Config(format!("unknown config path '{path}'")))?;
    }
    unreachable!("split always yields at least one part")
}

/// Variables a metrics comparison should treat as assertable causes: the
/// action plus every non-distractor variable.
pub fn effective_cause_set(schema: &EnvVarSchema) -> BTreeSet<VarId> {
    schema
        .vars()
        .iter()
        .filter(|v| v.kind != VarKind::Distractor)
        .map(|v| v.id)
        .collect()
}
