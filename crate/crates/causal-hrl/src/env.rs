//! The environment-variable layer: schemas, variable vectors, the two change
//! indicators, the goal space built from them, and the world contract every
//! environment implements.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scm::CausalGraph;

pub type VarId = usize;

/// Values of every environment variable at one step, indexed by var id.
pub type VarVector = Vec<usize>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Action,
    Item,
    StateValue,
    Distractor,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarDef {
    pub id: VarId,
    pub name: String,
    pub cardinality: usize,
    pub kind: VarKind,
}

/// Ordered, validated list of environment variables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvVarSchema {
    vars: Vec<VarDef>,
}

impl EnvVarSchema {
    pub fn new(vars: Vec<VarDef>) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::Schema("schema has no variables".into()));
        }
        for (i, v) in vars.iter().enumerate() {
            if v.id != i {
                return Err(Error::Schema(format!(
                    "var ids must be 0..M-1 in order; slot {i} holds id {}",
                    v.id
                )));
            }
            if v.cardinality < 2 {
                return Err(Error::Schema(format!(
                    "variable {} has cardinality {} < 2",
                    v.name, v.cardinality
                )));
            }
        }
        let actions = vars.iter().filter(|v| v.kind == VarKind::Action).count();
        if actions != 1 {
            return Err(Error::Schema(format!(
                "schema must contain exactly one action variable, found {actions}"
            )));
        }
        Ok(Self { vars })
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn vars(&self) -> &[VarDef] {
        &self.vars
    }

    pub fn var(&self, id: VarId) -> &VarDef {
        &self.vars[id]
    }

    pub fn cardinality(&self, id: VarId) -> usize {
        self.vars[id].cardinality
    }

    pub fn action_var(&self) -> VarId {
        self.vars
            .iter()
            .position(|v| v.kind == VarKind::Action)
            .expect("validated schema has an action variable")
    }

    pub fn names(&self) -> Vec<String> {
        self.vars.iter().map(|v| v.name.clone()).collect()
    }

    /// Total one-hot width of a full variable vector.
    pub fn onehot_width(&self) -> usize {
        self.vars.iter().map(|v| v.cardinality).sum()
    }

    /// One-hot width of all non-action variables (policy state encoding).
    pub fn state_onehot_width(&self) -> usize {
        self.vars
            .iter()
            .filter(|v| v.kind != VarKind::Action)
            .map(|v| v.cardinality)
            .sum()
    }

    pub fn check_vector(&self, x: &VarVector) -> Result<()> {
        if x.len() != self.vars.len() {
            return Err(Error::DimensionMismatch {
                expected: self.vars.len(),
                got: x.len(),
            });
        }
        for (v, &val) in self.vars.iter().zip(x.iter()) {
            if val >= v.cardinality {
                return Err(Error::Schema(format!(
                    "value {val} out of range for variable {} (cardinality {})",
                    v.name, v.cardinality
                )));
            }
        }
        Ok(())
    }

    /// Concatenated one-hot encoding of `x`; blocks whose `keep` flag is false
    /// are zeroed. `keep` is indexed by var id.
    pub fn encode_masked(&self, x: &VarVector, keep: impl Fn(VarId) -> bool) -> Vec<f64> {
        let mut out = vec![0.0; self.onehot_width()];
        let mut offset = 0;
        for v in &self.vars {
            if keep(v.id) {
                out[offset + x[v.id]] = 1.0;
            }
            offset += v.cardinality;
        }
        out
    }

    /// One-hot encoding of the non-action variables only.
    pub fn encode_state(&self, x: &VarVector) -> Vec<f64> {
        let mut out = vec![0.0; self.state_onehot_width()];
        let mut offset = 0;
        for v in &self.vars {
            if v.kind == VarKind::Action {
                continue;
            }
            out[offset + x[v.id]] = 1.0;
            offset += v.cardinality;
        }
        out
    }

    /// `{"vars":[{"id","name","cardinality","kind"}...]}`
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "vars": self.vars })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let vars: Vec<VarDef> = serde_json::from_value(
            value
                .get("vars")
                .cloned()
                .ok_or_else(|| Error::Schema("missing \"vars\" field".into()))?,
        )?;
        Self::new(vars)
    }
}

/// The two fundamental variable changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ChangeKind {
    Increase,
    Decrease,
}

impl ChangeKind {
    pub const ALL: [ChangeKind; 2] = [ChangeKind::Increase, ChangeKind::Decrease];
}

impl std::fmt::Display for ChangeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChangeKind::Increase => write!(f, "inc"),
            ChangeKind::Decrease => write!(f, "dec"),
        }
    }
}

/// A desired change of one non-action variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Subgoal {
    pub var: VarId,
    pub change: ChangeKind,
}

impl Subgoal {
    pub fn new(var: VarId, change: ChangeKind) -> Self {
        Self { var, change }
    }
}

/// One primitive environment step at the variable level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Transition {
    pub x_t: VarVector,
    pub action: usize,
    pub x_t1: VarVector,
    pub env_done: bool,
}

/// 1 iff the change fired between `before` and `after`.
pub fn change_indicator(change: ChangeKind, before: usize, after: usize) -> u8 {
    match change {
        ChangeKind::Increase => u8::from(after > before),
        ChangeKind::Decrease => u8::from(after < before),
    }
}

/// Goal-reaching reward: the goal's change indicator evaluated on its variable.
pub fn goal_reward(g: Subgoal, x_t: &VarVector, x_t1: &VarVector) -> Result<u8> {
    if g.var >= x_t.len() || g.var >= x_t1.len() {
        return Err(Error::Schema(format!("goal variable {} out of range", g.var)));
    }
    Ok(change_indicator(g.change, x_t[g.var], x_t1[g.var]))
}

/// All (non-action variable, change) pairs in var-id-major order.
pub fn enumerate_goal_space(schema: &EnvVarSchema) -> Vec<Subgoal> {
    let mut goals = Vec::new();
    for v in schema.vars() {
        if v.kind == VarKind::Action {
            continue;
        }
        for change in ChangeKind::ALL {
            goals.push(Subgoal::new(v.id, change));
        }
    }
    goals
}

/// The contract every world implements. Observations are the variable vector
/// itself: the observation-to-variables map is the identity projection onto
/// the declared variable fields, with the action slot holding the action
/// executed at the previous step (0 after reset).
pub trait World {
    fn schema(&self) -> &EnvVarSchema;
    fn reset(&mut self, seed: u64) -> VarVector;
    fn step(&mut self, action: usize) -> (VarVector, bool);
    fn ground_truth_graph(&self) -> CausalGraph;
    /// Monotone first-achievement flags for the current episode, bit k set
    /// once milestone k has been reached.
    fn milestones(&self) -> u8;
    fn milestone_count(&self) -> usize;
    fn primitive_action_count(&self) -> usize;
    /// Sparse task predicate for the adaptation stage, evaluated on the
    /// current episode state.
    fn task_achieved(&self) -> bool;
    /// Environment steps taken since construction (never reset).
    fn steps_taken(&self) -> u64;
}
