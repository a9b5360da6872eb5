//! Subgoal hierarchy construction from the causal graph: variable depths,
//! causality-restricted action spaces, and warm-start level growth.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::env::{ChangeKind, EnvVarSchema, Subgoal, VarId, VarVector};
use crate::error::{Error, Result};
use crate::numeric::{DenseNet, Head};
use crate::rng::Rng;
use crate::scm::CausalGraph;

use super::policy::QCore;
use super::HrlHyper;

/// An action available to a level policy: either a subgoal delegated to a
/// lower level or a primitive environment action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HrlAction {
    Sub(Subgoal),
    Prim(usize),
}

/// Longest-path depth of every variable reachable from the action variable on
/// a cycle-free graph: the action sits at depth 0 and a variable sits one
/// past its deepest reachable parent. Unreachable variables get no depth.
pub fn variable_depths(pruned: &CausalGraph, action: VarId) -> BTreeMap<VarId, usize> {
    let m = pruned.len();
    let mut reachable = vec![false; m];
    reachable[action] = true;
    let mut queue = vec![action];
    while let Some(v) = queue.pop() {
        for c in pruned.children(v) {
            if !reachable[c] {
                reachable[c] = true;
                queue.push(c);
            }
        }
    }
    let mut depths: BTreeMap<VarId, usize> = BTreeMap::new();
    depths.insert(action, 0);
    // Longest path over the reachable sub-DAG; M sweeps suffice.
    for _ in 0..m {
        for v in 0..m {
            if !reachable[v] || v == action {
                continue;
            }
            let best = pruned
                .parents(v)
                .into_iter()
                .filter_map(|p| depths.get(&p).copied())
                .max();
            if let Some(d) = best {
                depths.insert(v, d + 1);
            }
        }
    }
    depths
}

/// Action space of a subgoal: both change-subgoals of every non-action parent
/// (by var id, increase first), then the primitive actions.
pub fn action_space_for(
    g: Subgoal,
    graph: &CausalGraph,
    action_var: VarId,
    primitive_count: usize,
) -> Vec<HrlAction> {
    let mut actions = Vec::new();
    for p in graph.parents(g.var) {
        if p == action_var {
            continue;
        }
        for change in ChangeKind::ALL {
            actions.push(HrlAction::Sub(Subgoal::new(p, change)));
        }
    }
    for a in 0..primitive_count {
        actions.push(HrlAction::Prim(a));
    }
    actions
}

/// One level of the hierarchy: every goal of this depth shares one Q-network
/// whose input is the state encoding plus a goal one-hot and whose outputs
/// cover the union of the goals' action spaces.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelPolicy {
    pub goals: Vec<Subgoal>,
    pub actions: Vec<HrlAction>,
    /// Per goal: indices into `actions`.
    pub goal_actions: Vec<Vec<usize>>,
    pub core: Option<QCore>,
}

impl LevelPolicy {
    fn new() -> Self {
        Self {
            goals: Vec::new(),
            actions: Vec::new(),
            goal_actions: Vec::new(),
            core: None,
        }
    }

    pub fn goal_id(&self, g: Subgoal) -> Option<usize> {
        self.goals.iter().position(|&x| x == g)
    }

    pub fn encode(&self, schema: &EnvVarSchema, x: &VarVector, goal_id: usize) -> Vec<f64> {
        let mut input = schema.encode_state(x);
        let mut goal_onehot = vec![0.0; self.goals.len()];
        goal_onehot[goal_id] = 1.0;
        input.extend_from_slice(&goal_onehot);
        input
    }

    fn insert_goal(
        &mut self,
        schema: &EnvVarSchema,
        g: Subgoal,
        action_list: Vec<HrlAction>,
        hyper: &HrlHyper,
        rng: &mut Rng,
    ) -> Result<()> {
        if self.goal_id(g).is_some() {
            return Ok(()); // re-insertion is a no-op
        }
        let mut new_actions = 0;
        let mut indices = Vec::with_capacity(action_list.len());
        for a in action_list {
            let idx = match self.actions.iter().position(|&x| x == a) {
                Some(idx) => idx,
                None => {
                    self.actions.push(a);
                    new_actions += 1;
                    self.actions.len() - 1
                }
            };
            indices.push(idx);
        }
        self.goals.push(g);
        self.goal_actions.push(indices);
        match &mut self.core {
            None => {
                let input = schema.state_onehot_width() + self.goals.len();
                let dims = [input, hyper.q_hidden, hyper.q_hidden, self.actions.len()];
                let net = DenseNet::new(&dims, Head::Linear, rng)?;
                self.core = Some(QCore::new(net, hyper.replay_capacity));
            }
            Some(core) => {
                core.grow(1, new_actions);
            }
        }
        Ok(())
    }

    /// Drops the goals whose `keep` flag is false, removing their goal-onehot
    /// input columns so surviving goals behave identically.
    pub fn retain_goals(&mut self, keep: &[bool]) -> Result<()> {
        if keep.len() != self.goals.len() {
            return Err(Error::DimensionMismatch {
                expected: self.goals.len(),
                got: keep.len(),
            });
        }
        if keep.iter().all(|&k| k) {
            return Ok(());
        }
        let state_width = match &self.core {
            Some(core) => core.net.input_dim() - self.goals.len(),
            None => return Ok(()),
        };
        let mut keep_inputs = vec![true; state_width];
        keep_inputs.extend_from_slice(keep);
        let core = self.core.as_mut().expect("level with goals has a policy");
        core.retain_net_inputs(&keep_inputs)?;
        let mut goals = Vec::new();
        let mut goal_actions = Vec::new();
        for (i, &k) in keep.iter().enumerate() {
            if k {
                goals.push(self.goals[i]);
                goal_actions.push(self.goal_actions[i].clone());
            }
        }
        self.goals = goals;
        self.goal_actions = goal_actions;
        if self.goals.is_empty() {
            self.core = None;
        }
        Ok(())
    }
}

/// JSON-friendly encoding for struct-keyed maps: a sequence of pairs.
mod subgoal_map {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<Subgoal, f64>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<(&Subgoal, &f64)> = map.iter().collect();
        serde::Serialize::serialize(&pairs, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<BTreeMap<Subgoal, f64>, D::Error> {
        let pairs: Vec<(Subgoal, f64)> = serde::Deserialize::deserialize(d)?;
        Ok(pairs.into_iter().collect())
    }
}

/// Levels of goal-conditioned policies ordered by variable depth, plus the
/// verification bookkeeping the outer loop reads.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubgoalHierarchy {
    schema: EnvVarSchema,
    /// `levels[k]` holds goals whose variable depth is `k + 1`.
    pub levels: Vec<LevelPolicy>,
    pub depth_of: BTreeMap<VarId, usize>,
    #[serde(with = "subgoal_map")]
    pub success_ratios: BTreeMap<Subgoal, f64>,
    pub verified: BTreeSet<VarId>,
}

impl SubgoalHierarchy {
    pub fn new(schema: &EnvVarSchema) -> Self {
        Self {
            schema: schema.clone(),
            levels: Vec::new(),
            depth_of: BTreeMap::new(),
            success_ratios: BTreeMap::new(),
            verified: BTreeSet::new(),
        }
    }

    pub fn schema(&self) -> &EnvVarSchema {
        &self.schema
    }

    pub fn is_empty(&self) -> bool {
        self.levels.iter().all(|l| l.goals.is_empty())
    }

    /// (level index, goal id) of a goal present in the hierarchy.
    pub fn locate(&self, g: Subgoal) -> Option<(usize, usize)> {
        let level = *self.depth_of.get(&g.var)? - 1;
        let goal_id = self.levels.get(level)?.goal_id(g)?;
        Some((level, goal_id))
    }

    pub fn all_goals(&self) -> Vec<Subgoal> {
        self.levels.iter().flat_map(|l| l.goals.clone()).collect()
    }

    /// Goals of variables that passed verification.
    pub fn verified_goals(&self) -> Vec<Subgoal> {
        self.all_goals()
            .into_iter()
            .filter(|g| self.verified.contains(&g.var))
            .collect()
    }

    /// Inserts both change-subgoals of every candidate variable at its depth,
    /// creating new levels as needed. Candidates must have a depth; existing
    /// goals are untouched and level nets grow with zero-initialized columns.
    pub fn build_or_extend(
        &mut self,
        pruned_graph: &CausalGraph,
        candidates: &BTreeSet<VarId>,
        depths: &BTreeMap<VarId, usize>,
        hyper: &HrlHyper,
        rng: &mut Rng,
    ) -> Result<()> {
        let action_var = self.schema.action_var();
        let primitive_count = self.schema.cardinality(action_var);
        for &var in candidates {
            let depth = *depths
                .get(&var)
                .ok_or_else(|| Error::Precondition(format!("candidate {var} has no depth")))?;
            if depth == 0 {
                return Err(Error::Precondition(format!(
                    "candidate {var} resolves to the action depth"
                )));
            }
            while self.levels.len() < depth {
                self.levels.push(LevelPolicy::new());
            }
            if let Some(existing) = self.depth_of.get(&var) {
                // Already placed: keep its original level, even if the graph
                // has since shifted.
                let _ = existing;
            } else {
                self.depth_of.insert(var, depth);
            }
            let placed_depth = self.depth_of[&var];
            for change in ChangeKind::ALL {
                let g = Subgoal::new(var, change);
                let actions = action_space_for(g, pruned_graph, action_var, primitive_count);
                self.levels[placed_depth - 1].insert_goal(&self.schema, g, actions, hyper, rng)?;
            }
        }
        Ok(())
    }

    /// `{"levels":[{"depth", "goals":[{"var","change","success_ratio"}]}]}`
    pub fn to_json(&self) -> serde_json::Value {
        let levels: Vec<serde_json::Value> = self
            .levels
            .iter()
            .enumerate()
            .map(|(idx, level)| {
                let goals: Vec<serde_json::Value> = level
                    .goals
                    .iter()
                    .map(|g| {
                        serde_json::json!({
                            "var": g.var,
                            "change": g.change.to_string(),
                            "success_ratio": self.success_ratios.get(g).copied(),
                        })
                    })
                    .collect();
                serde_json::json!({ "depth": idx + 1, "goals": goals })
            })
            .collect();
        serde_json::json!({ "levels": levels })
    }
}

/// Variables with at least one change-subgoal strictly above the threshold.
pub fn verify_controllable(
    ratios: &BTreeMap<Subgoal, f64>,
    threshold: f64,
) -> BTreeSet<VarId> {
    let mut out = BTreeSet::new();
    for (g, &r) in ratios {
        if r > threshold {
            out.insert(g.var);
        }
    }
    out
}
