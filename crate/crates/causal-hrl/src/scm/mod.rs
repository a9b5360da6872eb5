//! Structural causal model over environment variables: soft adjacency,
//! per-variable generating functions, the two-phase discovery loop, and
//! graph-accuracy metrics.

mod graph;
mod model;
mod sid;

pub use graph::{shd, CausalGraph, GraphFile};
pub use model::{
    sample_configuration, threshold_graph, Configuration, DiscoveryDiagnostics, DiscoveryResult,
    ScmHyper, ScmParams,
};
pub use sid::{intervention_estimate_correct, sid, sid_with_cap, SID_NODE_CAP};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::env::{VarId, VarVector};

/// One adjacent-step sample `(x_t, x_{t+1})`. The action slot of both vectors
/// holds the action executed at step t; the "next action" is not part of the
/// pair, so the action variable's own transitions carry no signal beyond its
/// always-on self input.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepPair {
    pub x_t: VarVector,
    pub x_t1: VarVector,
}

/// Adjacent-step samples grouped by the variable that was intervened on.
#[derive(Debug, Clone, Default)]
pub struct InterventionDataset {
    per_var: BTreeMap<VarId, Vec<StepPair>>,
}

impl InterventionDataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, target: VarId, pair: StepPair) {
        self.per_var.entry(target).or_default().push(pair);
    }

    pub fn set_entry(&mut self, target: VarId, pairs: Vec<StepPair>) {
        self.per_var.insert(target, pairs);
    }

    pub fn get(&self, target: VarId) -> &[StepPair] {
        self.per_var.get(&target).map_or(&[], Vec::as_slice)
    }

    pub fn targets(&self) -> impl Iterator<Item = VarId> + '_ {
        self.per_var.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.per_var.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat view over every pair of every target, in target order.
    pub fn pooled(&self) -> Vec<&StepPair> {
        self.per_var.values().flatten().collect()
    }

    fn split_point(pairs: &[StepPair]) -> usize {
        if pairs.len() < 2 {
            pairs.len()
        } else {
            (pairs.len() * 3).div_ceil(4).min(pairs.len() - 1)
        }
    }

    /// Function-learning portion of one target's samples (first ~3/4).
    pub fn train_slice(&self, target: VarId) -> &[StepPair] {
        let pairs = self.get(target);
        &pairs[..Self::split_point(pairs)]
    }

    /// Structure-evaluation portion (the rest). Likelihood comparisons on
    /// pairs the generating nets never fit keep memorization from looking
    /// like causal signal. Degenerates to the full slice below 2 samples.
    pub fn holdout_slice(&self, target: VarId) -> &[StepPair] {
        let pairs = self.get(target);
        let split = Self::split_point(pairs);
        if split == pairs.len() {
            pairs
        } else {
            &pairs[split..]
        }
    }

    /// Flat view over every target's training slice.
    pub fn pooled_train(&self) -> Vec<&StepPair> {
        self.per_var
            .keys()
            .flat_map(|&t| self.train_slice(t).iter())
            .collect()
    }

    /// Flat view over every target's holdout slice.
    pub fn pooled_holdout(&self) -> Vec<&StepPair> {
        self.per_var
            .keys()
            .flat_map(|&t| self.holdout_slice(t).iter())
            .collect()
    }
}
