//! Wrapper that hides a subset of environment variables from the agent while
//! leaving the underlying dynamics untouched. Used for the missing-variable
//! robustness study: with a mid-chain variable hidden, discovery should find
//! the transitive edge across the gap.

use crate::env::{EnvVarSchema, VarId, VarKind, VarVector, World};
use crate::error::{Error, Result};
use crate::scm::CausalGraph;

pub struct DropoutWorld {
    inner: Box<dyn World>,
    /// Inner var ids still exposed, in schema order.
    kept: Vec<VarId>,
    schema: EnvVarSchema,
}

impl DropoutWorld {
    pub fn new(inner: Box<dyn World>, hidden: &[VarId]) -> Result<Self> {
        let full = inner.schema().clone();
        for &h in hidden {
            if h >= full.len() {
                return Err(Error::Schema(format!("hidden variable {h} out of range")));
            }
            if full.var(h).kind == VarKind::Action {
                return Err(Error::Schema("cannot hide the action variable".into()));
            }
        }
        let kept: Vec<VarId> = (0..full.len()).filter(|v| !hidden.contains(v)).collect();
        let vars = kept
            .iter()
            .enumerate()
            .map(|(new_id, &old_id)| {
                let mut def = full.var(old_id).clone();
                def.id = new_id;
                def
            })
            .collect();
        Ok(Self {
            inner,
            kept,
            schema: EnvVarSchema::new(vars)?,
        })
    }

    fn project(&self, x: &VarVector) -> VarVector {
        self.kept.iter().map(|&i| x[i]).collect()
    }

    pub fn kept_vars(&self) -> &[VarId] {
        &self.kept
    }
}

impl World for DropoutWorld {
    fn schema(&self) -> &EnvVarSchema {
        &self.schema
    }

    fn reset(&mut self, seed: u64) -> VarVector {
        let x = self.inner.reset(seed);
        self.project(&x)
    }

    fn step(&mut self, action: usize) -> (VarVector, bool) {
        let (x, done) = self.inner.step(action);
        (self.project(&x), done)
    }

    /// Direct edges of the inner truth restricted to visible variables.
    /// Edges through a hidden variable disappear rather than being
    /// transitively closed; learned transitive shortcuts are a finding,
    /// not part of the reference graph.
    fn ground_truth_graph(&self) -> CausalGraph {
        let inner_truth = self.inner.ground_truth_graph();
        let mut g = CausalGraph::empty(self.kept.len());
        for (new_effect, &old_effect) in self.kept.iter().enumerate() {
            for (new_cause, &old_cause) in self.kept.iter().enumerate() {
                if inner_truth.has_edge(old_effect, old_cause) {
                    g.set_edge(new_effect, new_cause, true);
                }
            }
        }
        g
    }

    fn milestones(&self) -> u8 {
        self.inner.milestones()
    }

    fn milestone_count(&self) -> usize {
        self.inner.milestone_count()
    }

    fn primitive_action_count(&self) -> usize {
        self.inner.primitive_action_count()
    }

    fn task_achieved(&self) -> bool {
        self.inner.task_achieved()
    }

    fn steps_taken(&self) -> u64 {
        self.inner.steps_taken()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worlds::chaincraft::{ChainCraft, ChainCraftConfig};

    fn wrapped(hidden: &[VarId]) -> DropoutWorld {
        let inner = ChainCraft::new(ChainCraftConfig {
            m_chain: 4,
            ..ChainCraftConfig::default()
        })
        .unwrap();
        DropoutWorld::new(Box::new(inner), hidden).unwrap()
    }

    #[test]
    fn hiding_v1_reindexes_the_schema() {
        // Full schema: action, v0, v1, v2, v3, noise0, noise1. Hide v1 (id 2).
        let w = wrapped(&[2]);
        let names = w.schema().names();
        assert_eq!(names, vec!["action", "v0", "v2", "v3", "noise0", "noise1"]);
        assert_eq!(w.schema().len(), 6);
    }

    #[test]
    fn projection_tracks_inner_values() {
        let mut w = wrapped(&[2]);
        w.reset(1);
        let (x, _) = w.step(0); // craft_0 raises v0
        assert_eq!(x[1], 1);
        let (x, _) = w.step(1); // craft_1 raises the hidden v1
        assert_eq!(x.len(), 6);
        let (x, _) = w.step(2); // craft_2 raises v2, visible at slot 2
        assert_eq!(x[2], 1);
        assert!(!w.task_achieved());
        let (_, _) = w.step(3);
        assert!(w.task_achieved());
    }

    #[test]
    fn truth_projection_drops_edges_through_the_gap() {
        let w = wrapped(&[2]);
        let g = w.ground_truth_graph();
        // v0 -> v2 is not a direct edge in the inner truth.
        assert!(!g.has_edge(2, 1));
        // action edges to visible chain vars survive.
        assert!(g.has_edge(1, 0));
        assert!(g.has_edge(2, 0));
        assert!(g.has_edge(3, 0));
        // v2 -> v3 survives as both endpoints are visible (new ids 2 -> 3).
        assert!(g.has_edge(3, 2));
    }

    #[test]
    fn action_cannot_be_hidden() {
        let inner = ChainCraft::new(ChainCraftConfig::default()).unwrap();
        assert!(DropoutWorld::new(Box::new(inner), &[0]).is_err());
    }
}
