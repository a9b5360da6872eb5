//! A synthetic crafting chain: `craft_k` raises variable `V_k` once `V_{k-1}`
//! is owned, so the tech tree is a single dependency chain with the action as
//! a shared cause. Two distractor variables churn independently of the agent.

use rand::Rng as _;
use rand_chacha::rand_core::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::env::{EnvVarSchema, VarDef, VarKind, VarVector, World};
use crate::error::Result;
use crate::rng::Rng;
use crate::scm::CausalGraph;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainCraftConfig {
    pub m_chain: usize,
    pub cardinality: usize,
    pub success_prob: f64,
    pub episode_length: usize,
    pub distractor_count: usize,
    pub seed: u64,
}

impl Default for ChainCraftConfig {
    fn default() -> Self {
        Self {
            m_chain: 4,
            cardinality: 2,
            success_prob: 1.0,
            episode_length: 64,
            distractor_count: 2,
            seed: 0,
        }
    }
}

impl ChainCraftConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_chain == 0 {
            return Err(crate::Error::Config("m_chain must be at least 1".into()));
        }
        if self.cardinality < 2 {
            return Err(crate::Error::Config("cardinality must be at least 2".into()));
        }
        if !(self.success_prob > 0.0 && self.success_prob <= 1.0) {
            return Err(crate::Error::Config(format!(
                "success_prob {} must lie in (0, 1]",
                self.success_prob
            )));
        }
        if self.episode_length == 0 {
            return Err(crate::Error::Config("episode_length must be positive".into()));
        }
        Ok(())
    }
}

const DISTRACTOR_CARD: usize = 3;

pub struct ChainCraft {
    cfg: ChainCraftConfig,
    schema: EnvVarSchema,
    values: VarVector,
    episode_step: usize,
    milestone_bits: u8,
    rng: Rng,
    total_steps: u64,
}

impl ChainCraft {
    pub fn new(cfg: ChainCraftConfig) -> Result<Self> {
        cfg.validate()?;
        let mut vars = vec![VarDef {
            id: 0,
            name: "action".into(),
            cardinality: cfg.m_chain + 1,
            kind: VarKind::Action,
        }];
        for k in 0..cfg.m_chain {
            vars.push(VarDef {
                id: k + 1,
                name: format!("v{k}"),
                cardinality: cfg.cardinality,
                kind: VarKind::Item,
            });
        }
        for d in 0..cfg.distractor_count {
            vars.push(VarDef {
                id: cfg.m_chain + 1 + d,
                name: format!("noise{d}"),
                cardinality: DISTRACTOR_CARD,
                kind: VarKind::Distractor,
            });
        }
        let schema = EnvVarSchema::new(vars)?;
        let m = schema.len();
        let seed = cfg.seed;
        Ok(Self {
            cfg,
            schema,
            values: vec![0; m],
            episode_step: 0,
            milestone_bits: 0,
            rng: Rng::seed_from_u64(seed),
            total_steps: 0,
        })
    }

    /// Variable id of chain link `k`.
    pub fn chain_var(&self, k: usize) -> usize {
        k + 1
    }

    pub fn config(&self) -> &ChainCraftConfig {
        &self.cfg
    }

    fn refresh_milestones(&mut self) {
        for k in 0..self.cfg.m_chain.min(5) {
            if self.values[k + 1] >= 1 {
                self.milestone_bits |= 1 << k;
            }
        }
    }
}

impl World for ChainCraft {
    fn schema(&self) -> &EnvVarSchema {
        &self.schema
    }

    fn reset(&mut self, seed: u64) -> VarVector {
        self.values.iter_mut().for_each(|v| *v = 0);
        self.episode_step = 0;
        self.milestone_bits = 0;
        self.rng = Rng::seed_from_u64(seed);
        self.values.clone()
    }

    fn step(&mut self, action: usize) -> (VarVector, bool) {
        assert!(action <= self.cfg.m_chain, "action {action} out of range");
        if action < self.cfg.m_chain {
            let unlocked = action == 0 || self.values[action] >= 1;
            if unlocked && self.rng.gen_bool(self.cfg.success_prob) {
                let slot = action + 1;
                self.values[slot] = (self.values[slot] + 1).min(self.cfg.cardinality - 1);
            }
        }
        for d in 0..self.cfg.distractor_count {
            let slot = self.cfg.m_chain + 1 + d;
            if self.rng.gen_bool(0.5) {
                self.values[slot] = self.rng.gen_range(0..DISTRACTOR_CARD);
            }
        }
        self.values[0] = action;
        self.episode_step += 1;
        self.total_steps += 1;
        self.refresh_milestones();
        (self.values.clone(), self.episode_step >= self.cfg.episode_length)
    }

    fn ground_truth_graph(&self) -> CausalGraph {
        let mut edges = Vec::new();
        for k in 0..self.cfg.m_chain {
            edges.push((k + 1, 0));
            if k > 0 {
                edges.push((k + 1, k));
            }
        }
        CausalGraph::from_edges(self.schema.len(), &edges)
    }

    fn milestones(&self) -> u8 {
        self.milestone_bits
    }

    fn milestone_count(&self) -> usize {
        self.cfg.m_chain.min(5)
    }

    fn primitive_action_count(&self) -> usize {
        self.cfg.m_chain + 1
    }

    fn task_achieved(&self) -> bool {
        self.values[self.cfg.m_chain] >= 1
    }

    fn steps_taken(&self) -> u64 {
        self.total_steps
    }
}
