//! Multi-level goal-conditioned Q-learning over the discovered causal graph.

mod hierarchy;
mod policy;
mod training;

pub use hierarchy::{
    action_space_for, variable_depths, verify_controllable, HrlAction, LevelPolicy,
    SubgoalHierarchy,
};
pub use policy::{greedy_candidates, QCore, ReplayBuffer, ReplayTuple};
pub use training::{execute_subgoal, her_relabel, train_level_goals, ExecOutcome, Rollout};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Q-learning and verification hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct HrlHyper {
    pub epsilon: f64,
    pub batch: usize,
    /// Goal horizon: level actions allowed per subgoal attempt.
    #[serde(rename = "H")]
    pub horizon: usize,
    pub gamma_goal: f64,
    pub gamma_task: f64,
    pub lr: f64,
    /// Success-ratio threshold for controllability verification.
    pub phi_controllable: f64,
    /// Environment steps consumed per level-training call.
    #[serde(rename = "T_goal")]
    pub t_goal: u64,
    pub target_sync_interval: u64,
    pub replay_capacity: usize,
    pub eval_episodes: usize,
    pub q_hidden: usize,
}

impl Default for HrlHyper {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            batch: 128,
            horizon: 8,
            gamma_goal: 0.9,
            gamma_task: 0.95,
            lr: 1e-4,
            phi_controllable: 0.6,
            t_goal: 10_000,
            target_sync_interval: 200,
            replay_capacity: 50_000,
            eval_episodes: 100,
            q_hidden: 128,
        }
    }
}

impl HrlHyper {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config(format!(
                "epsilon {} must lie in (0, 1)",
                self.epsilon
            )));
        }
        if self.horizon == 0 || self.batch == 0 || self.q_hidden == 0 {
            return Err(Error::Config("hrl sizes must be positive".into()));
        }
        if !(self.phi_controllable > 0.0 && self.phi_controllable < 1.0) {
            return Err(Error::Config("phi_controllable must lie in (0, 1)".into()));
        }
        if self.target_sync_interval == 0 {
            return Err(Error::Config("target_sync_interval must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_published_values() {
        let h = HrlHyper::default();
        assert_eq!(h.epsilon, 0.05);
        assert_eq!(h.batch, 128);
        assert_eq!(h.gamma_goal, 0.9);
        assert_eq!(h.lr, 1e-4);
        assert_eq!(h.phi_controllable, 0.6);
        assert_eq!(h.t_goal, 10_000);
        assert!(h.validate().is_ok());
    }
}
