//! DQN plumbing shared by level policies and the task controller: a bounded
//! replay ring, epsilon-greedy selection with random tie-breaking, and
//! target-network Q-updates.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::env::VarVector;
use crate::error::Result;
use crate::numeric::{adam_step, AdamState, DenseNet, Target};
use crate::rng::Rng;

use super::HrlHyper;

/// One replay entry. `goal_id` is 0 for unconditioned (task) policies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplayTuple {
    pub x_t: VarVector,
    pub goal_id: usize,
    pub action_idx: usize,
    pub reward: f64,
    pub x_t1: VarVector,
    pub done: bool,
}

/// Bounded FIFO ring of replay tuples.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ReplayBuffer {
    capacity: usize,
    entries: Vec<ReplayTuple>,
    next: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            entries: Vec::new(),
            next: 0,
        }
    }

    pub fn push(&mut self, tuple: ReplayTuple) {
        if self.capacity == 0 {
            return;
        }
        if self.entries.len() < self.capacity {
            self.entries.push(tuple);
        } else {
            self.entries[self.next] = tuple;
            self.next = (self.next + 1) % self.capacity;
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sample<'a>(&'a self, rng: &mut Rng) -> &'a ReplayTuple {
        &self.entries[rng.gen_range(0..self.entries.len())]
    }

    pub fn iter(&self) -> impl Iterator<Item = &ReplayTuple> {
        self.entries.iter()
    }
}

/// Indices of `allowed` whose Q-value ties the maximum. Invariant under
/// positive affine rescaling of the Q-values.
pub fn greedy_candidates(q: &[f64], allowed: &[usize]) -> Vec<usize> {
    let best = allowed
        .iter()
        .map(|&a| q[a])
        .fold(f64::NEG_INFINITY, f64::max);
    allowed.iter().copied().filter(|&a| q[a] == best).collect()
}

/// Q-network plus target copy, optimizer state, and replay.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QCore {
    pub net: DenseNet,
    pub target: DenseNet,
    adam: AdamState,
    #[serde(skip)]
    pub replay: ReplayBuffer,
    updates: u64,
}

impl QCore {
    pub fn new(net: DenseNet, replay_capacity: usize) -> Self {
        Self {
            target: net.clone(),
            adam: AdamState::new(&net),
            net,
            replay: ReplayBuffer::new(replay_capacity),
            updates: 0,
        }
    }

    /// Extends input and/or output and re-syncs the target copy.
    pub fn grow(&mut self, extra_inputs: usize, extra_outputs: usize) {
        self.net.grow_input(extra_inputs);
        self.net.grow_output(extra_outputs);
        self.adam.grow_to_match(&self.net);
        self.target = self.net.clone();
    }

    /// Removes input columns; optimizer moments restart and the target
    /// re-syncs. Meant for frozen-policy surgery, not mid-training use.
    pub fn retain_net_inputs(&mut self, keep: &[bool]) -> Result<()> {
        self.net.retain_inputs(keep)?;
        self.adam = AdamState::new(&self.net);
        self.target = self.net.clone();
        Ok(())
    }

    pub fn q_values(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.net.forward(input)
    }

    /// Epsilon-greedy over `allowed` output indices; greedy ties break
    /// uniformly at random.
    pub fn choose(
        &self,
        input: &[f64],
        allowed: &[usize],
        epsilon: f64,
        rng: &mut Rng,
    ) -> Result<usize> {
        debug_assert!(!allowed.is_empty());
        if epsilon > 0.0 && rng.gen_bool(epsilon) {
            return Ok(allowed[rng.gen_range(0..allowed.len())]);
        }
        let q = self.q_values(input)?;
        let candidates = greedy_candidates(&q, allowed);
        Ok(candidates[rng.gen_range(0..candidates.len())])
    }

    /// One TD(0) minibatch update; `allowed_for` gives the bootstrap action
    /// set of a tuple. No-op until the replay holds a full batch.
    pub fn train_minibatch(
        &mut self,
        hyper: &HrlHyper,
        gamma: f64,
        encode: impl Fn(&ReplayTuple) -> Vec<f64>,
        encode_next: impl Fn(&ReplayTuple) -> Vec<f64>,
        allowed_for: impl Fn(&ReplayTuple) -> Vec<usize>,
        rng: &mut Rng,
    ) -> Result<bool> {
        if self.replay.len() < hyper.batch {
            return Ok(false);
        }
        let mut batch = Vec::with_capacity(hyper.batch);
        for _ in 0..hyper.batch {
            let tuple = self.replay.sample(rng).clone();
            let td = if tuple.done {
                tuple.reward
            } else {
                let q_next = self.target.forward(&encode_next(&tuple))?;
                let allowed = allowed_for(&tuple);
                let best = allowed
                    .iter()
                    .map(|&a| q_next[a])
                    .fold(f64::NEG_INFINITY, f64::max);
                tuple.reward + gamma * best
            };
            batch.push((
                encode(&tuple),
                Target::Value { index: tuple.action_idx, value: td },
            ));
        }
        let grads = self.net.backward(&batch)?;
        adam_step(&mut self.net, &grads, &mut self.adam, hyper.lr);
        self.updates += 1;
        if self.updates % hyper.target_sync_interval == 0 {
            self.target = self.net.clone();
        }
        Ok(true)
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }
}
