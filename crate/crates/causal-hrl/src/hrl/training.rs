//! Subgoal execution and level training: recursive rollout of goal-directed
//! actions, hindsight relabeling, per-level Q-learning, and greedy evaluation.

use std::collections::BTreeMap;

use rand::Rng as _;

use crate::env::{goal_reward, Subgoal, Transition, VarVector, World};
use crate::error::{Error, Result};
use crate::rng::Rng;

use super::hierarchy::{HrlAction, SubgoalHierarchy};
use super::policy::ReplayTuple;
use super::HrlHyper;

/// A world plus the current observation and an episode-seed stream. Episodes
/// roll over explicitly via [`Rollout::ensure_live`].
pub struct Rollout<'a> {
    env: &'a mut dyn World,
    pub x: VarVector,
    pub done: bool,
    seed_rng: Rng,
}

impl<'a> Rollout<'a> {
    pub fn new(env: &'a mut dyn World, mut seed_rng: Rng) -> Self {
        let x = env.reset(seed_rng.gen());
        Self {
            env,
            x,
            done: false,
            seed_rng,
        }
    }

    pub fn reset_episode(&mut self) {
        let seed = self.seed_rng.gen();
        self.x = self.env.reset(seed);
        self.done = false;
    }

    pub fn ensure_live(&mut self) {
        if self.done {
            self.reset_episode();
        }
    }

    pub fn step(&mut self, action: usize) -> Transition {
        let x_t = self.x.clone();
        let (x_t1, done) = self.env.step(action);
        self.x = x_t1.clone();
        self.done = done;
        Transition {
            x_t,
            action,
            x_t1,
            env_done: done,
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.env.steps_taken()
    }

    pub fn world(&self) -> &dyn World {
        &*self.env
    }

    pub fn task_achieved(&self) -> bool {
        self.env.task_achieved()
    }
}

#[derive(Debug, Clone)]
pub struct ExecOutcome {
    /// Every primitive step taken, in order.
    pub transitions: Vec<Transition>,
    /// Level transitions of the entry goal's level (one per level action).
    pub records: Vec<ReplayTuple>,
    pub success: bool,
    pub steps_used: u64,
}

/// Runs subgoal `g` for up to `horizon` level actions. Lower-level subgoal
/// actions recurse with the same horizon; primitive actions step the world.
/// Succeeds as soon as the goal's change fires across a level action.
pub fn execute_subgoal(
    roll: &mut Rollout,
    h: &SubgoalHierarchy,
    g: Subgoal,
    fuel: u64,
    horizon: usize,
    epsilon: f64,
    rng: &mut Rng,
) -> Result<ExecOutcome> {
    let start = roll.steps_taken();
    let mut fuel = fuel;
    let mut transitions = Vec::new();
    let mut records = Vec::new();
    let success = exec_inner(
        roll,
        h,
        g,
        &mut fuel,
        horizon,
        epsilon,
        rng,
        &mut transitions,
        &mut Some(&mut records),
    )?;
    Ok(ExecOutcome {
        transitions,
        records,
        success,
        steps_used: roll.steps_taken() - start,
    })
}

#[allow(clippy::too_many_arguments)]
fn exec_inner(
    roll: &mut Rollout,
    h: &SubgoalHierarchy,
    g: Subgoal,
    fuel: &mut u64,
    horizon: usize,
    epsilon: f64,
    rng: &mut Rng,
    transitions: &mut Vec<Transition>,
    records: &mut Option<&mut Vec<ReplayTuple>>,
) -> Result<bool> {
    let (level_idx, goal_id) = h
        .locate(g)
        .ok_or_else(|| Error::Precondition(format!("goal {g:?} not in hierarchy")))?;
    let level = &h.levels[level_idx];
    let core = level
        .core
        .as_ref()
        .ok_or_else(|| Error::Precondition("level has no policy".into()))?;
    let mut success = false;
    for step_i in 0..horizon {
        if roll.done || *fuel == 0 {
            break;
        }
        let x_before = roll.x.clone();
        let input = level.encode(h.schema(), &x_before, goal_id);
        let action_idx = core.choose(&input, &level.goal_actions[goal_id], epsilon, rng)?;
        match level.actions[action_idx] {
            HrlAction::Prim(a) => {
                *fuel -= 1;
                let tr = roll.step(a);
                transitions.push(tr);
            }
            HrlAction::Sub(sub) => {
                exec_inner(roll, h, sub, fuel, horizon, epsilon, rng, transitions, &mut None)?;
            }
        }
        let x_after = roll.x.clone();
        let reward = f64::from(goal_reward(g, &x_before, &x_after)?);
        success = reward > 0.0;
        let truncated = roll.done || *fuel == 0 || step_i + 1 == horizon;
        if let Some(recs) = records.as_deref_mut() {
            recs.push(ReplayTuple {
                x_t: x_before,
                goal_id,
                action_idx,
                reward,
                x_t1: x_after,
                done: success || truncated,
            });
        }
        if success {
            break;
        }
    }
    Ok(success)
}

/// Original tuples plus, for every transition and every level goal whose
/// change fired on it, a relabeled success tuple.
pub fn her_relabel(records: &[ReplayTuple], level_goals: &[Subgoal]) -> Result<Vec<ReplayTuple>> {
    let mut out = records.to_vec();
    for rec in records {
        for (gid, g) in level_goals.iter().enumerate() {
            if goal_reward(*g, &rec.x_t, &rec.x_t1)? == 1 {
                out.push(ReplayTuple {
                    x_t: rec.x_t.clone(),
                    goal_id: gid,
                    action_idx: rec.action_idx,
                    reward: 1.0,
                    x_t1: rec.x_t1.clone(),
                    done: true,
                });
            }
        }
    }
    Ok(out)
}

/// Trains every goal of one level together: random goal selection, subgoal
/// rollouts, HER tuples, and one Q-update per level action, until `t_goal`
/// environment steps are consumed. Lower levels stay frozen. Returns the
/// greedy success ratio of each goal over `eval_episodes` fresh episodes.
pub fn train_level_goals(
    roll: &mut Rollout,
    h: &mut SubgoalHierarchy,
    level_idx: usize,
    hyper: &HrlHyper,
    rng: &mut Rng,
) -> Result<BTreeMap<Subgoal, f64>> {
    let goals = h.levels[level_idx].goals.clone();
    if goals.is_empty() {
        return Ok(BTreeMap::new());
    }
    let schema = h.schema().clone();
    let start = roll.steps_taken();
    while roll.steps_taken() - start < hyper.t_goal {
        roll.ensure_live();
        let g = goals[rng.gen_range(0..goals.len())];
        let remaining = hyper.t_goal - (roll.steps_taken() - start);
        let out = execute_subgoal(roll, h, g, remaining, hyper.horizon, hyper.epsilon, rng)?;
        let tuples = her_relabel(&out.records, &goals)?;
        let level = &mut h.levels[level_idx];
        let core = level.core.as_mut().expect("trained level has a policy");
        for t in tuples {
            core.replay.push(t);
        }
        let n_updates = out.records.len();
        let goal_actions = level.goal_actions.clone();
        let level_snapshot = LevelSnapshot {
            schema: &schema,
            n_goals: level.goals.len(),
        };
        for _ in 0..n_updates {
            core.train_minibatch(
                hyper,
                hyper.gamma_goal,
                |t| level_snapshot.encode(&t.x_t, t.goal_id),
                |t| level_snapshot.encode(&t.x_t1, t.goal_id),
                |t| goal_actions[t.goal_id].clone(),
                rng,
            )?;
        }
    }
    let mut ratios = BTreeMap::new();
    for &g in &goals {
        let mut successes = 0usize;
        for _ in 0..hyper.eval_episodes {
            roll.reset_episode();
            let out = execute_subgoal(roll, h, g, u64::MAX / 2, hyper.horizon, 0.0, rng)?;
            if out.success {
                successes += 1;
            }
        }
        ratios.insert(g, successes as f64 / hyper.eval_episodes.max(1) as f64);
    }
    h.success_ratios.extend(ratios.clone());
    Ok(ratios)
}

/// Borrow-free encoding context for minibatch closures.
struct LevelSnapshot<'a> {
    schema: &'a crate::env::EnvVarSchema,
    n_goals: usize,
}

impl LevelSnapshot<'_> {
    fn encode(&self, x: &VarVector, goal_id: usize) -> Vec<f64> {
        let mut input = self.schema.encode_state(x);
        let mut onehot = vec![0.0; self.n_goals];
        onehot[goal_id] = 1.0;
        input.extend_from_slice(&onehot);
        input
    }
}
