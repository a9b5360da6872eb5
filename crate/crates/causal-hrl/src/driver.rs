//! The outer loop: alternate intervention sampling, causality discovery,
//! hierarchy extension, and subgoal training until no new controllable
//! variable appears; then train a task-level controller over the frozen
//! subgoal policies.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::env::{EnvVarSchema, Subgoal, VarId, VarVector, World};
use crate::error::Result;
use crate::hrl::{
    execute_subgoal, train_level_goals, variable_depths, verify_controllable, HrlAction, QCore,
    ReplayTuple, Rollout, SubgoalHierarchy,
};
use crate::intervention::{bootstrap_action_data, intervene_on_variable, InterventionPlan};
use crate::numeric::{DenseNet, Head};
use crate::rng::{stream, Rng};
use crate::scm::{CausalGraph, InterventionDataset, ScmParams};

/// Counts episodes and per-episode milestone achievements across everything
/// that happens on the wrapped world.
pub struct TallyWorld {
    inner: Box<dyn World>,
    episode_bits: u8,
    episode_active: bool,
    pub episodes: u64,
    pub milestone_counts: [u64; 5],
}

impl TallyWorld {
    pub fn new(inner: Box<dyn World>) -> Self {
        Self {
            inner,
            episode_bits: 0,
            episode_active: false,
            episodes: 0,
            milestone_counts: [0; 5],
        }
    }

    fn finish_episode(&mut self) {
        if !self.episode_active {
            return;
        }
        self.episodes += 1;
        for (k, count) in self.milestone_counts.iter_mut().enumerate() {
            if self.episode_bits & (1 << k) != 0 {
                *count += 1;
            }
        }
        self.episode_bits = 0;
        self.episode_active = false;
    }

    /// Closes out a partially-run episode, e.g. at a phase boundary.
    pub fn flush(&mut self) {
        self.finish_episode();
    }
}

impl World for TallyWorld {
    fn schema(&self) -> &EnvVarSchema {
        self.inner.schema()
    }

    fn reset(&mut self, seed: u64) -> VarVector {
        self.finish_episode();
        self.inner.reset(seed)
    }

    fn step(&mut self, action: usize) -> (VarVector, bool) {
        let (x, done) = self.inner.step(action);
        self.episode_active = true;
        self.episode_bits |= self.inner.milestones();
        if done {
            self.finish_episode();
        }
        (x, done)
    }

    fn ground_truth_graph(&self) -> CausalGraph {
        self.inner.ground_truth_graph()
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

/// Variables outside the intervention set whose discovered parent set is
/// nonempty and fully contained in it.
pub fn candidate_controllables(graph: &CausalGraph, s_iv: &BTreeSet<VarId>) -> BTreeSet<VarId> {
    let mut out = BTreeSet::new();
    for v in 0..graph.len() {
        if s_iv.contains(&v) {
            continue;
        }
        let parents = graph.parents(v);
        if !parents.is_empty() && parents.iter().all(|p| s_iv.contains(p)) {
            out.insert(v);
        }
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum LoopEvent {
    Discovered {
        iteration: usize,
        edges: Vec<(VarId, VarId)>,
    },
    CandidatesSelected {
        iteration: usize,
        vars: Vec<VarId>,
    },
    LevelTrainingStarted {
        iteration: usize,
        level: usize,
        goals: Vec<Subgoal>,
    },
    GoalEvaluated {
        iteration: usize,
        level: usize,
        goal: Subgoal,
        ratio: f64,
    },
    VariablesVerified {
        iteration: usize,
        vars: Vec<VarId>,
    },
}

/// Everything worth keeping from one outer iteration.
pub struct IterationSnapshot {
    pub iteration: usize,
    pub graph: CausalGraph,
    pub pruned_graph: CausalGraph,
    pub sigma: Vec<Vec<f64>>,
    pub s_iv: BTreeSet<VarId>,
    pub s_cc: BTreeSet<VarId>,
    pub s_c: BTreeSet<VarId>,
    pub env_steps: u64,
    pub mean_subgoal_success: f64,
    pub milestone_counts: [u64; 5],
    pub mean_nll: f64,
    pub dataset: InterventionDataset,
    /// Informational; excluded from determinism comparisons.
    pub wall_clock_s: f64,
}

pub struct PretrainOutput {
    pub hierarchy: SubgoalHierarchy,
    pub graph: CausalGraph,
    pub pruned_graph: CausalGraph,
    pub sigma: Vec<Vec<f64>>,
    pub snapshots: Vec<IterationSnapshot>,
    pub events: Vec<LoopEvent>,
    pub env_steps: u64,
    pub milestone_counts: [u64; 5],
    pub episodes: u64,
}

/// Builds the configured world, applying variable dropout when asked.
pub fn make_world(config: &RunConfig) -> Result<Box<dyn World>> {
    let base = config.env.build(config.seed)?;
    let hidden = config.resolved_hidden_vars(base.schema())?;
    if hidden.is_empty() {
        Ok(base)
    } else {
        Ok(Box::new(crate::worlds::DropoutWorld::new(base, &hidden)?))
    }
}

pub fn run_pretraining(config: &RunConfig) -> Result<PretrainOutput> {
    config.validate()?;
    let seed = config.seed;
    let mut world = TallyWorld::new(make_world(config)?);
    let schema = world.schema().clone();
    let action_var = schema.action_var();
    let m = schema.len();

    let mut scm = ScmParams::new(&schema, &config.scm, &mut stream(seed, "scm-init"))?;
    let mut rng_scm = stream(seed, "scm-train");
    let mut rng_hrl = stream(seed, "hrl");
    let mut rng_iv = stream(seed, "intervention");

    let mut hierarchy = SubgoalHierarchy::new(&schema);
    let mut s_iv: BTreeSet<VarId> = [action_var].into();
    let max_iterations = config.driver.max_iterations.unwrap_or(2 * m);
    let random_arm = config.is_random_intervention_arm();

    let mut snapshots: Vec<IterationSnapshot> = Vec::new();
    let mut events: Vec<LoopEvent> = Vec::new();
    let mut graph = CausalGraph::empty(m);
    let mut pruned = CausalGraph::empty(m);
    let mut sigma = scm.sigma();
    let mut empty_streak = 0u32;
    let t_start = std::time::Instant::now();

    for iteration in 0..max_iterations {
        // Intervention sampling over the current controllable set. In the
        // random-data arm only the bootstrap mechanism is kept: every
        // variable's slot is filled with uniform-random-action pairs.
        let mut data = InterventionDataset::new();
        {
            let mut roll = Rollout::new(
                &mut world,
                stream(seed, &format!("episodes-sample-{iteration}")),
            );
            let n = config.driver.samples_per_var;
            data.set_entry(action_var, bootstrap_action_data(&mut roll, n, &mut rng_iv));
            for &v in s_iv.clone().iter().filter(|&&v| v != action_var) {
                let pairs = if random_arm {
                    bootstrap_action_data(&mut roll, n, &mut rng_iv)
                } else {
                    let plan = InterventionPlan {
                        target: v,
                        max_attempts: config.driver.max_attempts,
                        samples_requested: n,
                        horizon: config.hrl.horizon,
                        min_direction_ratio: config.hrl.phi_controllable,
                    };
                    intervene_on_variable(&mut roll, &hierarchy, &plan, &mut rng_iv)?
                };
                data.set_entry(v, pairs);
            }
        }
        world.flush();

        let disc = scm.discover(&config.scm, &data, &s_iv, &mut rng_scm)?;
        graph = disc.graph.clone();
        sigma = disc.sigma.clone();
        pruned = graph.pruned_acyclic(&sigma);
        events.push(LoopEvent::Discovered {
            iteration,
            edges: graph.edges(),
        });

        let s_cc = candidate_controllables(&pruned, &s_iv);
        events.push(LoopEvent::CandidatesSelected {
            iteration,
            vars: s_cc.iter().copied().collect(),
        });

        if s_cc.is_empty() {
            snapshots.push(IterationSnapshot {
                iteration,
                graph: graph.clone(),
                pruned_graph: pruned.clone(),
                sigma: sigma.clone(),
                s_iv: s_iv.clone(),
                s_cc,
                s_c: BTreeSet::new(),
                env_steps: world.steps_taken(),
                mean_subgoal_success: 0.0,
                milestone_counts: world.milestone_counts,
                mean_nll: disc.mean_nll,
                dataset: data,
                wall_clock_s: t_start.elapsed().as_secs_f64(),
            });
            break;
        }

        let depths = variable_depths(&pruned, action_var);
        hierarchy.build_or_extend(&pruned, &s_cc, &depths, &config.hrl, &mut rng_hrl)?;

        let k_min = s_cc.iter().map(|v| hierarchy.depth_of[v]).min().unwrap();
        let k_max = s_cc.iter().map(|v| hierarchy.depth_of[v]).max().unwrap();
        let mut iter_ratios: BTreeMap<Subgoal, f64> = BTreeMap::new();
        for level in k_min..=k_max {
            if hierarchy.levels[level - 1].goals.is_empty() {
                continue;
            }
            events.push(LoopEvent::LevelTrainingStarted {
                iteration,
                level,
                goals: hierarchy.levels[level - 1].goals.clone(),
            });
            let ratios = {
                let mut roll = Rollout::new(
                    &mut world,
                    stream(seed, &format!("episodes-train-{iteration}-{level}")),
                );
                train_level_goals(&mut roll, &mut hierarchy, level - 1, &config.hrl, &mut rng_hrl)?
            };
            world.flush();
            for (g, r) in &ratios {
                events.push(LoopEvent::GoalEvaluated {
                    iteration,
                    level,
                    goal: *g,
                    ratio: *r,
                });
            }
            iter_ratios.extend(ratios);
        }

        let candidate_ratios: BTreeMap<Subgoal, f64> = iter_ratios
            .iter()
            .filter(|(g, _)| s_cc.contains(&g.var))
            .map(|(g, r)| (*g, *r))
            .collect();
        let s_c = verify_controllable(&candidate_ratios, config.hrl.phi_controllable);
        events.push(LoopEvent::VariablesVerified {
            iteration,
            vars: s_c.iter().copied().collect(),
        });
        hierarchy.verified.extend(s_c.iter().copied());
        s_iv.extend(s_c.iter().copied());

        let mean_success = if iter_ratios.is_empty() {
            0.0
        } else {
            iter_ratios.values().sum::<f64>() / iter_ratios.len() as f64
        };
        snapshots.push(IterationSnapshot {
            iteration,
            graph: graph.clone(),
            pruned_graph: pruned.clone(),
            sigma: sigma.clone(),
            s_iv: s_iv.clone(),
            s_cc,
            s_c: s_c.clone(),
            env_steps: world.steps_taken(),
            mean_subgoal_success: mean_success,
            milestone_counts: world.milestone_counts,
            mean_nll: disc.mean_nll,
            dataset: data,
            wall_clock_s: t_start.elapsed().as_secs_f64(),
        });

        if s_c.is_empty() {
            empty_streak += 1;
            if empty_streak >= 2 {
                break;
            }
        } else {
            empty_streak = 0;
        }
    }

    hierarchy.retain_verified()?;
    Ok(PretrainOutput {
        hierarchy,
        graph,
        pruned_graph: pruned,
        sigma,
        snapshots,
        events,
        env_steps: world.steps_taken(),
        milestone_counts: world.milestone_counts,
        episodes: world.episodes,
    })
}

/// Task controller over the verified subgoals plus primitives.
#[derive(Clone, Serialize, Deserialize)]
pub struct TaskPolicy {
    pub actions: Vec<HrlAction>,
    pub core: QCore,
    pub gamma: f64,
}

impl TaskPolicy {
    pub fn new(
        schema: &EnvVarSchema,
        hierarchy: &SubgoalHierarchy,
        hyper: &crate::hrl::HrlHyper,
        primitive_count: usize,
        rng: &mut Rng,
    ) -> Result<Self> {
        let mut actions: Vec<HrlAction> = hierarchy
            .verified_goals()
            .into_iter()
            .map(HrlAction::Sub)
            .collect();
        actions.extend((0..primitive_count).map(HrlAction::Prim));
        let dims = [
            schema.state_onehot_width(),
            hyper.q_hidden,
            hyper.q_hidden,
            actions.len(),
        ];
        let net = DenseNet::new(&dims, Head::Linear, rng)?;
        Ok(Self {
            actions,
            core: QCore::new(net, hyper.replay_capacity),
            gamma: hyper.gamma_task,
        })
    }

    pub fn choose(
        &self,
        schema: &EnvVarSchema,
        x: &VarVector,
        epsilon: f64,
        rng: &mut Rng,
    ) -> Result<usize> {
        let allowed: Vec<usize> = (0..self.actions.len()).collect();
        self.core.choose(&schema.encode_state(x), &allowed, epsilon, rng)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub episode: u64,
    pub env_steps: u64,
    pub reward: f64,
    pub milestones: u8,
}

pub struct AdaptationOutput {
    pub policy: TaskPolicy,
    pub episodes: Vec<EpisodeLog>,
    pub env_steps: u64,
    pub milestone_counts: [u64; 5],
}

/// Q-learning over the composite action space with frozen subgoal policies
/// and the sparse task reward; episodes end on success.
pub fn run_adaptation(
    config: &RunConfig,
    hierarchy: &SubgoalHierarchy,
    budget_steps: u64,
) -> Result<AdaptationOutput> {
    let seed = config.seed;
    let mut world = TallyWorld::new(make_world(config)?);
    let schema = world.schema().clone();
    let primitive_count = world.primitive_action_count();
    let mut rng = stream(seed, "adaptation");
    let mut policy = TaskPolicy::new(&schema, hierarchy, &config.hrl, primitive_count, &mut rng)?;
    let hyper = &config.hrl;
    let all_actions: Vec<usize> = (0..policy.actions.len()).collect();
    let mut episodes = Vec::new();
    let mut episode_reward = 0.0;

    {
        let mut roll = Rollout::new(&mut world, stream(seed, "adapt-episodes"));
        let start = roll.steps_taken();
        while roll.steps_taken() - start < budget_steps {
            if roll.done || roll.task_achieved() {
                episodes.push(EpisodeLog {
                    episode: episodes.len() as u64,
                    env_steps: roll.steps_taken() - start,
                    reward: episode_reward,
                    milestones: roll.world().milestones(),
                });
                episode_reward = 0.0;
                roll.reset_episode();
            }
            let x_before = roll.x.clone();
            let input = schema.encode_state(&x_before);
            let action_idx = policy.core.choose(&input, &all_actions, hyper.epsilon, &mut rng)?;
            match policy.actions[action_idx] {
                HrlAction::Prim(a) => {
                    roll.step(a);
                }
                HrlAction::Sub(g) => {
                    execute_subgoal(&mut roll, hierarchy, g, u64::MAX / 2, hyper.horizon, 0.0, &mut rng)?;
                }
            }
            let achieved = roll.task_achieved();
            let reward = if achieved { 1.0 } else { 0.0 };
            episode_reward += reward;
            let done = achieved || roll.done;
            policy.core.replay.push(ReplayTuple {
                x_t: x_before,
                goal_id: 0,
                action_idx,
                reward,
                x_t1: roll.x.clone(),
                done,
            });
            let schema_ref = &schema;
            let allowed = all_actions.clone();
            policy.core.train_minibatch(
                hyper,
                policy.gamma,
                |t| schema_ref.encode_state(&t.x_t),
                |t| schema_ref.encode_state(&t.x_t1),
                |_| allowed.clone(),
                &mut rng,
            )?;
        }
    }

    world.flush();
    Ok(AdaptationOutput {
        policy,
        episodes,
        env_steps: world.steps_taken(),
        milestone_counts: world.milestone_counts,
    })
}

/// Greedy task-policy episodes; returns per-milestone achievement counts.
pub fn eval_milestones(
    config: &RunConfig,
    hierarchy: &SubgoalHierarchy,
    policy: &TaskPolicy,
    episodes: u64,
) -> Result<[u64; 5]> {
    let mut world = TallyWorld::new(make_world(config)?);
    let schema = world.schema().clone();
    let mut rng = stream(config.seed, "milestone-eval");
    {
        let mut roll = Rollout::new(&mut world, stream(config.seed, "eval-episodes"));
        for _ in 0..episodes {
            roll.reset_episode();
            while !roll.done && !roll.task_achieved() {
                let input = schema.encode_state(&roll.x);
                let allowed: Vec<usize> = (0..policy.actions.len()).collect();
                let idx = policy.core.choose(&input, &allowed, 0.0, &mut rng)?;
                match policy.actions[idx] {
                    HrlAction::Prim(a) => {
                        roll.step(a);
                    }
                    HrlAction::Sub(g) => {
                        execute_subgoal(&mut roll, hierarchy, g, u64::MAX / 2, config.hrl.horizon, 0.0, &mut rng)?;
                    }
                }
            }
        }
    }
    world.flush();
    if episodes == 0 {
        return Ok([0; 5]);
    }
    Ok(world.milestone_counts)
}

impl SubgoalHierarchy {
    /// Drops every goal whose variable never verified; their nets' goal
    /// columns are removed so the surviving goals keep their behaviour.
    pub fn retain_verified(&mut self) -> Result<()> {
        let verified = self.verified.clone();
        for level in &mut self.levels {
            let keep: Vec<bool> = level.goals.iter().map(|g| verified.contains(&g.var)).collect();
            level.retain_goals(&keep)?;
        }
        self.depth_of.retain(|v, _| verified.contains(v));
        Ok(())
    }
}
