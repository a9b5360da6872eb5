//! Acceptance suite: one test per shipped claim, each printing a PASS/FAIL
//! line with its measured numbers. Heavier claims run full driver loops on
//! desk-scale profiles of the crafting chain.

use std::collections::BTreeSet;

use causal_hrl::config::{AblationMode, EnvConfig, RunConfig};
use causal_hrl::driver::{
    eval_milestones, run_adaptation, run_pretraining, LoopEvent, make_world,
};
use causal_hrl::env::{goal_reward, ChangeKind, Subgoal};
use causal_hrl::harness::{cli_ablate_random_intervention, cli_run};
use causal_hrl::hrl::{her_relabel, ReplayTuple, SubgoalHierarchy};
use causal_hrl::metrics::strip_wall_clock;
use causal_hrl::numeric::{adam_step, softmax, AdamState, DenseNet, Grads, Head, Target};
use causal_hrl::rng::stream;
use causal_hrl::scm::{shd, sid, CausalGraph};
use causal_hrl::worlds::ChainCraftConfig;
use rand::Rng as _;

// ---------------------------------------------------------------------------
// Profiles
// ---------------------------------------------------------------------------

/// Desk-scale discovery and Q-learning knobs shared by every profile.
fn desk_knobs(cfg: &mut RunConfig) {
    cfg.scm.t_outer = 6;
    cfg.scm.fs = 150;
    cfg.scm.qs = 40;
    cfg.scm.k_draws = 10;
    cfg.scm.batch = 64;
    cfg.scm.hidden = 32;
    cfg.hrl.q_hidden = 32;
    cfg.hrl.batch = 32;
    cfg.hrl.t_goal = 2500;
    cfg.hrl.eval_episodes = 30;
    cfg.hrl.epsilon = 0.3;
    cfg.hrl.lr = 2e-3;
    cfg.driver.samples_per_var = 256;
}

/// Deterministic crafting, short episodes: the graph-recovery setting.
fn recovery_profile(m_chain: usize, seed: u64) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.env = EnvConfig::Chaincraft(ChainCraftConfig {
        m_chain,
        episode_length: 8,
        ..Default::default()
    });
    cfg.seed = seed;
    desk_knobs(&mut cfg);
    cfg
}

/// Unreliable crafting and a tight sample budget: random behaviour rarely
/// witnesses deep transitions, so discovery must proceed variable by
/// variable along the chain.
fn hard_exploration_profile(m_chain: usize, seed: u64) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.env = EnvConfig::Chaincraft(ChainCraftConfig {
        m_chain,
        episode_length: 8,
        success_prob: 0.4,
        ..Default::default()
    });
    cfg.seed = seed;
    desk_knobs(&mut cfg);
    cfg.driver.samples_per_var = 160;
    cfg.scm.eta_decay = 0.10;
    cfg.hrl.t_goal = 4000;
    cfg
}

/// Long chain with episodes barely long enough for the task: the
/// exploration-capability setting.
fn exploration_profile(seed: u64) -> RunConfig {
    let mut cfg = recovery_profile(5, seed);
    cfg.env = EnvConfig::Chaincraft(ChainCraftConfig {
        m_chain: 5,
        episode_length: 6,
        ..Default::default()
    });
    cfg.driver.adaptation_steps = 12_000;
    cfg
}

fn truth_of(cfg: &RunConfig) -> CausalGraph {
    make_world(cfg).unwrap().ground_truth_graph()
}

// ---------------------------------------------------------------------------
// Graph recovery
// ---------------------------------------------------------------------------

#[test]
fn acceptance_graph_recovery() {
    let mut passes = 0;
    let mut details = Vec::new();
    for seed in 1..=10u64 {
        let t0 = std::time::Instant::now();
        let cfg = recovery_profile(4, seed);
        let out = run_pretraining(&cfg).unwrap();
        let truth = truth_of(&cfg);
        let d_shd = shd(&truth, &out.graph).unwrap();
        let d_sid = sid(&truth, &out.pruned_graph).unwrap();
        let elapsed = t0.elapsed().as_secs_f64();
        let ok = d_shd <= 1 && d_sid <= 2 && elapsed <= 900.0;
        passes += usize::from(ok);
        details.push(format!("seed {seed}: shd={d_shd} sid={d_sid} {elapsed:.0}s"));
    }
    let pass = passes >= 7;
    println!(
        "[acceptance] graph recovery: {} ({passes}/10 seeds with shd<=1, sid<=2; {})",
        if pass { "PASS" } else { "FAIL" },
        details.join("; ")
    );
    assert!(pass, "graph recovery below 7/10: {details:?}");
}

// ---------------------------------------------------------------------------
// Intervention ablation
// ---------------------------------------------------------------------------

#[test]
fn acceptance_intervention_ablation() {
    let tmp = tempfile::tempdir().unwrap();
    let mut shd_wins = 0;
    let mut sid_wins = 0;
    let mut details = Vec::new();
    for seed in 1..=5u64 {
        let mut cfg = hard_exploration_profile(4, seed);
        cfg.out_dir = tmp.path().join(format!("ablate-{seed}"));
        let pair = cli_ablate_random_intervention(&cfg).unwrap();
        let mean = |rows: &[causal_hrl::metrics::MetricsRow], f: &dyn Fn(&causal_hrl::metrics::MetricsRow) -> usize| {
            rows.iter().map(|r| f(r) as f64).sum::<f64>() / rows.len() as f64
        };
        let shd_p = mean(&pair.policy_rows, &|r| r.shd);
        let shd_r = mean(&pair.random_rows, &|r| r.shd);
        let sid_p = mean(&pair.policy_rows, &|r| r.sid);
        let sid_r = mean(&pair.random_rows, &|r| r.sid);
        shd_wins += usize::from(shd_p <= shd_r);
        sid_wins += usize::from(sid_p <= sid_r);
        details.push(format!(
            "seed {seed}: shd {shd_p:.2} vs {shd_r:.2}, sid {sid_p:.2} vs {sid_r:.2}"
        ));
        // Both arms start from the same bootstrap-only iteration.
        assert_eq!(pair.policy_rows[0].shd, pair.random_rows[0].shd);
        assert_eq!(pair.policy_rows[0].sid, pair.random_rows[0].sid);
        let csv = std::fs::read_to_string(&pair.csv_path).unwrap();
        assert!(csv.starts_with("iteration,shd_policy,shd_random,sid_policy,sid_random"));
    }
    let pass = shd_wins >= 4 && sid_wins >= 4;
    println!(
        "[acceptance] intervention ablation: {} (shd wins {shd_wins}/5, sid wins {sid_wins}/5; {})",
        if pass { "PASS" } else { "FAIL" },
        details.join("; ")
    );
    assert!(pass, "policy arm not better: {details:?}");
}

// ---------------------------------------------------------------------------
// Exploration capability
// ---------------------------------------------------------------------------

#[test]
fn acceptance_exploration_capability() {
    let mut details = Vec::new();
    let mut pass = true;
    for seed in 1..=3u64 {
        let cfg = exploration_profile(seed);
        let pre = run_pretraining(&cfg).unwrap();
        let adapt = run_adaptation(&cfg, &pre.hierarchy, cfg.driver.adaptation_steps).unwrap();
        let budget = pre.env_steps + adapt.env_steps;
        let guided = eval_milestones(&cfg, &pre.hierarchy, &adapt.policy, 1000).unwrap();

        // Flat baseline: same machinery, empty hierarchy, equal total budget.
        let schema = make_world(&cfg).unwrap().schema().clone();
        let empty = SubgoalHierarchy::new(&schema);
        let flat_adapt = run_adaptation(&cfg, &empty, budget).unwrap();
        let flat = eval_milestones(&cfg, &empty, &flat_adapt.policy, 1000).unwrap();

        let deepest = 4; // five milestones on the 5-chain
        pass &= guided[deepest] > flat[deepest];
        details.push(format!(
            "seed {seed}: guided {:?} vs flat {:?} (budget {budget})",
            guided, flat
        ));
    }
    println!(
        "[acceptance] exploration capability: {} ({})",
        if pass { "PASS" } else { "FAIL" },
        details.join("; ")
    );
    assert!(pass, "guided agent did not beat the flat baseline: {details:?}");
}

// ---------------------------------------------------------------------------
// Subgoal ordering
// ---------------------------------------------------------------------------

#[test]
fn acceptance_subgoal_ordering() {
    let m_chain = 4;
    let mut details = Vec::new();
    let mut pass = true;
    for seed in 1..=4u64 {
        let cfg = hard_exploration_profile(m_chain, seed);
        let out = run_pretraining(&cfg).unwrap();

        // Timeline positions of interesting events.
        let mut first_training_start: std::collections::BTreeMap<Subgoal, usize> =
            Default::default();
        let mut level_training_starts: Vec<(usize, usize)> = Vec::new(); // (pos, level)
        let mut evaluations: Vec<(usize, usize, Subgoal, f64)> = Vec::new(); // (pos, level, ..)
        for (pos, event) in out.events.iter().enumerate() {
            match event {
                LoopEvent::LevelTrainingStarted { level, goals, .. } => {
                    level_training_starts.push((pos, *level));
                    for g in goals {
                        first_training_start.entry(*g).or_insert(pos);
                    }
                }
                LoopEvent::GoalEvaluated { level, goal, ratio, .. } => {
                    evaluations.push((pos, *level, *goal, *ratio));
                }
                _ => {}
            }
        }

        // Every level-k training start is preceded by an evaluation pass over
        // level k-1 (same or an earlier iteration).
        for &(pos, level) in &level_training_starts {
            if level <= 1 {
                continue;
            }
            let lower_eval_before = evaluations
                .iter()
                .any(|&(epos, elevel, _, _)| epos < pos && elevel == level - 1);
            if !lower_eval_before {
                pass = false;
                details.push(format!(
                    "seed {seed}: level {level} trained before level {} evaluation",
                    level - 1
                ));
            }
        }

        // Chain ordering: the predecessor's increase subgoal must have been
        // evaluated above threshold before the successor first trains.
        // Chain variable v_k carries id k + 1.
        for k in 1..m_chain {
            let succ = Subgoal::new(k + 1, ChangeKind::Increase);
            let pred = Subgoal::new(k, ChangeKind::Increase);
            let Some(&start) = first_training_start.get(&succ) else {
                continue; // never trained: nothing to order
            };
            let pred_ok = evaluations
                .iter()
                .any(|&(epos, _, goal, ratio)| epos < start && goal == pred && ratio > 0.6);
            if !pred_ok {
                pass = false;
                details.push(format!(
                    "seed {seed}: v{} trained before v{} exceeded 0.6",
                    k,
                    k - 1
                ));
            }
        }
        details.push(format!(
            "seed {seed}: {} iterations, trained {:?}",
            out.snapshots.len(),
            first_training_start.keys().map(|g| g.var).collect::<BTreeSet<_>>()
        ));
    }
    println!(
        "[acceptance] subgoal ordering: {} ({})",
        if pass { "PASS" } else { "FAIL" },
        details.join("; ")
    );
    assert!(pass, "ordering violated: {details:?}");
}

// ---------------------------------------------------------------------------
// Numerical core
// ---------------------------------------------------------------------------

#[test]
fn acceptance_numerical_core() {
    let t0 = std::time::Instant::now();
    // Gradient check across 100 generic random nets; draws that land on a
    // rectifier kink (where central differences are undefined) are re-drawn.
    let mut checked = 0;
    let mut worst = 0.0f64;
    for seed in 1..=300u64 {
        if checked >= 100 {
            break;
        }
        let mut rng = stream(seed, "acc-grad");
        let dims = [
            2 + (seed % 3) as usize,
            2 + (seed % 5) as usize,
            2 + (seed % 4) as usize,
        ];
        let head = if seed % 2 == 0 { Head::Softmax } else { Head::Linear };
        let net = DenseNet::new(&[dims[0], dims[1], dims[1], dims[2]], head, &mut rng).unwrap();
        let batch: Vec<(Vec<f64>, Target)> = (0..4)
            .map(|i| {
                let x: Vec<f64> = (0..dims[0]).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let t = match head {
                    Head::Softmax => Target::Class(i % dims[2]),
                    Head::Linear => Target::Value {
                        index: i % dims[2],
                        value: rng.gen_range(-1.0..1.0),
                    },
                };
                (x, t)
            })
            .collect();
        let inputs: Vec<Vec<f64>> = batch.iter().map(|(x, _)| x.clone()).collect();
        if net.min_abs_hidden_preactivation(&inputs) < 1e-3 {
            continue;
        }
        let err = net.grad_check(&batch, 1e-5).unwrap();
        worst = worst.max(err);
        checked += 1;
    }
    let grad_ok = checked >= 100 && worst < 1e-4;

    // Softmax normalization within 1e-6 on arbitrary finite inputs.
    let mut rng = stream(7, "acc-softmax");
    let mut softmax_ok = true;
    for _ in 0..1000 {
        let n = rng.gen_range(1..9);
        let logits: Vec<f64> = (0..n).map(|_| rng.gen_range(-60.0..60.0)).collect();
        let p = softmax(&logits);
        softmax_ok &= (p.iter().sum::<f64>() - 1.0).abs() <= 1e-6 && p.iter().all(|&v| v >= 0.0);
    }

    // Adam with zero gradients is the identity on parameters.
    let mut net = DenseNet::new(&[3, 4, 2], Head::Linear, &mut stream(8, "acc-adam")).unwrap();
    let before = net.forward(&[0.1, 0.2, 0.3]).unwrap();
    let grads = Grads {
        weights: (0..2).map(|l| vec![0.0; [3 * 4, 4 * 2][l]]).collect(),
        biases: (0..2).map(|l| vec![0.0; [4, 2][l]]).collect(),
    };
    let mut st = AdamState::new(&net);
    for _ in 0..5 {
        adam_step(&mut net, &grads, &mut st, 5e-3);
    }
    let after = net.forward(&[0.1, 0.2, 0.3]).unwrap();
    let adam_ok = before == after && st.step_count() == 5;

    let elapsed = t0.elapsed().as_secs_f64();
    let pass = grad_ok && softmax_ok && adam_ok && elapsed < 30.0;
    println!(
        "[acceptance] numerical core: {} (grad worst {worst:.2e}, softmax {}, adam {}, {elapsed:.1}s)",
        if pass { "PASS" } else { "FAIL" },
        softmax_ok,
        adam_ok
    );
    assert!(pass);
}

// ---------------------------------------------------------------------------
// Missing-variable robustness
// ---------------------------------------------------------------------------

#[test]
fn acceptance_missing_variable_robustness() {
    // Hide the second chain link (inner id 2). Visible ids become:
    // action=0, v0=1, v2=2, v3=3, noise=4,5.
    let mut passes = 0;
    let mut details = Vec::new();
    for seed in 1..=5u64 {
        let mut cfg = recovery_profile(4, seed);
        cfg.ablation.mode = AblationMode::EvDropout;
        cfg.ablation.dropped_vars = Some(vec![2]);
        let out = run_pretraining(&cfg).unwrap();
        let transitive = out.graph.has_edge(2, 1);
        let v2_controllable = out.hierarchy.verified.contains(&2);
        let ok = transitive && v2_controllable;
        passes += usize::from(ok);
        details.push(format!(
            "seed {seed}: v0->v2 {} verified {}",
            transitive, v2_controllable
        ));
    }
    let pass = passes >= 3;
    println!(
        "[acceptance] missing-variable robustness: {} ({passes}/5; {})",
        if pass { "PASS" } else { "FAIL" },
        details.join("; ")
    );
    assert!(pass, "transitive recovery below 3/5: {details:?}");
}

// ---------------------------------------------------------------------------
// Metric oracles
// ---------------------------------------------------------------------------

/// Random strictly-positive conditional probability tables for a binary-
/// variable DAG: `cpt[i][pa_assignment]` is P(x_i = 1 | parents).
fn random_cpts(g: &CausalGraph, rng: &mut causal_hrl::rng::Rng) -> Vec<Vec<f64>> {
    (0..g.len())
        .map(|i| {
            let n = 1usize << g.parents(i).len();
            (0..n).map(|_| rng.gen_range(0.15..0.85)).collect()
        })
        .collect()
}

fn pa_index(g: &CausalGraph, i: usize, state: usize) -> usize {
    let mut idx = 0;
    for (bit, p) in g.parents(i).into_iter().enumerate() {
        if state >> p & 1 == 1 {
            idx |= 1 << bit;
        }
    }
    idx
}

/// Observational joint by direct factorization over all 2^m states.
fn joint(g: &CausalGraph, cpts: &[Vec<f64>]) -> Vec<f64> {
    let m = g.len();
    (0..1usize << m)
        .map(|state| {
            (0..m)
                .map(|i| {
                    let p1 = cpts[i][pa_index(g, i, state)];
                    if state >> i & 1 == 1 {
                        p1
                    } else {
                        1.0 - p1
                    }
                })
                .product()
        })
        .collect()
}

/// P(x_j = 1 | do(x_i = v)) by truncated factorization.
fn do_marginal(g: &CausalGraph, cpts: &[Vec<f64>], i: usize, v: usize, j: usize) -> f64 {
    let m = g.len();
    let mut total = 0.0;
    for state in 0..1usize << m {
        if state >> i & 1 != v {
            continue;
        }
        let mut p = 1.0;
        for k in 0..m {
            if k == i {
                continue;
            }
            let p1 = cpts[k][pa_index(g, k, state)];
            p *= if state >> k & 1 == 1 { p1 } else { 1.0 - p1 };
        }
        if state >> j & 1 == 1 {
            total += p;
        }
    }
    total
}

/// The practitioner's estimate: adjustment over `z` on observational data,
/// or the no-effect claim when `j` is taken for a parent of `i`.
fn adjustment_estimate(
    joint: &[f64],
    m: usize,
    i: usize,
    v: usize,
    j: usize,
    z: &[usize],
) -> f64 {
    if z.contains(&j) {
        // Claimed null effect: the observational marginal of x_j.
        return (0..1usize << m)
            .filter(|s| s >> j & 1 == 1)
            .map(|s| joint[s])
            .sum();
    }
    let mut total = 0.0;
    for z_assign in 0..1usize << z.len() {
        let matches = |s: usize| {
            z.iter()
                .enumerate()
                .all(|(bit, &zv)| (s >> zv & 1) == (z_assign >> bit & 1))
        };
        let p_z: f64 = (0..1usize << m).filter(|&s| matches(s)).map(|s| joint[s]).sum();
        let p_ivz: f64 = (0..1usize << m)
            .filter(|&s| matches(s) && s >> i & 1 == v)
            .map(|s| joint[s])
            .sum();
        let p_jivz: f64 = (0..1usize << m)
            .filter(|&s| matches(s) && s >> i & 1 == v && s >> j & 1 == 1)
            .map(|s| joint[s])
            .sum();
        total += p_z * (p_jivz / p_ivz);
    }
    total
}

/// Distribution-level intervention-distance oracle: a pair (i, j) counts
/// when the parent-adjusted estimate disagrees with the true interventional
/// marginal on any of several generic parameterizations.
fn sid_oracle(truth: &CausalGraph, estimate: &CausalGraph, rng: &mut causal_hrl::rng::Rng) -> usize {
    let m = truth.len();
    let mut wrong = vec![false; m * m];
    for _draw in 0..3 {
        let cpts = random_cpts(truth, rng);
        let obs = joint(truth, &cpts);
        for i in 0..m {
            let z = estimate.parents(i);
            for j in 0..m {
                if i == j || wrong[i * m + j] {
                    continue;
                }
                for v in 0..2 {
                    let claim = adjustment_estimate(&obs, m, i, v, j, &z);
                    let actual = do_marginal(truth, &cpts, i, v, j);
                    if (claim - actual).abs() > 1e-9 {
                        wrong[i * m + j] = true;
                        break;
                    }
                }
            }
        }
    }
    wrong.iter().filter(|&&w| w).count()
}

fn all_dags(m: usize) -> Vec<CausalGraph> {
    let slots: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::new();
    for mask in 0..1usize << slots.len() {
        let mut g = CausalGraph::empty(m);
        for (bit, &(i, j)) in slots.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                g.set_edge(i, j, true);
            }
        }
        if g.is_acyclic() {
            out.push(g);
        }
    }
    out
}

fn random_dag(m: usize, rng: &mut causal_hrl::rng::Rng) -> CausalGraph {
    let mut order: Vec<usize> = (0..m).collect();
    for k in (1..m).rev() {
        order.swap(k, rng.gen_range(0..=k));
    }
    let mut g = CausalGraph::empty(m);
    for a in 0..m {
        for b in a + 1..m {
            if rng.gen_bool(0.4) {
                g.set_edge(order[b], order[a], true);
            }
        }
    }
    g
}

#[test]
fn acceptance_metric_oracles() {
    // Hamming distance against a naive double loop on 1000 random pairs.
    let mut rng = stream(70, "acc-shd");
    let mut shd_ok = true;
    for _ in 0..1000 {
        let m = rng.gen_range(1..7);
        let mut a = CausalGraph::empty(m);
        let mut b = CausalGraph::empty(m);
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    a.set_edge(i, j, rng.gen_bool(0.4));
                    b.set_edge(i, j, rng.gen_bool(0.4));
                }
            }
        }
        let mut naive = 0;
        for i in 0..m {
            for j in 0..m {
                if i != j && a.has_edge(i, j) != b.has_edge(i, j) {
                    naive += 1;
                }
            }
        }
        shd_ok &= shd(&a, &b).unwrap() == naive;
    }

    // Intervention distance against the distribution-level oracle:
    // exhaustively on all 3-variable DAG pairs, then 200 random 4-variable
    // pairs.
    let mut rng = stream(71, "acc-sid");
    let dags3 = all_dags(3);
    assert_eq!(dags3.len(), 25);
    let mut sid_ok = true;
    let mut compared = 0;
    for truth in &dags3 {
        for estimate in &dags3 {
            let fast = sid(truth, estimate).unwrap();
            let slow = sid_oracle(truth, estimate, &mut rng);
            if fast != slow {
                sid_ok = false;
                eprintln!("sid mismatch m=3: {:?} vs {:?}: {fast} != {slow}", truth.edges(), estimate.edges());
            }
            compared += 1;
        }
    }
    for _ in 0..200 {
        let truth = random_dag(4, &mut rng);
        let estimate = random_dag(4, &mut rng);
        let fast = sid(&truth, &estimate).unwrap();
        let slow = sid_oracle(&truth, &estimate, &mut rng);
        if fast != slow {
            sid_ok = false;
            eprintln!("sid mismatch m=4: {:?} vs {:?}: {fast} != {slow}", truth.edges(), estimate.edges());
        }
        compared += 1;
    }

    // Relabeled rewards re-validate against the goal-reaching function on
    // 10,000 random trajectories.
    let mut rng = stream(72, "acc-her");
    let goals: Vec<Subgoal> = (1..4)
        .flat_map(|v| ChangeKind::ALL.map(|c| Subgoal::new(v, c)))
        .collect();
    let mut her_ok = true;
    for _ in 0..10_000 {
        let len = rng.gen_range(1..6);
        let records: Vec<ReplayTuple> = (0..len)
            .map(|_| {
                let x_t: Vec<usize> = (0..4).map(|_| rng.gen_range(0..3)).collect();
                let x_t1: Vec<usize> = (0..4).map(|_| rng.gen_range(0..3)).collect();
                let goal_id = rng.gen_range(0..goals.len());
                let reward = f64::from(goal_reward(goals[goal_id], &x_t, &x_t1).unwrap());
                ReplayTuple {
                    x_t,
                    goal_id,
                    action_idx: 0,
                    reward,
                    x_t1,
                    done: false,
                }
            })
            .collect();
        let out = her_relabel(&records, &goals).unwrap();
        for t in &out {
            her_ok &=
                t.reward == f64::from(goal_reward(goals[t.goal_id], &t.x_t, &t.x_t1).unwrap());
        }
    }

    let pass = shd_ok && sid_ok && her_ok;
    println!(
        "[acceptance] metric oracles: {} (shd exact on 1000, sid exact on {compared} pairs, her exact on 10000)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass);
}

// ---------------------------------------------------------------------------
// Determinism
// ---------------------------------------------------------------------------

#[test]
fn acceptance_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let mut base = recovery_profile(2, 11);
    base.scm.t_outer = 3;
    base.scm.fs = 60;
    base.scm.qs = 15;
    base.hrl.t_goal = 800;
    base.driver.adaptation_steps = 1500;
    base.driver.samples_per_var = 96;

    let mut first = base.clone();
    first.out_dir = tmp.path().join("a");
    let mut second = base.clone();
    second.out_dir = tmp.path().join("b");
    cli_run(&first).unwrap();
    cli_run(&second).unwrap();
    let a = std::fs::read_to_string(tmp.path().join("a/metrics.csv")).unwrap();
    let b = std::fs::read_to_string(tmp.path().join("b/metrics.csv")).unwrap();
    let pass = strip_wall_clock(&a) == strip_wall_clock(&b) && a.lines().count() >= 2;
    println!(
        "[acceptance] determinism: {} ({} rows byte-identical modulo wall clock)",
        if pass { "PASS" } else { "FAIL" },
        a.lines().count() - 1
    );
    assert!(pass, "metrics.csv differs:\n{a}\nvs\n{b}");
}

// ---------------------------------------------------------------------------
// Hyperparameter fidelity
// ---------------------------------------------------------------------------

#[test]
fn acceptance_default_config_values() {
    let json = RunConfig::default().to_json_value();
    let checks: Vec<(&str, serde_json::Value)> = vec![
        ("hrl/epsilon", 0.05.into()),
        ("hrl/batch", 128.into()),
        ("scm/batch", 256.into()),
        ("scm/T", 50.into()),
        ("scm/Fs", 1000.into()),
        ("scm/Qs", 100.into()),
        ("scm/K", 25.into()),
        ("scm/lr_theta", 5e-3.into()),
        ("scm/lr_eta", 5e-2.into()),
        ("hrl/lr", 1e-4.into()),
        ("hrl/gamma_goal", 0.9.into()),
        ("scm/edge_threshold", 0.8.into()),
        ("hrl/phi_controllable", 0.6.into()),
        ("hrl/T_goal", 10_000.into()),
    ];
    let mut pass = true;
    for (path, expected) in &checks {
        let got = json.pointer(&format!("/{path}")).cloned();
        if got.as_ref() != Some(expected) {
            pass = false;
            eprintln!("default mismatch at {path}: {got:?} != {expected:?}");
        }
    }
    println!(
        "[acceptance] default hyperparameters: {} ({} values checked)",
        if pass { "PASS" } else { "FAIL" },
        checks.len()
    );
    assert!(pass);
}
