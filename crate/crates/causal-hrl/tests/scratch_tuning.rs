// Temporary tuning scaffold; run with `cargo test --test scratch_tuning -- --ignored --nocapture`.

use causal_hrl::config::{EnvConfig, RunConfig};
use causal_hrl::driver::run_pretraining;
use causal_hrl::scm::shd;
use causal_hrl::worlds::ChainCraftConfig;

fn desk_config(m_chain: usize, seed: u64) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.env = EnvConfig::Chaincraft(ChainCraftConfig {
        m_chain,
        episode_length: 8,
        ..Default::default()
    });
    cfg.seed = seed;
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
    cfg
}

#[test]
#[ignore]
fn sweep_chain4() {
    let mut fails = 0;
    for seed in 1..=10u64 {
        let t0 = std::time::Instant::now();
        let mut cfg = desk_config(4, seed);
        cfg.env = EnvConfig::Chaincraft(ChainCraftConfig {
            m_chain: 4,
            episode_length: 8,
            ..Default::default()
        });
        let out = run_pretraining(&cfg).unwrap();
        let world = causal_hrl::driver::make_world(&cfg).unwrap();
        let truth = world.ground_truth_graph();
        let d_shd = shd(&truth, &out.graph).unwrap();
        let d_sid = causal_hrl::scm::sid(&truth, &out.pruned_graph).unwrap();
        let ok = d_shd <= 1 && d_sid <= 2;
        if !ok {
            fails += 1;
        }
        println!(
            "seed {seed}: shd={d_shd} sid={d_sid} iters={} steps={} t={:.1}s edges={:?} {}",
            out.snapshots.len(),
            out.env_steps,
            t0.elapsed().as_secs_f64(),
            out.graph.edges(),
            if ok { "OK" } else { "FAIL" }
        );
    }
    println!("fails: {fails}/10");
}

#[test]
#[ignore]
fn stagger_chain4_hard() {
    // Hard-exploration profile: flat data rarely witnesses deep transitions.
    for seed in 1..=6u64 {
        let mut cfg = desk_config(4, seed);
        cfg.env = EnvConfig::Chaincraft(ChainCraftConfig {
            m_chain: 4,
            episode_length: 8,
            success_prob: 0.4,
            ..Default::default()
        });
        cfg.driver.samples_per_var = 160;
        cfg.scm.eta_decay = 0.10;
        cfg.hrl.t_goal = 4000;
        let t0 = std::time::Instant::now();
        let out = run_pretraining(&cfg).unwrap();
        println!("--- seed {seed} ({:.1}s)", t0.elapsed().as_secs_f64());
        for snap in &out.snapshots {
            println!(
                "  iter {}: s_cc={:?} s_c={:?} edges={:?}",
                snap.iteration, snap.s_cc, snap.s_c, snap.graph.edges()
            );
        }
        for e in &out.events {
            if let causal_hrl::driver::LoopEvent::GoalEvaluated { iteration, goal, ratio, .. } = e {
                if ratio > &0.0 {
                    println!("  eval iter {iteration}: var{} {:?} -> {ratio:.2}", goal.var, goal.change);
                }
            }
        }
    }
}

#[test]
#[ignore]
fn trace_chain3() {
    let t0 = std::time::Instant::now();
    let cfg = desk_config(3, 1);
    let out = run_pretraining(&cfg).unwrap();
    let world = causal_hrl::driver::make_world(&cfg).unwrap();
    let truth = world.ground_truth_graph();
    for snap in &out.snapshots {
        println!(
            "iter {}: s_iv={:?} s_cc={:?} s_c={:?} edges={:?} shd={} nll={:.3} steps={} success={:.2}",
            snap.iteration,
            snap.s_iv,
            snap.s_cc,
            snap.s_c,
            snap.graph.edges(),
            shd(&truth, &snap.graph).unwrap(),
            snap.mean_nll,
            snap.env_steps,
            snap.mean_subgoal_success,
        );
    }
    println!(
        "final shd = {}, elapsed = {:.1}s, env steps = {}",
        shd(&truth, &out.graph).unwrap(),
        t0.elapsed().as_secs_f64(),
        out.env_steps
    );
    for e in &out.events {
        if let causal_hrl::driver::LoopEvent::GoalEvaluated { iteration, goal, ratio, .. } = e {
            println!("  eval iter {iteration}: {goal:?} -> {ratio:.2}");
        }
    }
}
