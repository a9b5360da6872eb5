//! Run orchestration and artifact export: everything the CLI exposes, as
//! library functions so tests can drive them directly.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{AblationMode, RunConfig};
use crate::driver::{
    eval_milestones, make_world, run_adaptation, run_pretraining, AdaptationOutput,
    PretrainOutput, TaskPolicy,
};
use crate::env::VarKind;
use crate::error::{Error, Result};
use crate::hrl::SubgoalHierarchy;
use crate::intervention::write_jsonl;
use crate::metrics::{to_csv, MetricsRow};
use crate::scm::{shd, sid, CausalGraph, GraphFile};

/// Frozen policies persisted for later evaluation.
#[derive(Serialize, Deserialize)]
pub struct PolicyArtifact {
    pub hierarchy: SubgoalHierarchy,
    pub task: TaskPolicy,
}

pub struct RunArtifacts {
    pub out_dir: PathBuf,
    pub pretrain: PretrainOutput,
    pub adaptation: AdaptationOutput,
    pub rows: Vec<MetricsRow>,
    pub truth: CausalGraph,
    pub config_echo: serde_json::Value,
}

fn names_of(config: &RunConfig) -> Result<Vec<String>> {
    Ok(make_world(config)?.schema().names())
}

fn metrics_rows(
    config: &RunConfig,
    pretrain: &PretrainOutput,
    truth: &CausalGraph,
) -> Result<Vec<MetricsRow>> {
    let mut rows = Vec::new();
    for snap in &pretrain.snapshots {
        rows.push(MetricsRow {
            iteration: snap.iteration,
            env_steps: snap.env_steps,
            shd: shd(truth, &snap.graph)?,
            sid: sid(truth, &snap.pruned_graph)?,
            n_controllable: snap.s_iv.len().saturating_sub(1),
            mean_subgoal_success: snap.mean_subgoal_success,
            milestones: snap.milestone_counts,
            wall_clock_s: snap.wall_clock_s,
        });
    }
    if rows.is_empty() {
        // Flat or zero-iteration runs still emit one row describing the
        // untrained state.
        let empty = CausalGraph::empty(truth.len());
        rows.push(MetricsRow {
            iteration: 0,
            env_steps: pretrain.env_steps,
            shd: shd(truth, &empty)?,
            sid: sid(truth, &empty)?,
            n_controllable: 0,
            mean_subgoal_success: 0.0,
            milestones: pretrain.milestone_counts,
            wall_clock_s: 0.0,
        });
    }
    let _ = config;
    Ok(rows)
}

/// Full run: pretraining, adaptation, and every artifact file.
pub fn cli_run(config: &RunConfig) -> Result<RunArtifacts> {
    config.validate()?;
    let out = config.out_dir.clone();
    fs::create_dir_all(&out)?;

    // Echo the fully-resolved configuration, including the dropout choice.
    let mut resolved = config.clone();
    {
        let base = config.env.build(config.seed)?;
        let hidden = config.resolved_hidden_vars(base.schema())?;
        if resolved.ablation.mode == AblationMode::EvDropout {
            resolved.ablation.dropped_vars = Some(hidden);
        }
    }
    let config_echo = resolved.to_json_value();
    fs::write(
        out.join("config-echo.json"),
        serde_json::to_string_pretty(&config_echo)?,
    )?;

    let pretrain = if resolved.driver.flat_baseline {
        let mut zero_iter = resolved.clone();
        zero_iter.driver.max_iterations = Some(0);
        run_pretraining(&zero_iter)?
    } else {
        run_pretraining(&resolved)?
    };
    let truth = make_world(&resolved)?.ground_truth_graph();
    let names = names_of(&resolved)?;

    let rows = metrics_rows(&resolved, &pretrain, &truth)?;
    fs::write(out.join("metrics.csv"), to_csv(&rows))?;

    for snap in &pretrain.snapshots {
        let file = GraphFile::new(&snap.graph, names.clone(), snap.sigma.clone());
        fs::write(
            out.join(format!("graph-iter{}.json", snap.iteration)),
            serde_json::to_string_pretty(&file)?,
        )?;
        fs::write(
            out.join(format!("graph-iter{}.dot", snap.iteration)),
            snap.graph.to_dot(&names),
        )?;
        let mut jsonl = Vec::new();
        write_jsonl(&snap.dataset, &mut jsonl)?;
        fs::write(
            out.join(format!("interventions-iter{}.jsonl", snap.iteration)),
            jsonl,
        )?;
    }

    let final_file = GraphFile::new(&pretrain.graph, names.clone(), pretrain.sigma.clone());
    fs::write(out.join("graph.json"), serde_json::to_string_pretty(&final_file)?)?;
    fs::write(out.join("graph.dot"), pretrain.graph.to_dot(&names))?;
    let truth_file = GraphFile::from_truth(&truth, names.clone());
    fs::write(out.join("truth.json"), serde_json::to_string_pretty(&truth_file)?)?;
    fs::write(
        out.join("hierarchy.json"),
        serde_json::to_string_pretty(&pretrain.hierarchy.to_json())?,
    )?;
    fs::write(
        out.join("events.json"),
        serde_json::to_string_pretty(&pretrain.events)?,
    )?;

    let adaptation = run_adaptation(&resolved, &pretrain.hierarchy, resolved.driver.adaptation_steps)?;
    let mut adapt_csv = String::from("episode,env_steps,reward,milestones\n");
    for ep in &adaptation.episodes {
        adapt_csv.push_str(&format!(
            "{},{},{},{:05b}\n",
            ep.episode, ep.env_steps, ep.reward, ep.milestones
        ));
    }
    fs::write(out.join("adaptation.csv"), adapt_csv)?;

    let artifact = PolicyArtifact {
        hierarchy: pretrain.hierarchy.clone(),
        task: adaptation.policy.clone(),
    };
    fs::write(out.join("policy.json"), serde_json::to_string(&artifact)?)?;

    Ok(RunArtifacts {
        out_dir: out,
        pretrain,
        adaptation,
        rows,
        truth,
        config_echo,
    })
}

pub struct AblationPair {
    pub policy_rows: Vec<MetricsRow>,
    pub random_rows: Vec<MetricsRow>,
    pub csv_path: PathBuf,
}

/// Two matched pretrainings sharing the seed: subgoal-driven intervention
/// data versus uniform-random-action data.
pub fn cli_ablate_random_intervention(config: &RunConfig) -> Result<AblationPair> {
    config.validate()?;
    let out = config.out_dir.clone();
    fs::create_dir_all(&out)?;

    let mut policy_cfg = config.clone();
    policy_cfg.ablation.mode = AblationMode::None;
    policy_cfg.out_dir = out.join("policy-arm");
    let mut random_cfg = config.clone();
    random_cfg.ablation.mode = AblationMode::RandomIntervention;
    random_cfg.out_dir = out.join("random-arm");

    let truth = make_world(&policy_cfg)?.ground_truth_graph();
    let policy_out = run_pretraining(&policy_cfg)?;
    let random_out = run_pretraining(&random_cfg)?;
    let policy_rows = metrics_rows(&policy_cfg, &policy_out, &truth)?;
    let random_rows = metrics_rows(&random_cfg, &random_out, &truth)?;

    let mut csv = String::from("iteration,shd_policy,shd_random,sid_policy,sid_random\n");
    let len = policy_rows.len().max(random_rows.len());
    // A stopped arm keeps reporting its final graph.
    let at = |rows: &[MetricsRow], i: usize| rows[i.min(rows.len() - 1)].clone();
    for i in 0..len {
        let p = at(&policy_rows, i);
        let r = at(&random_rows, i);
        csv.push_str(&format!("{},{},{},{},{}\n", i, p.shd, r.shd, p.sid, r.sid));
    }
    let csv_path = out.join("ablation.csv");
    fs::write(&csv_path, csv)?;
    Ok(AblationPair {
        policy_rows,
        random_rows,
        csv_path,
    })
}

pub struct DropoutOutcome {
    pub artifacts: RunArtifacts,
    pub hidden: Vec<usize>,
    pub final_milestone_hidden: bool,
}

/// Hides a ratio of effective variables (or an explicit list) and runs the
/// full pipeline on the projected schema.
pub fn cli_ablate_ev_dropout(config: &RunConfig, ratio: f64) -> Result<DropoutOutcome> {
    let mut cfg = config.clone();
    cfg.ablation.mode = AblationMode::EvDropout;
    cfg.ablation.dropout_ratio = ratio;
    cfg.validate()?;
    let base = cfg.env.build(cfg.seed)?;
    let hidden = cfg.resolved_hidden_vars(base.schema())?;
    // The deepest item variable carries the final milestone; hiding it keeps
    // the run legal but the task signal disappears from the agent's view.
    let final_var = base
        .schema()
        .vars()
        .iter()
        .filter(|v| v.kind == VarKind::Item)
        .map(|v| v.id)
        .max();
    let final_milestone_hidden = final_var.is_some_and(|v| hidden.contains(&v));
    if final_milestone_hidden {
        eprintln!(
            "{}",
            serde_json::json!({
                "warning": "dropout hides the final-milestone variable",
                "hidden": hidden,
            })
        );
    }
    cfg.ablation.dropped_vars = Some(hidden.clone());
    let artifacts = cli_run(&cfg)?;
    Ok(DropoutOutcome {
        artifacts,
        hidden,
        final_milestone_hidden,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphChoice {
    Truth,
    Learned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Json,
}

/// Re-exports a stored graph; DOT omits isolated nodes, JSON keeps all.
pub fn cli_export_graph(
    run_dir: &Path,
    which: GraphChoice,
    format: ExportFormat,
) -> Result<PathBuf> {
    let (src, stem) = match which {
        GraphChoice::Truth => (run_dir.join("truth.json"), "truth"),
        GraphChoice::Learned => (run_dir.join("graph.json"), "learned"),
    };
    if !src.exists() {
        return Err(Error::MissingArtifact(src.display().to_string()));
    }
    let file: GraphFile = serde_json::from_str(&fs::read_to_string(&src)?)?;
    let graph = file.graph()?;
    let dest = match format {
        ExportFormat::Json => {
            let path = run_dir.join(format!("export-{stem}.json"));
            fs::write(&path, serde_json::to_string_pretty(&file)?)?;
            path
        }
        ExportFormat::Dot => {
            let path = run_dir.join(format!("export-{stem}.dot"));
            fs::write(&path, graph.to_dot(&file.names))?;
            path
        }
    };
    Ok(dest)
}

/// Loads the stored policies and counts milestone achievements over greedy
/// episodes.
pub fn cli_eval_milestones(run_dir: &Path, episodes: u64) -> Result<[u64; 5]> {
    let config_path = run_dir.join("config-echo.json");
    if !config_path.exists() {
        return Err(Error::MissingArtifact(config_path.display().to_string()));
    }
    let config: RunConfig = serde_json::from_str(&fs::read_to_string(config_path)?)?;
    let policy_path = run_dir.join("policy.json");
    if !policy_path.exists() {
        return Err(Error::MissingArtifact(policy_path.display().to_string()));
    }
    let artifact: PolicyArtifact = serde_json::from_str(&fs::read_to_string(policy_path)?)?;
    eval_milestones(&config, &artifact.hierarchy, &artifact.task, episodes)
}
