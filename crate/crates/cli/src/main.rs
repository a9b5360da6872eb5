//! Experiment harness CLI: runs the discovery/training loop on the built-in
//! worlds and manages run artifacts.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use causal_hrl::config::{apply_override, RunConfig};
use causal_hrl::harness::{
    cli_ablate_ev_dropout, cli_ablate_random_intervention, cli_eval_milestones, cli_export_graph,
    cli_run, ExportFormat, GraphChoice,
};

#[derive(Parser)]
#[command(name = "causal-hrl", about = "Causal-graph-guided hierarchical RL experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Path to a JSON run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run seed; overrides the config value.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config value.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Dotted-path config overrides, e.g. `scm.T=5`.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Pretraining plus adaptation with full artifact export.
    Run {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Paired pretrainings: subgoal-driven versus random-action data.
    AblateRandomIntervention {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Hide a ratio of effective variables, then run.
    AblateEvDropout {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        ratio: f64,
    },
    /// Re-export a stored graph.
    ExportGraph {
        /// Run directory holding the artifacts.
        #[arg(long)]
        run_dir: PathBuf,
        #[arg(long, value_enum)]
        which: WhichGraph,
        #[arg(long, value_enum)]
        format: Format,
    },
    /// Greedy milestone counts of a stored task policy.
    EvalMilestones {
        #[arg(long)]
        run_dir: PathBuf,
        #[arg(long, default_value_t = 1000)]
        episodes: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum WhichGraph {
    Truth,
    Learned,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

fn load_config(common: &CommonArgs) -> Result<RunConfig, causal_hrl::Error> {
    let mut value = match &common.config {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        None => RunConfig::default().to_json_value(),
    };
    for spec in &common.overrides {
        apply_override(&mut value, spec)?;
    }
    let mut config = RunConfig::from_json_value(value)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(out) = &common.out {
        config.out_dir = out.clone();
    }
    config.validate()?;
    Ok(config)
}

fn fail(err: impl std::fmt::Display) -> ExitCode {
    eprintln!("{}", serde_json::json!({ "error": err.to_string() }));
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { common } => {
            let config = match load_config(&common) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            match cli_run(&config) {
                Ok(artifacts) => {
                    println!(
                        "{}",
                        serde_json::json!({
                            "out_dir": artifacts.out_dir,
                            "iterations": artifacts.rows.len(),
                            "final_shd": artifacts.rows.last().map(|r| r.shd),
                            "final_sid": artifacts.rows.last().map(|r| r.sid),
                            "env_steps": artifacts.pretrain.env_steps + artifacts.adaptation.env_steps,
                        })
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::AblateRandomIntervention { common } => {
            let config = match load_config(&common) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            match cli_ablate_random_intervention(&config) {
                Ok(pair) => {
                    println!(
                        "{}",
                        serde_json::json!({
                            "csv": pair.csv_path,
                            "policy_iterations": pair.policy_rows.len(),
                            "random_iterations": pair.random_rows.len(),
                        })
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::AblateEvDropout { common, ratio } => {
            let config = match load_config(&common) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            match cli_ablate_ev_dropout(&config, ratio) {
                Ok(outcome) => {
                    println!(
                        "{}",
                        serde_json::json!({
                            "out_dir": outcome.artifacts.out_dir,
                            "hidden": outcome.hidden,
                            "final_milestone_hidden": outcome.final_milestone_hidden,
                        })
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::ExportGraph {
            run_dir,
            which,
            format,
        } => {
            let which = match which {
                WhichGraph::Truth => GraphChoice::Truth,
                WhichGraph::Learned => GraphChoice::Learned,
            };
            let format = match format {
                Format::Dot => ExportFormat::Dot,
                Format::Json => ExportFormat::Json,
            };
            match cli_export_graph(&run_dir, which, format) {
                Ok(path) => {
                    println!("{}", serde_json::json!({ "path": path }));
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::EvalMilestones { run_dir, episodes } => {
            match cli_eval_milestones(&run_dir, episodes) {
                Ok(counts) => {
                    println!(
                        "{}",
                        serde_json::json!({ "episodes": episodes, "milestones": counts })
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
    }
}
