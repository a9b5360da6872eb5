//! Per-iteration metrics rows and their CSV schema.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub const METRICS_HEADER: &str =
    "iteration,env_steps,shd,sid,n_controllable,mean_subgoal_success,m0,m1,m2,m3,m4,wall_clock_s";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsRow {
    pub iteration: usize,
    pub env_steps: u64,
    pub shd: usize,
    pub sid: usize,
    pub n_controllable: usize,
    pub mean_subgoal_success: f64,
    pub milestones: [u64; 5],
    /// Informational only; excluded from determinism comparisons.
    pub wall_clock_s: f64,
}

impl MetricsRow {
    pub fn to_csv_line(&self) -> String {
        let mut line = String::new();
        write!(
            line,
            "{},{},{},{},{},{:.4}",
            self.iteration,
            self.env_steps,
            self.shd,
            self.sid,
            self.n_controllable,
            self.mean_subgoal_success
        )
        .unwrap();
        for m in self.milestones {
            write!(line, ",{m}").unwrap();
        }
        write!(line, ",{:.3}", self.wall_clock_s).unwrap();
        line
    }
}

pub fn to_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}

/// Strips the wall-clock column, for byte-identity comparisons.
pub fn strip_wall_clock(csv: &str) -> String {
    csv.lines()
        .map(|line| match line.rfind(',') {
            Some(idx) => &line[..idx],
            None => line,
        })
        .collect::<Vec<_>>()
        .join("\n")
}
