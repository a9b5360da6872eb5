//! Causal-graph-guided subgoal discovery and hierarchical Q-learning.
//!
//! The library alternates between discovering a causal graph over discrete
//! environment variables from interventional data and growing a hierarchy of
//! goal-conditioned policies along that graph. Controllable variables become
//! intervention handles for the next round of discovery; the finished
//! hierarchy then backs a task-level controller. A CLI harness (see the
//! companion binary crate) runs the full loop on built-in crafting worlds and
//! exports graphs, hierarchies, and metrics.

pub mod config;
pub mod driver;
pub mod env;
pub mod error;
pub mod metrics;
pub mod numeric;
pub mod harness;
pub mod hrl;
pub mod intervention;
pub mod rng;
pub mod scm;
pub mod worlds;

pub use error::{Error, Result};
