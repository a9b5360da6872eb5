//! Two-phase learning of the structural causal model.
//!
//! Function phase: configurations are drawn edge-wise from `Ber(sigma(eta))`
//! and every variable's generating net takes one masked-likelihood Adam step
//! on pooled intervention data. Structure phase: for each intervened cause
//! column, per-draw batch likelihoods are turned into normalized weights and
//! the score-function gradient moves `eta` toward configurations that explain
//! the data better. Only columns whose cause variable has intervention data
//! are ever updated, so edges from unintervened variables are never asserted.

use std::collections::BTreeSet;

use rand::Rng as _;

use super::graph::CausalGraph;
use super::{InterventionDataset, StepPair};
use crate::env::{EnvVarSchema, VarId, VarVector};
use crate::error::{Error, Result};
use crate::numeric::{adam_step, AdamState, DenseNet, Head, Target};
use crate::rng::Rng;

/// Discovery hyperparameters. JSON keys use the conventional short symbols.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ScmHyper {
    /// Outer iterations of (function phase, structure phase).
    #[serde(rename = "T")]
    pub t_outer: usize,
    /// Function-learning steps per outer iteration.
    #[serde(rename = "Fs")]
    pub fs: usize,
    /// Structure-learning steps per outer iteration.
    #[serde(rename = "Qs")]
    pub qs: usize,
    /// Configuration draws per structure-gradient estimate.
    #[serde(rename = "K")]
    pub k_draws: usize,
    pub batch: usize,
    pub edge_threshold: f64,
    pub lr_theta: f64,
    pub lr_eta: f64,
    /// Hidden width of the 3-layer generating nets.
    pub hidden: usize,
    /// Sparsity pull on the structural parameters: persistent likelihood
    /// noise on stochastic variables must out-pull this to assert an edge.
    pub eta_decay: f64,
}

impl Default for ScmHyper {
    fn default() -> Self {
        Self {
            t_outer: 50,
            fs: 1000,
            qs: 100,
            k_draws: 25,
            batch: 256,
            edge_threshold: 0.8,
            lr_theta: 5e-3,
            lr_eta: 5e-2,
            hidden: 128,
            eta_decay: 0.05,
        }
    }
}

impl ScmHyper {
    pub fn validate(&self) -> Result<()> {
        if self.t_outer == 0
            || self.fs == 0
            || self.qs == 0
            || self.k_draws < 2
            || self.batch == 0
            || self.hidden == 0
        {
            return Err(Error::Config("scm step counts must be positive".into()));
        }
        if !(self.edge_threshold > 0.5 && self.edge_threshold < 1.0) {
            return Err(Error::Config(format!(
                "edge threshold {} must lie in (0.5, 1)",
                self.edge_threshold
            )));
        }
        if self.lr_theta <= 0.0 || self.lr_eta <= 0.0 {
            return Err(Error::Config("learning rates must be positive".into()));
        }
        if self.eta_decay < 0.0 {
            return Err(Error::Config("eta_decay must be non-negative".into()));
        }
        Ok(())
    }
}

/// A sampled binary adjacency hypothesis. The diagonal is always on: every
/// variable's previous value stays an input of its own generating function,
/// and self edges are never reported.
#[derive(Debug, Clone)]
pub struct Configuration {
    m: usize,
    entries: Vec<bool>,
}

impl Configuration {
    pub fn get(&self, effect: VarId, cause: VarId) -> bool {
        self.entries[effect * self.m + cause]
    }

    pub fn row(&self, effect: VarId) -> impl Fn(VarId) -> bool + '_ {
        move |cause| self.entries[effect * self.m + cause]
    }
}

/// Draws each off-diagonal entry independently from `Ber(sigma(eta_ij))`.
pub fn sample_configuration(eta: &[Vec<f64>], rng: &mut Rng) -> Configuration {
    let m = eta.len();
    let mut entries = vec![false; m * m];
    for i in 0..m {
        for j in 0..m {
            entries[i * m + j] = if i == j {
                true
            } else {
                rng.gen_bool(sigmoid(eta[i][j]))
            };
        }
    }
    Configuration { m, entries }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Thresholds the soft adjacency into a reported graph. Only edges whose
/// cause sits in `allowed_causes` may be asserted.
pub fn threshold_graph(
    sigma: &[Vec<f64>],
    threshold: f64,
    allowed_causes: &BTreeSet<VarId>,
) -> CausalGraph {
    let m = sigma.len();
    let mut g = CausalGraph::empty(m);
    for i in 0..m {
        for j in 0..m {
            if i != j && allowed_causes.contains(&j) && sigma[i][j] > threshold {
                g.set_edge(i, j, true);
            }
        }
    }
    g
}

#[derive(Debug, Clone, Default)]
pub struct DiscoveryDiagnostics {
    /// Structure updates skipped because a batch likelihood was not finite.
    pub skipped_updates: u64,
    /// Function phases skipped because no intervention data was available.
    pub empty_data_steps: u64,
}

#[derive(Debug, Clone)]
pub struct DiscoveryResult {
    pub graph: CausalGraph,
    pub sigma: Vec<Vec<f64>>,
    pub mean_nll: f64,
    pub diagnostics: DiscoveryDiagnostics,
}

/// Structural parameters (soft adjacency) plus one generating net per
/// variable. Persists across driver iterations.
pub struct ScmParams {
    schema: EnvVarSchema,
    eta: Vec<Vec<f64>>,
    thetas: Vec<DenseNet>,
    adam: Vec<AdamState>,
    diagnostics: DiscoveryDiagnostics,
}

impl ScmParams {
    pub fn new(schema: &EnvVarSchema, hyper: &ScmHyper, rng: &mut Rng) -> Result<Self> {
        hyper.validate()?;
        let m = schema.len();
        let input = schema.onehot_width();
        let mut thetas = Vec::with_capacity(m);
        let mut adam = Vec::with_capacity(m);
        for v in 0..m {
            let dims = [input, hyper.hidden, hyper.hidden, schema.cardinality(v)];
            let net = DenseNet::new(&dims, Head::Softmax, rng)?;
            adam.push(AdamState::new(&net));
            thetas.push(net);
        }
        Ok(Self {
            schema: schema.clone(),
            eta: vec![vec![0.0; m]; m],
            thetas,
            adam,
            diagnostics: DiscoveryDiagnostics::default(),
        })
    }

    pub fn schema(&self) -> &EnvVarSchema {
        &self.schema
    }

    pub fn eta(&self) -> &[Vec<f64>] {
        &self.eta
    }

    pub fn sigma(&self) -> Vec<Vec<f64>> {
        self.eta
            .iter()
            .map(|row| row.iter().map(|&v| sigmoid(v)).collect())
            .collect()
    }

    pub fn theta(&self, var: VarId) -> &DenseNet {
        &self.thetas[var]
    }

    /// Distribution of variable `i` at the next step given `x_t`, with every
    /// one-hot block other than `i` itself and its hypothesised parents
    /// zeroed before the forward pass.
    pub fn predict_var(
        &self,
        i: VarId,
        config: &Configuration,
        x_t: &VarVector,
    ) -> Result<Vec<f64>> {
        let input = self.schema.encode_masked(x_t, config.row(i));
        self.thetas[i].forward(&input)
    }

    /// One function-learning pass: every variable's net takes one Adam step
    /// on a batch drawn from the pooled intervention data. Returns the mean
    /// NLL across variables, or `None` when no data exists for `s_iv`.
    pub fn function_learning_step(
        &mut self,
        hyper: &ScmHyper,
        data: &InterventionDataset,
        s_iv: &BTreeSet<VarId>,
        rng: &mut Rng,
    ) -> Result<Option<f64>> {
        if s_iv.iter().all(|&v| data.get(v).is_empty()) {
            self.diagnostics.empty_data_steps += 1;
            return Ok(None);
        }
        let pooled = data.pooled_train();
        let m = self.schema.len();
        let mut nll_sum = 0.0;
        for i in 0..m {
            let config = sample_configuration(&self.eta, rng);
            let keep = config.row(i);
            let batch: Vec<(Vec<f64>, Target)> = (0..hyper.batch)
                .map(|_| {
                    let pair = pooled[rng.gen_range(0..pooled.len())];
                    (
                        self.schema.encode_masked(&pair.x_t, &keep),
                        Target::Class(pair.x_t1[i]),
                    )
                })
                .collect();
            let (grads, loss) = self.thetas[i].backward_with_loss(&batch)?;
            adam_step(&mut self.thetas[i], &grads, &mut self.adam[i], hyper.lr_theta);
            nll_sum += loss;
        }
        Ok(Some(nll_sum / m as f64))
    }

    /// One structure-learning pass over every cause column in `s_iv`,
    /// using only that variable's intervention data.
    pub fn structure_learning_step(
        &mut self,
        hyper: &ScmHyper,
        data: &InterventionDataset,
        s_iv: &BTreeSet<VarId>,
        rng: &mut Rng,
    ) -> Result<()> {
        let m = self.schema.len();
        let action_var = self.schema.action_var();
        for &j in s_iv {
            // The action is randomized in every dataset (set-point follow-ups
            // take uniform actions), so its column may draw on all of them;
            // any other cause is only intervened in its own dataset.
            let pooled_action;
            let pairs: Vec<&StepPair> = if j == action_var {
                pooled_action = data.pooled_holdout();
                pooled_action
            } else {
                data.holdout_slice(j).iter().collect()
            };
            if pairs.is_empty() {
                continue;
            }
            let batch: Vec<&StepPair> = (0..hyper.batch)
                .map(|_| pairs[rng.gen_range(0..pairs.len())])
                .collect();
            // Per draw k and effect row i: total batch NLL and the sampled
            // state of edge (i, j).
            let k = hyper.k_draws;
            let mut nll = vec![vec![0.0f64; k]; m];
            let mut edge_state = vec![vec![false; k]; m];
            for draw in 0..k {
                let config = sample_configuration(&self.eta, rng);
                for i in 0..m {
                    edge_state[i][draw] = config.get(i, j);
                    let keep = config.row(i);
                    let mut total = 0.0;
                    for pair in &batch {
                        let input = self.schema.encode_masked(&pair.x_t, &keep);
                        let probs = self.thetas[i].forward(&input)?;
                        total += crate::numeric::nll(&probs, pair.x_t1[i])?;
                    }
                    nll[i][draw] = total;
                }
            }
            for i in 0..m {
                if i == j {
                    continue;
                }
                if nll[i].iter().any(|v| !v.is_finite()) {
                    self.diagnostics.skipped_updates += 1;
                    continue;
                }
                let weights = normalized_likelihood_weights(&nll[i]);
                let p = sigmoid(self.eta[i][j]);
                let g: f64 = weights
                    .iter()
                    .zip(edge_state[i].iter())
                    .map(|(&w, &c)| (p - f64::from(u8::from(c))) * w)
                    .sum();
                self.eta[i][j] -= hyper.lr_eta * (g + hyper.eta_decay * self.eta[i][j]);
            }
        }
        Ok(())
    }

    /// Runs `t_outer` iterations of (fs function steps, qs structure steps)
    /// and thresholds the result. Never fails on poor convergence; the raw
    /// soft adjacency is part of the result for inspection.
    pub fn discover(
        &mut self,
        hyper: &ScmHyper,
        data: &InterventionDataset,
        s_iv: &BTreeSet<VarId>,
        rng: &mut Rng,
    ) -> Result<DiscoveryResult> {
        let mut last_nll = f64::NAN;
        for _ in 0..hyper.t_outer {
            for _ in 0..hyper.fs {
                if let Some(nll) = self.function_learning_step(hyper, data, s_iv, rng)? {
                    last_nll = nll;
                }
            }
            for _ in 0..hyper.qs {
                self.structure_learning_step(hyper, data, s_iv, rng)?;
            }
        }
        let sigma = self.sigma();
        Ok(DiscoveryResult {
            graph: threshold_graph(&sigma, hyper.edge_threshold, s_iv),
            sigma,
            mean_nll: last_nll,
            diagnostics: self.diagnostics.clone(),
        })
    }
}

/// Softmax of the negated batch NLLs across draws, max-shifted for stability.
fn normalized_likelihood_weights(nll: &[f64]) -> Vec<f64> {
    let best = nll.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut weights: Vec<f64> = nll.iter().map(|&v| (best - v).exp()).collect();
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
    }
    weights
}
