//! Minimal dense-network kernel shared by the per-variable generating
//! functions and the Q-networks.
//!
//! Fully-connected layers with rectifier hidden activations and either a
//! softmax head (categorical distributions) or a raw linear head (Q-values).
//! Everything is `f64`; gradients come from hand-rolled reverse mode and are
//! checked against central finite differences in the tests.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Probability floor used by [`nll`] so zero-probability targets stay finite.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Head {
    /// Softmax over the last layer; outputs are a probability vector.
    Softmax,
    /// Identity head; outputs are raw values (Q-head).
    Linear,
}

/// Per-sample training target.
#[derive(Debug, Clone, Copy)]
pub enum Target {
    /// Class index under a softmax head; loss is the negative log-likelihood.
    Class(usize),
    /// Regression target for one output under a linear head;
    /// loss is `0.5 * (out[index] - value)^2`.
    Value { index: usize, value: f64 },
}

/// A fully-connected network. `weights[l]` is row-major `dims[l+1] x dims[l]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DenseNet {
    dims: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    head: Head,
}

/// Gradients shaped like a [`DenseNet`]'s parameters.
#[derive(Debug, Clone)]
pub struct Grads {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl DenseNet {
    /// Builds a net with weights drawn uniformly from
    /// `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` and zero biases.
    pub fn new(dims: &[usize], head: Head, rng: &mut Rng) -> Result<Self> {
        if dims.len() < 2 || dims.iter().any(|&d| d == 0) {
            return Err(Error::Config(format!("invalid layer dims {dims:?}")));
        }
        let mut weights = Vec::with_capacity(dims.len() - 1);
        let mut biases = Vec::with_capacity(dims.len() - 1);
        for l in 0..dims.len() - 1 {
            let (fan_in, fan_out) = (dims[l], dims[l + 1]);
            let limit = 1.0 / (fan_in as f64).sqrt();
            let w = (0..fan_in * fan_out)
                .map(|_| rng.gen_range(-limit..=limit))
                .collect();
            weights.push(w);
            biases.push(vec![0.0; fan_out]);
        }
        Ok(Self {
            dims: dims.to_vec(),
            weights,
            biases,
            head,
        })
    }

    pub fn zeroed(dims: &[usize], head: Head) -> Result<Self> {
        if dims.len() < 2 || dims.iter().any(|&d| d == 0) {
            return Err(Error::Config(format!("invalid layer dims {dims:?}")));
        }
        let weights = (0..dims.len() - 1)
            .map(|l| vec![0.0; dims[l] * dims[l + 1]])
            .collect();
        let biases = (0..dims.len() - 1).map(|l| vec![0.0; dims[l + 1]]).collect();
        Ok(Self {
            dims: dims.to_vec(),
            weights,
            biases,
            head,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn head(&self) -> Head {
        self.head
    }

    /// Forward pass; returns probabilities (softmax head) or raw values.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.dims[0] {
            return Err(Error::DimensionMismatch {
                expected: self.dims[0],
                got: input.len(),
            });
        }
        let acts = self.forward_cached(input);
        Ok(acts.into_iter().last().unwrap())
    }

    /// Per-layer post-activation values, input included, head applied last.
    fn forward_cached(&self, input: &[f64]) -> Vec<Vec<f64>> {
        let n_layers = self.weights.len();
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(n_layers + 1);
        acts.push(input.to_vec());
        for l in 0..n_layers {
            let (n_in, n_out) = (self.dims[l], self.dims[l + 1]);
            let mut z = vec![0.0; n_out];
            let x = &acts[l];
            for o in 0..n_out {
                let row = &self.weights[l][o * n_in..(o + 1) * n_in];
                let mut sum = self.biases[l][o];
                for (wv, xv) in row.iter().zip(x.iter()) {
                    sum += wv * xv;
                }
                z[o] = sum;
            }
            let last = l == n_layers - 1;
            if !last {
                for v in &mut z {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            } else if self.head == Head::Softmax {
                z = softmax(&z);
            }
            acts.push(z);
        }
        acts
    }

    /// Mean loss over a batch: NLL for class targets, half squared error for
    /// value targets.
    pub fn batch_loss(&self, batch: &[(Vec<f64>, Target)]) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::Precondition("empty batch".into()));
        }
        let mut total = 0.0;
        for (input, target) in batch {
            let out = self.forward(input)?;
            total += match *target {
                Target::Class(c) => nll(&out, c)?,
                Target::Value { index, value } => {
                    let d = out[index] - value;
                    0.5 * d * d
                }
            };
        }
        Ok(total / batch.len() as f64)
    }

    /// Gradients of the mean batch loss with respect to all parameters.
    pub fn backward(&self, batch: &[(Vec<f64>, Target)]) -> Result<Grads> {
        Ok(self.backward_with_loss(batch)?.0)
    }

    /// Gradients plus the mean batch loss from the same forward passes.
    pub fn backward_with_loss(&self, batch: &[(Vec<f64>, Target)]) -> Result<(Grads, f64)> {
        if batch.is_empty() {
            return Err(Error::Precondition("empty batch".into()));
        }
        let n_layers = self.weights.len();
        let mut grads = Grads {
            weights: self.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: self.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        };
        let scale = 1.0 / batch.len() as f64;
        let mut loss_total = 0.0;
        for (input, target) in batch {
            if input.len() != self.dims[0] {
                return Err(Error::DimensionMismatch {
                    expected: self.dims[0],
                    got: input.len(),
                });
            }
            let acts = self.forward_cached(input);
            let out = &acts[n_layers];
            loss_total += match *target {
                Target::Class(c) if c < out.len() => nll(out, c)?,
                Target::Class(_) => 0.0, // rejected below
                Target::Value { index, value } => {
                    let d = out[index] - value;
                    0.5 * d * d
                }
            };
            // dL/dz for the last layer's pre-activation. For softmax + NLL
            // this is probs - onehot(target); for the linear head only the
            // targeted output carries error.
            let mut delta: Vec<f64> = match *target {
                Target::Class(c) => {
                    if c >= out.len() {
                        return Err(Error::Precondition(format!(
                            "class {c} out of range for {} outputs",
                            out.len()
                        )));
                    }
                    let mut d = out.clone();
                    d[c] -= 1.0;
                    d
                }
                Target::Value { index, value } => {
                    let mut d = vec![0.0; out.len()];
                    d[index] = out[index] - value;
                    d
                }
            };
            for l in (0..n_layers).rev() {
                let (n_in, n_out) = (self.dims[l], self.dims[l + 1]);
                let x = &acts[l];
                for o in 0..n_out {
                    let dz = delta[o] * scale;
                    grads.biases[l][o] += dz;
                    let row = &mut grads.weights[l][o * n_in..(o + 1) * n_in];
                    for (gv, xv) in row.iter_mut().zip(x.iter()) {
                        *gv += dz * xv;
                    }
                }
                if l > 0 {
                    let mut prev = vec![0.0; n_in];
                    for o in 0..n_out {
                        let row = &self.weights[l][o * n_in..(o + 1) * n_in];
                        let d = delta[o];
                        for (pv, wv) in prev.iter_mut().zip(row.iter()) {
                            *pv += d * wv;
                        }
                    }
                    // Rectifier gate of the previous hidden layer.
                    for (pv, av) in prev.iter_mut().zip(acts[l].iter()) {
                        if *av <= 0.0 {
                            *pv = 0.0;
                        }
                    }
                    delta = prev;
                }
            }
        }
        Ok((grads, loss_total / batch.len() as f64))
    }

    /// Compares [`Self::backward`] against central finite differences of the
    /// batch loss; returns the worst relative error over all parameters.
    pub fn grad_check(&self, batch: &[(Vec<f64>, Target)], h: f64) -> Result<f64> {
        if h <= 0.0 {
            return Err(Error::Precondition("step size must be positive".into()));
        }
        let analytic = self.backward(batch)?;
        let mut probe = self.clone();
        let mut worst = 0.0f64;
        for l in 0..self.weights.len() {
            for p in 0..self.weights[l].len() {
                let orig = probe.weights[l][p];
                probe.weights[l][p] = orig + h;
                let up = probe.batch_loss(batch)?;
                probe.weights[l][p] = orig - h;
                let down = probe.batch_loss(batch)?;
                probe.weights[l][p] = orig;
                let numeric = (up - down) / (2.0 * h);
                worst = worst.max(rel_err(analytic.weights[l][p], numeric));
            }
            for p in 0..self.biases[l].len() {
                let orig = probe.biases[l][p];
                probe.biases[l][p] = orig + h;
                let up = probe.batch_loss(batch)?;
                probe.biases[l][p] = orig - h;
                let down = probe.batch_loss(batch)?;
                probe.biases[l][p] = orig;
                let numeric = (up - down) / (2.0 * h);
                worst = worst.max(rel_err(analytic.biases[l][p], numeric));
            }
        }
        Ok(worst)
    }

    /// Appends `extra` zero-initialized input columns. Existing behaviour is
    /// preserved when the new inputs are zero.
    pub fn grow_input(&mut self, extra: usize) {
        if extra == 0 {
            return;
        }
        let old_in = self.dims[0];
        let new_in = old_in + extra;
        let n_out = self.dims[1];
        let mut w = vec![0.0; new_in * n_out];
        for o in 0..n_out {
            w[o * new_in..o * new_in + old_in]
                .copy_from_slice(&self.weights[0][o * old_in..(o + 1) * old_in]);
        }
        self.weights[0] = w;
        self.dims[0] = new_in;
    }

    /// Smallest |pre-activation| over hidden units for the given inputs.
    /// Finite-difference checks are only meaningful away from rectifier
    /// kinks; callers can use this to filter non-generic cases.
    pub fn min_abs_hidden_preactivation(&self, inputs: &[Vec<f64>]) -> f64 {
        let mut min = f64::INFINITY;
        for input in inputs {
            let mut x = input.clone();
            for l in 0..self.weights.len() - 1 {
                let (n_in, n_out) = (self.dims[l], self.dims[l + 1]);
                let mut z = vec![0.0; n_out];
                for o in 0..n_out {
                    let row = &self.weights[l][o * n_in..(o + 1) * n_in];
                    z[o] = self.biases[l][o]
                        + row.iter().zip(x.iter()).map(|(w, v)| w * v).sum::<f64>();
                    min = min.min(z[o].abs());
                }
                for v in &mut z {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
                x = z;
            }
        }
        min
    }

    /// Drops input columns whose `keep` flag is false. Outputs are unchanged
    /// whenever the dropped inputs were zero.
    pub fn retain_inputs(&mut self, keep: &[bool]) -> Result<()> {
        if keep.len() != self.dims[0] {
            return Err(Error::DimensionMismatch {
                expected: self.dims[0],
                got: keep.len(),
            });
        }
        let old_in = self.dims[0];
        let new_in = keep.iter().filter(|&&k| k).count();
        let n_out = self.dims[1];
        let mut w = Vec::with_capacity(new_in * n_out);
        for o in 0..n_out {
            let row = &self.weights[0][o * old_in..(o + 1) * old_in];
            w.extend(row.iter().zip(keep.iter()).filter(|(_, &k)| k).map(|(v, _)| *v));
        }
        self.weights[0] = w;
        self.dims[0] = new_in;
        Ok(())
    }

    /// Appends `extra` zero-initialized output rows.
    pub fn grow_output(&mut self, extra: usize) {
        if extra == 0 {
            return;
        }
        let last = self.weights.len() - 1;
        let n_in = self.dims[last];
        self.weights[last].extend(std::iter::repeat(0.0).take(extra * n_in));
        self.biases[last].extend(std::iter::repeat(0.0).take(extra));
        *self.dims.last_mut().unwrap() += extra;
    }
}

/// Numerically-stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Negative log-likelihood of `target` under `probs`, floored at
/// [`PROB_FLOOR`] so zero-probability targets return a large finite value.
pub fn nll(probs: &[f64], target: usize) -> Result<f64> {
    if target >= probs.len() {
        return Err(Error::Precondition(format!(
            "target {target} out of range for {} classes",
            probs.len()
        )));
    }
    Ok(-probs[target].max(PROB_FLOOR).ln())
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Adam moments shaped like a [`DenseNet`]'s parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdamState {
    m_w: Vec<Vec<f64>>,
    v_w: Vec<Vec<f64>>,
    m_b: Vec<Vec<f64>>,
    v_b: Vec<Vec<f64>>,
    step_count: u64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
}

impl AdamState {
    pub fn new(net: &DenseNet) -> Self {
        Self {
            m_w: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            v_w: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            m_b: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            v_b: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            step_count: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// Grows the moment buffers to match a net whose input/output layers were
    /// extended; new entries start at zero.
    pub fn grow_to_match(&mut self, net: &DenseNet) {
        for l in 0..net.weights.len() {
            // Input growth reshuffles row offsets of layer 0, so rebuild that
            // layer's moments instead of padding; new columns start unseen
            // anyway and old moments for layer 0 are only mildly informative.
            if self.m_w[l].len() != net.weights[l].len() {
                if l == 0 {
                    self.m_w[l] = vec![0.0; net.weights[l].len()];
                    self.v_w[l] = vec![0.0; net.weights[l].len()];
                } else {
                    self.m_w[l].resize(net.weights[l].len(), 0.0);
                    self.v_w[l].resize(net.weights[l].len(), 0.0);
                }
            }
            self.m_b[l].resize(net.biases[l].len(), 0.0);
            self.v_b[l].resize(net.biases[l].len(), 0.0);
        }
    }
}

/// One Adam update with bias correction; increments the step counter.
pub fn adam_step(net: &mut DenseNet, grads: &Grads, state: &mut AdamState, lr: f64) {
    state.step_count += 1;
    let t = state.step_count as i32;
    let (b1, b2, eps) = (state.beta1, state.beta2, state.epsilon);
    let bc1 = 1.0 - b1.powi(t);
    let bc2 = 1.0 - b2.powi(t);
    let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
        for i in 0..p.len() {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    };
    for l in 0..net.weights.len() {
        update(
            &mut net.weights[l],
            &grads.weights[l],
            &mut state.m_w[l],
            &mut state.v_w[l],
        );
        update(
            &mut net.biases[l],
            &grads.biases[l],
            &mut state.m_b[l],
            &mut state.v_b[l],
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn onehot(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    #[test]
    fn zero_net_softmax_is_uniform() {
        let net = DenseNet::zeroed(&[3, 4], Head::Softmax).unwrap();
        let out = net.forward(&[0.3, -1.0, 2.5]).unwrap();
        for p in &out {
            assert!((p - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn single_linear_layer_softmax_matches_hand_eval() {
        // W = [[1,0],[0,0]], b = 0, input = onehot(0) -> softmax([1,0]).
        let mut net = DenseNet::zeroed(&[2, 2], Head::Softmax).unwrap();
        net.weights[0] = vec![1.0, 0.0, 0.0, 0.0];
        let out = net.forward(&[1.0, 0.0]).unwrap();
        let e = 1f64.exp();
        assert!((out[0] - e / (e + 1.0)).abs() < 1e-6);
        assert!((out[1] - 1.0 / (e + 1.0)).abs() < 1e-6);
        assert!((out[0] - 0.7311).abs() < 1e-4);
        assert!((out[1] - 0.2689).abs() < 1e-4);
    }

    #[test]
    fn forward_rejects_bad_input_len() {
        let net = DenseNet::zeroed(&[3, 2], Head::Softmax).unwrap();
        assert!(net.forward(&[1.0]).is_err());
    }

    #[test]
    fn nll_examples() {
        assert_eq!(nll(&[1.0, 0.0], 0).unwrap(), 0.0);
        let u = nll(&[0.25; 4], 2).unwrap();
        assert!((u - 4f64.ln()).abs() < 1e-12);
        assert!((u - 1.3863).abs() < 1e-4);
        let v = nll(&[0.7311, 0.2689], 0).unwrap();
        assert!((v - 0.3133).abs() < 1e-4);
        // Zero-probability target clamps to the floor instead of +inf.
        let w = nll(&[1.0, 0.0], 1).unwrap();
        assert!((w - (-PROB_FLOOR.ln())).abs() < 1e-9);
    }

    #[test]
    fn softmax_nll_logit_gradient_is_probs_minus_onehot() {
        let mut net = DenseNet::zeroed(&[2, 2], Head::Softmax).unwrap();
        net.weights[0] = vec![1.0, 0.0, 0.0, 0.0];
        let batch = vec![(vec![1.0, 0.0], Target::Class(0))];
        let grads = net.backward(&batch).unwrap();
        // d(loss)/d(bias) equals d(loss)/d(logits) for a single sample.
        assert!((grads.biases[0][0] - (-0.2689)).abs() < 1e-4);
        assert!((grads.biases[0][1] - 0.2689).abs() < 1e-4);
    }

    #[test]
    fn zero_net_two_class_gradient_is_symmetric() {
        let net = DenseNet::zeroed(&[2, 2], Head::Softmax).unwrap();
        let batch = vec![(vec![1.0, 0.0], Target::Class(0))];
        let grads = net.backward(&batch).unwrap();
        assert!((grads.biases[0][0] + 0.5).abs() < 1e-12);
        assert!((grads.biases[0][1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn adam_zero_gradient_is_identity_on_params() {
        let mut rng = stream(1, "adam");
        let mut net = DenseNet::new(&[3, 4, 2], Head::Linear, &mut rng).unwrap();
        let before = net.clone();
        let grads = Grads {
            weights: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        };
        let mut st = AdamState::new(&net);
        adam_step(&mut net, &grads, &mut st, 5e-3);
        assert_eq!(st.step_count(), 1);
        assert_eq!(net.weights, before.weights);
        assert_eq!(net.biases, before.biases);
    }

    #[test]
    fn adam_first_step_moves_by_lr_against_gradient_sign() {
        // Scalar parameter, g = 1: bias-corrected first step is -lr.
        let mut net = DenseNet::zeroed(&[1, 1], Head::Linear).unwrap();
        let grads = Grads {
            weights: vec![vec![1.0]],
            biases: vec![vec![0.0]],
        };
        let mut st = AdamState::new(&net);
        adam_step(&mut net, &grads, &mut st, 5e-3);
        assert!((net.weights[0][0] + 5e-3).abs() < 1e-9);
    }

    #[test]
    fn grad_check_linear_net_is_machine_precision() {
        let mut rng = stream(2, "lin");
        // Single affine layer with squared-error head: loss is quadratic in
        // every parameter, so central differences are exact.
        let net = DenseNet::new(&[3, 2], Head::Linear, &mut rng).unwrap();
        let batch = vec![
            (vec![0.2, -0.4, 1.0], Target::Value { index: 0, value: 0.7 }),
            (vec![1.0, 0.3, -0.2], Target::Value { index: 1, value: -0.3 }),
        ];
        let err = net.grad_check(&batch, 1e-5).unwrap();
        assert!(err < 1e-8, "relative error {err}");
    }

    #[test]
    fn grad_check_three_layer_softmax_net() {
        let mut rng = stream(3, "soft");
        let net = DenseNet::new(&[4, 8, 8, 3], Head::Softmax, &mut rng).unwrap();
        let batch: Vec<(Vec<f64>, Target)> = (0..6)
            .map(|i| {
                let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
                (x, Target::Class(i % 3))
            })
            .collect();
        let err = net.grad_check(&batch, 1e-5).unwrap();
        assert!(err < 1e-4, "relative error {err}");
    }

    #[test]
    fn grad_check_size_one_batch_matches_mean_semantics() {
        let mut rng = stream(4, "one");
        let net = DenseNet::new(&[3, 5, 2], Head::Softmax, &mut rng).unwrap();
        let batch = vec![(vec![0.5, -0.5, 0.1], Target::Class(1))];
        let single = net.backward(&batch).unwrap();
        let doubled = net
            .backward(&[batch[0].clone(), batch[0].clone()])
            .unwrap();
        for l in 0..single.weights.len() {
            for p in 0..single.weights[l].len() {
                assert!((single.weights[l][p] - doubled.weights[l][p]).abs() < 1e-12);
            }
        }
    }

    fn min_abs_preactivation(net: &DenseNet, batch: &[(Vec<f64>, Target)]) -> f64 {
        let inputs: Vec<Vec<f64>> = batch.iter().map(|(x, _)| x.clone()).collect();
        net.min_abs_hidden_preactivation(&inputs)
    }

    #[test]
    fn backward_matches_finite_differences_on_100_random_nets() {
        let mut checked = 0;
        for seed in 0..200u64 {
            if checked >= 100 {
                break;
            }
            let mut rng = stream(seed, "gradprop");
            let hidden = 2 + (seed % 5) as usize;
            let inputs = 2 + (seed % 3) as usize;
            let classes = 2 + (seed % 4) as usize;
            let head = if seed % 2 == 0 { Head::Softmax } else { Head::Linear };
            let net = DenseNet::new(&[inputs, hidden, hidden, classes], head, &mut rng).unwrap();
            let batch: Vec<(Vec<f64>, Target)> = (0..4)
                .map(|i| {
                    let x: Vec<f64> = (0..inputs).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let t = match head {
                        Head::Softmax => Target::Class(i % classes),
                        Head::Linear => Target::Value {
                            index: i % classes,
                            value: rng.gen_range(-1.0..1.0),
                        },
                    };
                    (x, t)
                })
                .collect();
            if min_abs_preactivation(&net, &batch) < 1e-3 {
                continue;
            }
            let err = net.grad_check(&batch, 1e-5).unwrap();
            assert!(err < 1e-4, "seed {seed}: relative error {err}");
            checked += 1;
        }
        assert!(checked >= 100, "only {checked} generic nets checked");
    }

    #[test]
    fn softmax_sums_to_one_for_arbitrary_finite_inputs() {
        let mut rng = stream(9, "sum");
        for _ in 0..200 {
            let n = rng.gen_range(1..8);
            let logits: Vec<f64> = (0..n).map(|_| rng.gen_range(-50.0..50.0)).collect();
            let p = softmax(&logits);
            let sum: f64 = p.iter().sum();
            assert!((sum - 1.0).abs() < 1e-6);
            assert!(p.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn grow_input_preserves_behaviour_on_zero_padded_inputs() {
        let mut rng = stream(5, "grow");
        let mut net = DenseNet::new(&[3, 6, 2], Head::Softmax, &mut rng).unwrap();
        let x = vec![0.4, -0.2, 0.9];
        let before = net.forward(&x).unwrap();
        net.grow_input(2);
        let mut padded = x.clone();
        padded.extend_from_slice(&[0.0, 0.0]);
        let after = net.forward(&padded).unwrap();
        for (a, b) in before.iter().zip(after.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn grow_output_appends_zero_rows() {
        let mut rng = stream(6, "growout");
        let mut net = DenseNet::new(&[3, 4, 2], Head::Linear, &mut rng).unwrap();
        let x = vec![0.4, -0.2, 0.9];
        let before = net.forward(&x).unwrap();
        net.grow_output(3);
        let after = net.forward(&x).unwrap();
        assert_eq!(after.len(), 5);
        for (a, b) in before.iter().zip(after.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        for v in &after[2..] {
            assert_eq!(*v, 0.0);
        }
        assert_eq!(onehot(3, 1), vec![0.0, 1.0, 0.0]);
    }
}
