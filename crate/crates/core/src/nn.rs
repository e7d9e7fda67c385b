//! From-scratch 5-64-1 ReLU regressor: forward pass, analytic MSE gradients,
//! Adam, and a mini-batch training loop with early stopping on validation
//! loss and best-parameter restoration.
//!
//! Parameters live in one flat vector in serialization order (w1 row-major,
//! b1, w2, b2), so the optimizer, the finite-difference tests, and the file
//! format all share a single layout.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng;
use crate::textio;

pub const INPUT_DIM: usize = 5;
pub const HIDDEN_DIM: usize = 64;

pub const W1_OFFSET: usize = 0;
pub const B1_OFFSET: usize = HIDDEN_DIM * INPUT_DIM;
pub const W2_OFFSET: usize = B1_OFFSET + HIDDEN_DIM;
pub const B2_OFFSET: usize = W2_OFFSET + HIDDEN_DIM;
pub const PARAM_COUNT: usize = B2_OFFSET + 1;

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

/// Weights and biases of the 5-64-1 network, stored flat in layout order.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    values: Vec<f64>,
}

impl MlpParams {
    pub fn zeros() -> MlpParams {
        MlpParams {
            values: vec![0.0; PARAM_COUNT],
        }
    }

    /// Fan-based uniform initialization: each layer's weights are uniform on
    /// +-sqrt(6 / (fan_in + fan_out)); biases start at zero. Weight draw
    /// order is w1 row-major then w2.
    pub fn init<R: Rng + ?Sized>(rng: &mut R) -> MlpParams {
        let mut p = MlpParams::zeros();
        let bound1 = (6.0 / (INPUT_DIM + HIDDEN_DIM) as f64).sqrt();
        for w in &mut p.values[W1_OFFSET..B1_OFFSET] {
            *w = rng.random_range(-bound1..bound1);
        }
        let bound2 = (6.0 / (HIDDEN_DIM + 1) as f64).sqrt();
        for w in &mut p.values[W2_OFFSET..B2_OFFSET] {
            *w = rng.random_range(-bound2..bound2);
        }
        p
    }

    pub fn from_values(values: Vec<f64>) -> Result<MlpParams> {
        if values.len() != PARAM_COUNT {
            return Err(Error::InvalidConfig(format!(
                "parameter vector must have {PARAM_COUNT} entries, got {}",
                values.len()
            )));
        }
        Ok(MlpParams { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn w1(&self) -> &[f64] {
        &self.values[W1_OFFSET..B1_OFFSET]
    }

    pub fn b1(&self) -> &[f64] {
        &self.values[B1_OFFSET..W2_OFFSET]
    }

    pub fn w2(&self) -> &[f64] {
        &self.values[W2_OFFSET..B2_OFFSET]
    }

    pub fn b2(&self) -> f64 {
        self.values[B2_OFFSET]
    }

    /// w2 . relu(w1 . input + b1) + b2
    #[inline]
    pub fn forward(&self, input: &[f64; INPUT_DIM]) -> f64 {
        let v = &self.values;
        let mut out = v[B2_OFFSET];
        for j in 0..HIDDEN_DIM {
            let row = &v[j * INPUT_DIM..(j + 1) * INPUT_DIM];
            let z = v[B1_OFFSET + j]
                + row[0] * input[0]
                + row[1] * input[1]
                + row[2] * input[2]
                + row[3] * input[3]
                + row[4] * input[4];
            if z > 0.0 {
                out += v[W2_OFFSET + j] * z;
            }
        }
        out
    }
}

/// A supervised regression problem: 5-vector inputs and scalar targets.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSet {
    inputs: Vec<[f64; INPUT_DIM]>,
    targets: Vec<f64>,
}

impl RegressionSet {
    pub fn new(inputs: Vec<[f64; INPUT_DIM]>, targets: Vec<f64>) -> Result<RegressionSet> {
        if inputs.len() != targets.len() {
            return Err(Error::InvalidConfig(format!(
                "regression set with {} inputs but {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        if inputs.is_empty() {
            return Err(Error::TooSmall {
                what: "regression set",
                len: 0,
                min: 1,
            });
        }
        Ok(RegressionSet { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        false // non-empty by construction
    }

    pub fn inputs(&self) -> &[[f64; INPUT_DIM]] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }
}

/// Hyperparameters of one training run. `seed` drives initialization and all
/// index shuffles, making training a pure function of its inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Consecutive epochs without a new best validation loss before halting.
    pub patience: usize,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            batch_size: 100,
            patience: 50,
            max_epochs: 2000,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 || self.patience == 0 || self.max_epochs == 0 {
            return Err(Error::InvalidConfig(
                "batch_size, patience and max_epochs must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Adam moment accumulators, shaped like the parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub fn new() -> AdamState {
        AdamState {
            m: vec![0.0; PARAM_COUNT],
            v: vec![0.0; PARAM_COUNT],
            t: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }
}

impl Default for AdamState {
    fn default() -> Self {
        AdamState::new()
    }
}

/// Mean squared error over a batch and its exact analytic gradient.
pub fn loss_and_gradient(
    params: &MlpParams,
    inputs: &[[f64; INPUT_DIM]],
    targets: &[f64],
) -> (f64, MlpParams) {
    assert!(!inputs.is_empty(), "empty batch");
    assert_eq!(inputs.len(), targets.len());
    let v = &params.values;
    let mut grad = MlpParams::zeros();
    let g = &mut grad.values;
    let inv_n = 1.0 / inputs.len() as f64;
    let mut loss = 0.0;
    let mut hidden = [0.0; HIDDEN_DIM];

    for (x, &t) in inputs.iter().zip(targets) {
        let mut y = v[B2_OFFSET];
        for j in 0..HIDDEN_DIM {
            let row = &v[j * INPUT_DIM..(j + 1) * INPUT_DIM];
            let z = v[B1_OFFSET + j]
                + row[0] * x[0]
                + row[1] * x[1]
                + row[2] * x[2]
                + row[3] * x[3]
                + row[4] * x[4];
            let h = if z > 0.0 { z } else { 0.0 };
            hidden[j] = h;
            y += v[W2_OFFSET + j] * h;
        }
        let err = y - t;
        loss += err * err;

        let dy = 2.0 * err * inv_n;
        g[B2_OFFSET] += dy;
        for j in 0..HIDDEN_DIM {
            let h = hidden[j];
            g[W2_OFFSET + j] += dy * h;
            if h > 0.0 {
                let dz = dy * v[W2_OFFSET + j];
                g[B1_OFFSET + j] += dz;
                let grow = &mut g[j * INPUT_DIM..(j + 1) * INPUT_DIM];
                grow[0] += dz * x[0];
                grow[1] += dz * x[1];
                grow[2] += dz * x[2];
                grow[3] += dz * x[3];
                grow[4] += dz * x[4];
            }
        }
    }
    (loss * inv_n, grad)
}

/// One Adam update with bias correction; increments the step counter.
pub fn adam_step(
    params: &mut MlpParams,
    grads: &MlpParams,
    state: &mut AdamState,
    learning_rate: f64,
) {
    state.t += 1;
    let t = state.t as i32;
    let bias1 = 1.0 - ADAM_BETA1.powi(t);
    let bias2 = 1.0 - ADAM_BETA2.powi(t);
    for i in 0..PARAM_COUNT {
        let g = grads.values[i];
        state.m[i] = ADAM_BETA1 * state.m[i] + (1.0 - ADAM_BETA1) * g;
        state.v[i] = ADAM_BETA2 * state.v[i] + (1.0 - ADAM_BETA2) * g * g;
        let m_hat = state.m[i] / bias1;
        let v_hat = state.v[i] / bias2;
        params.values[i] -= learning_rate * m_hat / (v_hat.sqrt() + ADAM_EPSILON);
    }
}

/// Full-set mean squared error.
pub fn mse(params: &MlpParams, set: &RegressionSet) -> f64 {
    let mut sum = 0.0;
    for (x, &t) in set.inputs.iter().zip(&set.targets) {
        let e = params.forward(x) - t;
        sum += e * e;
    }
    sum / set.len() as f64
}

/// Tracks the best validation loss seen so far; signals a stop after
/// `patience` consecutive observations without a strict improvement.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    best: f64,
    best_epoch: usize,
    since_best: usize,
    epochs: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> EarlyStopping {
        EarlyStopping {
            patience,
            best: f64::INFINITY,
            best_epoch: 0,
            since_best: 0,
            epochs: 0,
        }
    }

    /// Record one epoch's validation loss; true when it strictly improves on
    /// the best seen so far (compared at full precision).
    pub fn observe(&mut self, val_loss: f64) -> bool {
        self.epochs += 1;
        if val_loss < self.best {
            self.best = val_loss;
            self.best_epoch = self.epochs;
            self.since_best = 0;
            true
        } else {
            self.since_best += 1;
            false
        }
    }

    pub fn should_stop(&self) -> bool {
        self.since_best >= self.patience
    }

    pub fn best(&self) -> f64 {
        self.best
    }

    /// 1-based epoch of the best observation; 0 before any observation.
    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }
}

/// Per-epoch losses of one training run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainHistory {
    /// Sample-weighted mean of the mini-batch losses of each epoch.
    pub train_loss: Vec<f64>,
    /// Full validation-set loss after each epoch.
    pub val_loss: Vec<f64>,
    /// 1-based epoch with the lowest validation loss.
    pub best_epoch: usize,
    pub best_val_loss: f64,
}

/// Mini-batch Adam training with early stopping. Returns the parameters with
/// the minimum validation loss ever observed, not the final ones.
pub fn train(
    train_set: &RegressionSet,
    val_set: &RegressionSet,
    cfg: &TrainConfig,
) -> Result<(MlpParams, TrainHistory)> {
    cfg.validate()?;
    let mut rng = rng::stream(cfg.seed);
    let mut params = MlpParams::init(&mut rng);
    let mut best = params.clone();
    let mut adam = AdamState::new();
    let mut stopper = EarlyStopping::new(cfg.patience);
    let mut history = TrainHistory::default();

    let n = train_set.len();
    let mut indices: Vec<usize> = (0..n).collect();
    let mut batch_inputs: Vec<[f64; INPUT_DIM]> = Vec::with_capacity(cfg.batch_size);
    let mut batch_targets: Vec<f64> = Vec::with_capacity(cfg.batch_size);

    for _ in 0..cfg.max_epochs {
        indices.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in indices.chunks(cfg.batch_size) {
            batch_inputs.clear();
            batch_targets.clear();
            for &i in chunk {
                batch_inputs.push(train_set.inputs[i]);
                batch_targets.push(train_set.targets[i]);
            }
            let (loss, grads) = loss_and_gradient(&params, &batch_inputs, &batch_targets);
            adam_step(&mut params, &grads, &mut adam, cfg.learning_rate);
            epoch_loss += loss * chunk.len() as f64;
        }
        history.train_loss.push(epoch_loss / n as f64);

        let val = mse(&params, val_set);
        history.val_loss.push(val);
        if stopper.observe(val) {
            best = params.clone();
        }
        if stopper.should_stop() {
            break;
        }
    }
    history.best_epoch = stopper.best_epoch();
    history.best_val_loss = stopper.best();
    Ok((best, history))
}

/// Write parameters as one float per line after a `value` header, in layout
/// order (w1 row-major, b1, w2, b2). Round-trips bit-exactly.
pub fn save_params(params: &MlpParams, path: &Path) -> Result<()> {
    let mut out = String::with_capacity(PARAM_COUNT * 20);
    textio::push_comment(
        &mut out,
        "layout",
        format!(
            "w1 row-major ({HIDDEN_DIM}x{INPUT_DIM}), b1 ({HIDDEN_DIM}), w2 ({HIDDEN_DIM}), b2 (1)"
        ),
    );
    out.push_str("value\n");
    for v in &params.values {
        let _ = writeln!(out, "{v}");
    }
    textio::write_file(path, &out)
}

pub fn load_params(path: &Path) -> Result<MlpParams> {
    let text = textio::read_file(path)?;
    let lines: Vec<&str> = text.lines().collect();
    let (_, first_data) = textio::leading_comments(&lines);
    if lines.get(first_data).copied() != Some("value") {
        return Err(Error::parse(
            path,
            first_data + 1,
            1,
            "expected header line \"value\"",
        ));
    }
    let mut values = Vec::with_capacity(PARAM_COUNT);
    for (off, line) in lines[first_data + 1..].iter().enumerate() {
        if line.is_empty() {
            continue;
        }
        let line_no = first_data + 2 + off;
        values.push(textio::parse_field(line, "a number", path, line_no, 1)?);
    }
    if values.len() != PARAM_COUNT {
        return Err(Error::parse(
            path,
            lines.len(),
            1,
            format!(
                "expected {PARAM_COUNT} parameter values, got {}",
                values.len()
            ),
        ));
    }
    MlpParams::from_values(values)
}
