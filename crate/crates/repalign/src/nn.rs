//! Small deterministic dense feed-forward trainer with per-layer
//! representation extraction.
//!
//! Everything is plain f64 on the CPU with a fixed accumulation order, so
//! identical (spec, data, config, seeds) give bit-identical trained
//! parameters. The hot path is minibatch forward/backward over small
//! dense matrices; no attempt is made to go faster than that.
//!
//! Layer `l` maps `a_l` (batch × in) to `z_l = a_l · W_lᵀ + b_l` and
//! applies the activation; the output layer is always linear with width 1.
//! When the activation is `RbfLayer`, the first hidden layer instead
//! computes `exp(−‖x − c_j‖² / (2β²))` with trainable centers `c_j`
//! (stored in the layer's weight slot, no bias); any deeper hidden layers
//! fall back to ReLU.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;

pub const PRELU_INIT_SLOPE: f64 = 0.25;
pub const LEAKY_RELU_SLOPE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
    PRelu,
    LeakyRelu,
    Linear,
    RbfLayer,
}

impl Activation {
    pub fn parse(s: &str) -> Result<Activation> {
        match s {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            "prelu" => Ok(Activation::PRelu),
            "leaky_relu" => Ok(Activation::LeakyRelu),
            "linear" => Ok(Activation::Linear),
            "rbf_layer" => Ok(Activation::RbfLayer),
            other => Err(Error::invalid_input(format!("unknown activation '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::PRelu => "prelu",
            Activation::LeakyRelu => "leaky_relu",
            Activation::Linear => "linear",
            Activation::RbfLayer => "rbf_layer",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Mse,
    Logistic,
}

impl LossKind {
    pub fn parse(s: &str) -> Result<LossKind> {
        match s {
            "mse" => Ok(LossKind::Mse),
            "logistic" => Ok(LossKind::Logistic),
            other => Err(Error::invalid_input(format!("unknown loss '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LossKind::Mse => "mse",
            LossKind::Logistic => "logistic",
        }
    }
}

/// Architecture and initialization of a network.
#[derive(Debug, Clone)]
pub struct MlpSpec {
    /// `[input, hidden..., 1]`; at least one hidden layer.
    pub layer_widths: Vec<usize>,
    pub activation: Activation,
    pub loss: LossKind,
    pub init_seed: u64,
    /// Bandwidth of the first layer when `activation == RbfLayer`.
    pub rbf_bandwidth: f64,
}

impl MlpSpec {
    pub fn new(layer_widths: Vec<usize>, activation: Activation, loss: LossKind, init_seed: u64) -> MlpSpec {
        MlpSpec { layer_widths, activation, loss, init_seed, rbf_bandwidth: 1.0 }
    }

    pub fn hidden_layers(&self) -> usize {
        self.layer_widths.len() - 2
    }

    fn validate(&self) -> Result<()> {
        if self.layer_widths.len() < 3 {
            return Err(Error::invalid_input(
                "mlp spec needs at least one hidden layer (input, hidden..., output)",
            ));
        }
        if self.layer_widths.contains(&0) {
            return Err(Error::invalid_input("mlp spec: all widths must be at least 1"));
        }
        if *self.layer_widths.last().unwrap() != 1 {
            return Err(Error::invalid_input("mlp spec: output width must be 1"));
        }
        if self.activation == Activation::RbfLayer && !(self.rbf_bandwidth > 0.0) {
            return Err(Error::invalid_input("mlp spec: rbf bandwidth must be positive"));
        }
        Ok(())
    }
}

/// Dense network parameters. Layer `l` has a `widths[l+1] × widths[l]`
/// weight matrix and a bias vector; for `RbfLayer` the first weight
/// matrix holds the centers (one per row) and its bias is unused.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub spec: MlpSpec,
    weights: Vec<Mat>,
    biases: Vec<Vec<f64>>,
    prelu_slopes: Vec<f64>,
    rbf_centers_set: bool,
}

impl PartialEq for MlpSpec {
    fn eq(&self, other: &Self) -> bool {
        self.layer_widths == other.layer_widths
            && self.activation == other.activation
            && self.loss == other.loss
            && self.init_seed == other.init_seed
            && self.rbf_bandwidth == other.rbf_bandwidth
    }
}

/// Glorot-uniform weights, zero biases, deterministic under `init_seed`.
/// RBF centers start as Glorot noise and are replaced by a random subset
/// of the inputs when training first sees a dataset.
pub fn init_model(spec: &MlpSpec) -> Result<MlpModel> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.init_seed);
    let n_layers = spec.layer_widths.len() - 1;
    let mut weights = Vec::with_capacity(n_layers);
    let mut biases = Vec::with_capacity(n_layers);
    for l in 0..n_layers {
        let fan_in = spec.layer_widths[l];
        let fan_out = spec.layer_widths[l + 1];
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        weights.push(Mat::from_fn(fan_out, fan_in, |_, _| {
            (rng.random::<f64>() * 2.0 - 1.0) * limit
        }));
        biases.push(vec![0.0; fan_out]);
    }
    let prelu_slopes = vec![PRELU_INIT_SLOPE; spec.hidden_layers()];
    Ok(MlpModel { spec: spec.clone(), weights, biases, prelu_slopes, rbf_centers_set: false })
}

impl MlpModel {
    fn n_layers(&self) -> usize {
        self.weights.len()
    }

    /// Activation used by hidden layer `l` (0-based).
    fn hidden_activation(&self, l: usize) -> Activation {
        match self.spec.activation {
            Activation::RbfLayer if l == 0 => Activation::RbfLayer,
            Activation::RbfLayer => Activation::Relu,
            a => a,
        }
    }

    /// Forward pass keeping every post-activation (index 0 is the input).
    fn forward_full(&self, x: &Mat) -> (Vec<Mat>, Vec<Mat>) {
        let mut acts: Vec<Mat> = Vec::with_capacity(self.n_layers() + 1);
        let mut zs: Vec<Mat> = Vec::with_capacity(self.n_layers());
        acts.push(x.clone());
        for l in 0..self.n_layers() {
            let input = &acts[l];
            let last = l == self.n_layers() - 1;
            if !last && self.hidden_activation(l) == Activation::RbfLayer {
                let a = rbf_forward(input, &self.weights[l], self.spec.rbf_bandwidth);
                zs.push(a.clone());
                acts.push(a);
                continue;
            }
            let mut z = affine(input, &self.weights[l], &self.biases[l]);
            if last {
                zs.push(z.clone());
                acts.push(z);
            } else {
                let act = self.hidden_activation(l);
                let slope = self.prelu_slopes[l];
                zs.push(z.clone());
                apply_activation(&mut z, act, slope);
                acts.push(z);
            }
        }
        (acts, zs)
    }

    /// Network outputs, one scalar per input row.
    pub fn predict(&self, x: &Mat) -> Vec<f64> {
        let (acts, _) = self.forward_full(x);
        acts.last().unwrap().col(0)
    }

    /// Read access to the per-layer weight matrices (the first one holds
    /// the centers for `RbfLayer` networks).
    pub fn weights(&self) -> &[Mat] {
        &self.weights
    }

    /// Read access to the per-layer bias vectors.
    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }
}

/// `a · Wᵀ + b` for a batch.
fn affine(a: &Mat, w: &Mat, b: &[f64]) -> Mat {
    let mut out = Mat::zeros(a.rows(), w.rows());
    for i in 0..a.rows() {
        let row = a.row(i);
        let orow = out.row_mut(i);
        for j in 0..w.rows() {
            orow[j] = b[j] + crate::linalg::dot(row, w.row(j));
        }
    }
    out
}

fn rbf_forward(x: &Mat, centers: &Mat, bandwidth: f64) -> Mat {
    let denom = 2.0 * bandwidth * bandwidth;
    Mat::from_fn(x.rows(), centers.rows(), |i, j| {
        let mut d2 = 0.0;
        for (xv, cv) in x.row(i).iter().zip(centers.row(j)) {
            d2 += (xv - cv) * (xv - cv);
        }
        (-d2 / denom).exp()
    })
}

fn apply_activation(z: &mut Mat, act: Activation, prelu_slope: f64) {
    let f: Box<dyn Fn(f64) -> f64> = match act {
        Activation::Relu => Box::new(|v| if v > 0.0 { v } else { 0.0 }),
        Activation::Tanh => Box::new(|v| v.tanh()),
        Activation::PRelu => Box::new(move |v| if v > 0.0 { v } else { prelu_slope * v }),
        Activation::LeakyRelu => Box::new(|v| if v > 0.0 { v } else { LEAKY_RELU_SLOPE * v }),
        Activation::Linear => Box::new(|v| v),
        Activation::RbfLayer => unreachable!("rbf layers bypass apply_activation"),
    };
    for r in 0..z.rows() {
        for v in z.row_mut(r) {
            *v = f(*v);
        }
    }
}

fn activation_derivative(z: f64, act: Activation, prelu_slope: f64) -> f64 {
    match act {
        Activation::Relu => {
            if z > 0.0 {
                1.0
            } else {
                0.0
            }
        }
        Activation::Tanh => {
            let t = z.tanh();
            1.0 - t * t
        }
        Activation::PRelu => {
            if z > 0.0 {
                1.0
            } else {
                prelu_slope
            }
        }
        Activation::LeakyRelu => {
            if z > 0.0 {
                1.0
            } else {
                LEAKY_RELU_SLOPE
            }
        }
        Activation::Linear => 1.0,
        Activation::RbfLayer => unreachable!(),
    }
}

/// Numerically stable `log(1 + exp(-z))`.
fn softplus_neg(z: f64) -> f64 {
    if z > 0.0 {
        (-z).exp().ln_1p()
    } else {
        -z + z.exp().ln_1p()
    }
}

/// Per-sample loss of a scalar output against a label.
fn sample_loss(out: f64, y: f64, loss: LossKind) -> f64 {
    match loss {
        LossKind::Mse => (out - y) * (out - y),
        LossKind::Logistic => softplus_neg(out * y) / std::f64::consts::LN_2,
    }
}

/// d(sample_loss)/d(out).
fn sample_loss_grad(out: f64, y: f64, loss: LossKind) -> f64 {
    match loss {
        LossKind::Mse => 2.0 * (out - y),
        LossKind::Logistic => {
            let z = out * y;
            // d/dout log(1+e^{-z})/ln2 = -y · sigmoid(-z) / ln2
            let sig = if z > 0.0 {
                let e = (-z).exp();
                e / (1.0 + e)
            } else {
                1.0 / (1.0 + z.exp())
            };
            -y * sig / std::f64::consts::LN_2
        }
    }
}

/// Total dataset loss under the model's loss kind: the plain sum of
/// per-sample losses (squared-error sum for MSE).
pub fn dataset_loss(model: &MlpModel, data: &Dataset) -> f64 {
    let out = model.predict(&data.x);
    out.iter()
        .zip(&data.y)
        .map(|(o, y)| sample_loss(*o, *y, model.spec.loss))
        .sum()
}

// ── Flat parameter view ─────────────────────────────────────────────
//
// Order: per layer weights (row-major) then bias, skipping the unused
// RBF layer-0 bias; PReLU slopes come last when the activation uses them.

/// Number of trainable parameters of a spec.
pub fn param_count(spec: &MlpSpec) -> usize {
    let mut count = 0;
    let n_layers = spec.layer_widths.len() - 1;
    for l in 0..n_layers {
        count += spec.layer_widths[l] * spec.layer_widths[l + 1];
        let rbf_first = spec.activation == Activation::RbfLayer && l == 0;
        if !rbf_first {
            count += spec.layer_widths[l + 1];
        }
    }
    if spec.activation == Activation::PRelu {
        count += spec.hidden_layers();
    }
    count
}

fn flatten_params(model: &MlpModel) -> Vec<f64> {
    let mut out = Vec::with_capacity(param_count(&model.spec));
    for l in 0..model.n_layers() {
        for r in 0..model.weights[l].rows() {
            out.extend_from_slice(model.weights[l].row(r));
        }
        let rbf_first = model.spec.activation == Activation::RbfLayer && l == 0;
        if !rbf_first {
            out.extend_from_slice(&model.biases[l]);
        }
    }
    if model.spec.activation == Activation::PRelu {
        out.extend_from_slice(&model.prelu_slopes);
    }
    out
}

fn unflatten_params(model: &mut MlpModel, flat: &[f64]) {
    let mut k = 0;
    for l in 0..model.n_layers() {
        let (rows, cols) = (model.weights[l].rows(), model.weights[l].cols());
        for r in 0..rows {
            model.weights[l].row_mut(r).copy_from_slice(&flat[k..k + cols]);
            k += cols;
        }
        let rbf_first = model.spec.activation == Activation::RbfLayer && l == 0;
        if !rbf_first {
            let blen = model.biases[l].len();
            model.biases[l].copy_from_slice(&flat[k..k + blen]);
            k += blen;
        }
    }
    if model.spec.activation == Activation::PRelu {
        let h = model.prelu_slopes.len();
        model.prelu_slopes.copy_from_slice(&flat[k..k + h]);
        k += h;
    }
    debug_assert_eq!(k, flat.len());
}

/// Mean-over-batch gradient, flattened in the parameter order above.
fn batch_gradient(model: &MlpModel, x: &Mat, y: &[f64]) -> Vec<f64> {
    let batch = x.rows() as f64;
    let (acts, zs) = model.forward_full(x);
    let out = acts.last().unwrap();

    let mut grad_w: Vec<Mat> = model.weights.iter().map(|w| Mat::zeros(w.rows(), w.cols())).collect();
    let mut grad_b: Vec<Vec<f64>> = model.biases.iter().map(|b| vec![0.0; b.len()]).collect();
    let mut grad_slope = vec![0.0; model.prelu_slopes.len()];

    // delta = dLoss/dz for the current layer, starting at the output.
    let mut delta = Mat::from_fn(x.rows(), 1, |i, _| {
        sample_loss_grad(out.get(i, 0), y[i], model.spec.loss) / batch
    });

    for l in (0..model.n_layers()).rev() {
        let input = &acts[l];
        let is_rbf = l == 0
            && model.n_layers() >= 1
            && model.spec.activation == Activation::RbfLayer;

        if is_rbf {
            // delta here is dLoss/da for the RBF outputs (filled below on
            // the way down); centers gradient:
            // d a_j / d c_j = a_j · (x − c_j) / β².
            let beta2 = model.spec.rbf_bandwidth * model.spec.rbf_bandwidth;
            let a = &acts[1];
            for i in 0..x.rows() {
                for j in 0..model.weights[0].rows() {
                    let coef = delta.get(i, j) * a.get(i, j) / beta2;
                    if coef == 0.0 {
                        continue;
                    }
                    for (cidx, (xv, cv)) in x.row(i).iter().zip(model.weights[0].row(j)).enumerate() {
                        let g = grad_w[0].get(j, cidx) + coef * (xv - cv);
                        grad_w[0].set(j, cidx, g);
                    }
                }
            }
            continue;
        }

        // delta is dLoss/dz_l here. Weight and bias gradients.
        for i in 0..x.rows() {
            for j in 0..grad_w[l].rows() {
                let d = delta.get(i, j);
                if d == 0.0 {
                    continue;
                }
                grad_b[l][j] += d;
                for (c, &av) in input.row(i).iter().enumerate() {
                    let g = grad_w[l].get(j, c) + d * av;
                    grad_w[l].set(j, c, g);
                }
            }
        }

        if l == 0 {
            break;
        }

        // Propagate: dLoss/da_{l} = delta · W_l, then through the
        // previous layer's activation.
        let mut prev = Mat::zeros(x.rows(), model.weights[l].cols());
        for i in 0..x.rows() {
            for j in 0..delta.cols() {
                let d = delta.get(i, j);
                if d == 0.0 {
                    continue;
                }
                let wrow = model.weights[l].row(j);
                let prow = prev.row_mut(i);
                for (c, &wv) in wrow.iter().enumerate() {
                    prow[c] += d * wv;
                }
            }
        }

        let prev_act = model.hidden_activation(l - 1);
        if prev_act == Activation::RbfLayer {
            // Leave dLoss/da for the RBF branch above.
            delta = prev;
        } else {
            let slope = model.prelu_slopes[l - 1];
            if prev_act == Activation::PRelu {
                let z = &zs[l - 1];
                for i in 0..x.rows() {
                    for j in 0..prev.cols() {
                        if z.get(i, j) <= 0.0 {
                            grad_slope[l - 1] += prev.get(i, j) * z.get(i, j);
                        }
                    }
                }
            }
            let z = &zs[l - 1];
            for i in 0..x.rows() {
                let prow = prev.row_mut(i);
                for (j, pv) in prow.iter_mut().enumerate() {
                    *pv *= activation_derivative(z.get(i, j), prev_act, slope);
                }
            }
            delta = prev;
        }
    }

    // Flatten in the canonical order.
    let mut flat = Vec::with_capacity(param_count(&model.spec));
    for l in 0..model.n_layers() {
        for r in 0..grad_w[l].rows() {
            flat.extend_from_slice(grad_w[l].row(r));
        }
        let rbf_first = model.spec.activation == Activation::RbfLayer && l == 0;
        if !rbf_first {
            flat.extend_from_slice(&grad_b[l]);
        }
    }
    if model.spec.activation == Activation::PRelu {
        flat.extend_from_slice(&grad_slope);
    }
    flat
}

// ── Optimizers ──────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Sgd,
    SgdMomentum,
    Adam,
    Rmsprop,
}

impl OptimizerKind {
    pub fn parse(s: &str) -> Result<OptimizerKind> {
        match s {
            "sgd" => Ok(OptimizerKind::Sgd),
            "sgd_momentum" => Ok(OptimizerKind::SgdMomentum),
            "adam" => Ok(OptimizerKind::Adam),
            "rmsprop" => Ok(OptimizerKind::Rmsprop),
            other => Err(Error::invalid_input(format!("unknown optimizer '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::SgdMomentum => "sgd_momentum",
            OptimizerKind::Adam => "adam",
            OptimizerKind::Rmsprop => "rmsprop",
        }
    }
}

const MOMENTUM: f64 = 0.9;
const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
const RMSPROP_DECAY: f64 = 0.99;
const RMSPROP_EPS: f64 = 1e-8;

struct OptimizerState {
    kind: OptimizerKind,
    lr: f64,
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl OptimizerState {
    fn new(kind: OptimizerKind, lr: f64, dim: usize) -> OptimizerState {
        OptimizerState { kind, lr, step: 0, m: vec![0.0; dim], v: vec![0.0; dim] }
    }

    fn apply(&mut self, params: &mut [f64], grad: &[f64]) {
        self.step += 1;
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, g) in params.iter_mut().zip(grad) {
                    *p -= self.lr * g;
                }
            }
            OptimizerKind::SgdMomentum => {
                for ((p, g), m) in params.iter_mut().zip(grad).zip(&mut self.m) {
                    *m = MOMENTUM * *m + g;
                    *p -= self.lr * *m;
                }
            }
            OptimizerKind::Adam => {
                let bc1 = 1.0 - ADAM_BETA1.powi(self.step as i32);
                let bc2 = 1.0 - ADAM_BETA2.powi(self.step as i32);
                for ((p, g), (m, v)) in params
                    .iter_mut()
                    .zip(grad)
                    .zip(self.m.iter_mut().zip(&mut self.v))
                {
                    *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
                    *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
                    let mh = *m / bc1;
                    let vh = *v / bc2;
                    *p -= self.lr * mh / (vh.sqrt() + ADAM_EPS);
                }
            }
            OptimizerKind::Rmsprop => {
                for ((p, g), v) in params.iter_mut().zip(grad).zip(&mut self.v) {
                    *v = RMSPROP_DECAY * *v + (1.0 - RMSPROP_DECAY) * g * g;
                    *p -= self.lr * g / (v.sqrt() + RMSPROP_EPS);
                }
            }
        }
    }
}

// ── Training ────────────────────────────────────────────────────────

/// Optimizer, schedule, and seeding for [`train`].
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub optimizer: OptimizerKind,
    pub lr: f64,
    pub batch_size: usize,
    /// Epoch cap.
    pub epochs: usize,
    pub shuffle_seed: u64,
    /// Stop early once the epoch loss improves by less than 1e-5
    /// (relative) over a 20-epoch window.
    pub stop_on_convergence: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            optimizer: OptimizerKind::Adam,
            lr: 0.001,
            batch_size: 64,
            epochs: 100,
            shuffle_seed: 0,
            stop_on_convergence: false,
        }
    }
}

const CONVERGENCE_WINDOW: usize = 20;
const CONVERGENCE_REL_TOL: f64 = 1e-5;

/// Minibatch training with per-epoch reshuffling. Returns the trained
/// model and the mean per-sample training loss evaluated after each
/// epoch. Deterministic given all seeds.
pub fn train(mut model: MlpModel, data: &Dataset, cfg: &TrainConfig) -> Result<(MlpModel, Vec<f64>)> {
    if data.x.cols() != model.spec.layer_widths[0] {
        return Err(Error::invalid_input(format!(
            "train: data has {} features, spec expects {}",
            data.x.cols(),
            model.spec.layer_widths[0]
        )));
    }
    if data.is_empty() {
        return Err(Error::invalid_input("train: empty dataset"));
    }
    if cfg.batch_size == 0 {
        return Err(Error::invalid_config("train: batch_size must be at least 1"));
    }
    if !(cfg.lr > 0.0) {
        return Err(Error::invalid_config("train: learning rate must be positive"));
    }
    if model.spec.loss == LossKind::Logistic && data.y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::invalid_input("train: logistic loss needs labels in {-1, +1}"));
    }

    if model.spec.activation == Activation::RbfLayer && !model.rbf_centers_set {
        init_rbf_centers(&mut model, &data.x);
    }

    let n = data.len();
    let mut params = flatten_params(&model);
    let mut opt = OptimizerState::new(cfg.optimizer, cfg.lr, params.len());
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.shuffle_seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        for chunk in order.chunks(cfg.batch_size) {
            let xb = data.x.select_rows(chunk);
            let yb: Vec<f64> = chunk.iter().map(|&i| data.y[i]).collect();
            let grad = batch_gradient(&model, &xb, &yb);
            opt.apply(&mut params, &grad);
            unflatten_params(&mut model, &params);
        }
        let epoch_loss = dataset_loss(&model, data) / n as f64;
        if !epoch_loss.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        history.push(epoch_loss);
        if cfg.stop_on_convergence && history.len() > CONVERGENCE_WINDOW {
            let old = history[history.len() - 1 - CONVERGENCE_WINDOW];
            let new = epoch_loss;
            if (old - new) / old.max(f64::MIN_POSITIVE) < CONVERGENCE_REL_TOL {
                break;
            }
        }
    }
    Ok((model, history))
}

/// Centers initialized to a seeded random subset of the inputs (with
/// replacement once the layer is wider than the dataset).
fn init_rbf_centers(model: &mut MlpModel, x: &Mat) {
    let h = model.weights[0].rows();
    let mut rng = ChaCha8Rng::seed_from_u64(model.spec.init_seed ^ 0x7262665f63656e74); // "rbf_cent"
    let n = x.rows();
    let mut picks: Vec<usize> = if h <= n {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        idx.truncate(h);
        idx
    } else {
        (0..h).map(|_| rng.random_range(0..n)).collect()
    };
    picks.sort_unstable();
    for (j, &i) in picks.iter().enumerate() {
        model.weights[0].row_mut(j).copy_from_slice(x.row(i));
    }
    model.rbf_centers_set = true;
}

/// Post-activation outputs of hidden layer `layer` (1-based), one row per
/// sample, with a constant bias feature column (value 1) appended. The
/// caller row-normalizes before measuring alignment.
pub fn hidden_representation(model: &MlpModel, x: &Mat, layer: usize) -> Result<Mat> {
    let hidden = model.spec.hidden_layers();
    if layer == 0 || layer > hidden {
        return Err(Error::invalid_input(format!(
            "hidden_representation: layer {layer} out of range 1..={hidden}"
        )));
    }
    if x.cols() != model.spec.layer_widths[0] {
        return Err(Error::invalid_input(format!(
            "hidden_representation: input has {} features, spec expects {}",
            x.cols(),
            model.spec.layer_widths[0]
        )));
    }
    let (acts, _) = model.forward_full(x);
    Ok(acts[layer].append_constant_column(1.0))
}

/// Maximum relative error between the backprop gradient and a central
/// finite difference (step 1e-5), across all parameters, for the mean
/// dataset loss. Small datasets recommended.
pub fn gradient_check(model: &MlpModel, data: &Dataset) -> f64 {
    let h = 1e-5;
    let analytic = batch_gradient(&model.clone(), &data.x, &data.y);
    let base = flatten_params(model);
    let mut probe = model.clone();
    let n = data.len() as f64;
    let mut worst = 0.0_f64;
    for k in 0..base.len() {
        let mut plus = base.clone();
        plus[k] += h;
        unflatten_params(&mut probe, &plus);
        let lp = dataset_loss(&probe, data) / n;
        let mut minus = base.clone();
        minus[k] -= h;
        unflatten_params(&mut probe, &minus);
        let lm = dataset_loss(&probe, data) / n;
        let fd = (lp - lm) / (2.0 * h);
        let denom = analytic[k].abs().max(fd.abs()).max(1e-6);
        worst = worst.max((analytic[k] - fd).abs() / denom);
    }
    worst
}

/// Smallest |preactivation| across the ReLU-family hidden layers for the
/// given inputs, or infinity for smooth/linear activations. The
/// kink-avoiding gradient-check protocol rejects inputs where this is
/// small, since finite differences straddling a kink are meaningless.
pub fn kink_distance(model: &MlpModel, x: &Mat) -> f64 {
    let (_, zs) = model.forward_full(x);
    let mut min = f64::INFINITY;
    for (l, z) in zs.iter().enumerate().take(model.n_layers() - 1) {
        if !matches!(
            model.hidden_activation(l),
            Activation::Relu | Activation::PRelu | Activation::LeakyRelu
        ) {
            continue;
        }
        for r in 0..z.rows() {
            for v in z.row(r) {
                min = min.min(v.abs());
            }
        }
    }
    min
}

/// Direct RBF feature map against fixed centers:
/// `feature[i][j] = exp(−‖x_i − c_j‖² / (2·bandwidth²))`.
pub fn rbf_feature_map(x: &Mat, centers: &Mat, bandwidth: f64) -> Result<Mat> {
    if !(bandwidth > 0.0) {
        return Err(Error::invalid_input("rbf_feature_map: bandwidth must be positive"));
    }
    if x.cols() != centers.cols() {
        return Err(Error::invalid_input("rbf_feature_map: dimension mismatch"));
    }
    Ok(rbf_forward(x, centers, bandwidth))
}

// ── Checkpoints ─────────────────────────────────────────────────────
//
// Plain text, one key=value per line; floats use Rust's shortest
// round-trip formatting so reloading is bit-exact.

const CHECKPOINT_HEADER: &str = "# repalign mlp checkpoint v1";

pub fn save_checkpoint(model: &MlpModel, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(CHECKPOINT_HEADER);
    out.push('\n');
    let widths: Vec<String> = model.spec.layer_widths.iter().map(|w| w.to_string()).collect();
    out.push_str(&format!("widths={}\n", widths.join(",")));
    out.push_str(&format!("activation={}\n", model.spec.activation.name()));
    out.push_str(&format!("loss={}\n", model.spec.loss.name()));
    out.push_str(&format!("init_seed={}\n", model.spec.init_seed));
    out.push_str(&format!("rbf_bandwidth={}\n", model.spec.rbf_bandwidth));
    out.push_str(&format!("rbf_centers_set={}\n", model.rbf_centers_set));
    for l in 0..model.n_layers() {
        out.push_str(&format!("W{l}={}\n", join_floats(flat_rows(&model.weights[l]))));
        out.push_str(&format!("b{l}={}\n", join_floats(model.biases[l].iter().copied())));
    }
    out.push_str(&format!(
        "prelu={}\n",
        join_floats(model.prelu_slopes.iter().copied())
    ));
    std::fs::write(path, out)?;
    Ok(())
}

fn flat_rows(m: &Mat) -> impl Iterator<Item = f64> + '_ {
    (0..m.rows()).flat_map(move |r| m.row(r).iter().copied())
}

fn join_floats(vals: impl Iterator<Item = f64>) -> String {
    vals.map(|v| format!("{v}")).collect::<Vec<_>>().join(",")
}

pub fn load_checkpoint(path: &Path) -> Result<MlpModel> {
    let text = std::fs::read_to_string(path)?;
    let mut fields = std::collections::BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(Error::Parse {
            line: line_no,
            msg: "expected key=value".into(),
        })?;
        fields.insert(key.to_string(), (line_no, value.to_string()));
    }
    let get = |key: &str| -> Result<(usize, String)> {
        fields
            .get(key)
            .cloned()
            .ok_or_else(|| Error::Parse { line: 1, msg: format!("missing field '{key}'") })
    };

    let (wline, widths_s) = get("widths")?;
    let widths: Vec<usize> = widths_s
        .split(',')
        .map(|t| t.parse().map_err(|_| Error::Parse { line: wline, msg: format!("bad width '{t}'") }))
        .collect::<Result<_>>()?;
    let spec = MlpSpec {
        layer_widths: widths,
        activation: Activation::parse(&get("activation")?.1)?,
        loss: LossKind::parse(&get("loss")?.1)?,
        init_seed: get("init_seed")?
            .1
            .parse()
            .map_err(|_| Error::Parse { line: 1, msg: "bad init_seed".into() })?,
        rbf_bandwidth: get("rbf_bandwidth")?
            .1
            .parse()
            .map_err(|_| Error::Parse { line: 1, msg: "bad rbf_bandwidth".into() })?,
    };
    let mut model = init_model(&spec)?;
    model.rbf_centers_set = get("rbf_centers_set")?.1 == "true";

    let parse_floats = |line: usize, s: &str, expect: usize| -> Result<Vec<f64>> {
        if s.is_empty() && expect == 0 {
            return Ok(Vec::new());
        }
        let vals: Vec<f64> = s
            .split(',')
            .map(|t| t.parse().map_err(|_| Error::Parse { line, msg: format!("bad float '{t}'") }))
            .collect::<Result<_>>()?;
        if vals.len() != expect {
            return Err(Error::Parse {
                line,
                msg: format!("expected {expect} values, found {}", vals.len()),
            });
        }
        Ok(vals)
    };

    for l in 0..model.n_layers() {
        let (line, s) = get(&format!("W{l}"))?;
        let (rows, cols) = (model.weights[l].rows(), model.weights[l].cols());
        let vals = parse_floats(line, &s, rows * cols)?;
        for r in 0..rows {
            model.weights[l].row_mut(r).copy_from_slice(&vals[r * cols..(r + 1) * cols]);
        }
        let (line, s) = get(&format!("b{l}"))?;
        let vals = parse_floats(line, &s, model.biases[l].len())?;
        model.biases[l].copy_from_slice(&vals);
    }
    let (line, s) = get("prelu")?;
    let vals = parse_floats(line, &s, model.prelu_slopes.len())?;
    model.prelu_slopes.copy_from_slice(&vals);
    Ok(model)
}
