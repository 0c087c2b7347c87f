//! Optimizers and the training loop.

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    init_params, pair_loss_and_grad_with, LayerSpec, NetworkGrads, NetworkParams, PairBatch,
    Penalties, RankReduction,
};
use crate::data::SurvivalDataset;
use crate::error::{Error, Result};
use crate::gehan::{subsample_pairs, ResidualPair};

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    /// Momentum SGD with optional Nesterov lookahead and hyperbolic
    /// learning-rate decay.
    #[default]
    Sgd,
    /// Adam with the standard (0.9, 0.999, 1e-8) constants; the same decay
    /// schedule applies to its learning rate.
    Adam,
}

/// Training hyperparameters.
///
/// The defaults are the simulation setup: decay 1e-5, momentum 0.90 with
/// Nesterov, batch size 50, 500 epochs, both penalties 0.01, five partners
/// per event subject. Learning rates depend on sample size and error law;
/// see [`crate::experiment::paper_learning_rate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub nesterov: bool,
    /// Per-update decay: `lr_t = learning_rate / (1 + decay·t)`.
    pub decay: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub l2_weight_penalty: f64,
    pub activity_penalty: f64,
    /// Partners sampled per event subject (`s`).
    pub pairs_per_event: usize,
    pub seed: u64,
    pub optimizer: OptimizerKind,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 3e-4,
            momentum: 0.9,
            nesterov: true,
            decay: 1e-5,
            batch_size: 50,
            epochs: 500,
            l2_weight_penalty: 0.01,
            activity_penalty: 0.01,
            pairs_per_event: 5,
            seed: 0,
            optimizer: OptimizerKind::Sgd,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidArgument("learning rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidArgument("momentum must lie in [0, 1)".into()));
        }
        if self.decay < 0.0 {
            return Err(Error::InvalidArgument("decay must be non-negative".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be positive".into()));
        }
        if self.l2_weight_penalty < 0.0 || self.activity_penalty < 0.0 {
            return Err(Error::InvalidArgument("penalties must be non-negative".into()));
        }
        if self.pairs_per_event == 0 {
            return Err(Error::InvalidArgument("pairs per event must be positive".into()));
        }
        Ok(())
    }

    fn penalties(&self) -> Penalties {
        Penalties { l2_weight: self.l2_weight_penalty, activity: self.activity_penalty }
    }
}

/// Mutable optimizer state: the global update counter plus per-parameter
/// buffers (velocity for SGD; first and second moments for Adam).
#[derive(Debug, Clone)]
pub struct OptimizerState {
    kind: OptimizerKind,
    step_count: u64,
    slot1: NetworkGrads,
    slot2: Option<NetworkGrads>,
}

impl OptimizerState {
    pub fn new(params: &NetworkParams, kind: OptimizerKind) -> Self {
        Self {
            kind,
            step_count: 0,
            slot1: NetworkGrads::zeros_like(params),
            slot2: matches!(kind, OptimizerKind::Adam)
                .then(|| NetworkGrads::zeros_like(params)),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }
}

fn sgd_update(
    p: &mut Array2<f64>,
    pb: &mut Array1<f64>,
    g: &Array2<f64>,
    gb: &Array1<f64>,
    v: &mut Array2<f64>,
    vb: &mut Array1<f64>,
    lr_t: f64,
    momentum: f64,
    nesterov: bool,
) {
    // v ← momentum·v − lr_t·g, then either the lookahead update
    // p += momentum·v − lr_t·g or the plain p += v.
    v.zip_mut_with(g, |vv, &gg| *vv = momentum * *vv - lr_t * gg);
    vb.zip_mut_with(gb, |vv, &gg| *vv = momentum * *vv - lr_t * gg);
    if nesterov {
        ndarray::Zip::from(p).and(&*v).and(g).for_each(|pp, &vv, &gg| {
            *pp += momentum * vv - lr_t * gg;
        });
        ndarray::Zip::from(pb).and(&*vb).and(gb).for_each(|pp, &vv, &gg| {
            *pp += momentum * vv - lr_t * gg;
        });
    } else {
        *p += &*v;
        *pb += &*vb;
    }
}

#[allow(clippy::too_many_arguments)]
fn adam_update(
    p: &mut Array2<f64>,
    pb: &mut Array1<f64>,
    g: &Array2<f64>,
    gb: &Array1<f64>,
    m: &mut Array2<f64>,
    mb: &mut Array1<f64>,
    v: &mut Array2<f64>,
    vb: &mut Array1<f64>,
    lr_t: f64,
    t: u64,
) {
    let c1 = 1.0 - ADAM_BETA1.powi(t as i32);
    let c2 = 1.0 - ADAM_BETA2.powi(t as i32);
    m.zip_mut_with(g, |mm, &gg| *mm = ADAM_BETA1 * *mm + (1.0 - ADAM_BETA1) * gg);
    mb.zip_mut_with(gb, |mm, &gg| *mm = ADAM_BETA1 * *mm + (1.0 - ADAM_BETA1) * gg);
    v.zip_mut_with(g, |vv, &gg| *vv = ADAM_BETA2 * *vv + (1.0 - ADAM_BETA2) * gg * gg);
    vb.zip_mut_with(gb, |vv, &gg| *vv = ADAM_BETA2 * *vv + (1.0 - ADAM_BETA2) * gg * gg);
    ndarray::Zip::from(p).and(&*m).and(&*v).for_each(|pp, &mm, &vv| {
        *pp -= lr_t * (mm / c1) / ((vv / c2).sqrt() + ADAM_EPS);
    });
    ndarray::Zip::from(pb).and(&*mb).and(&*vb).for_each(|pp, &mm, &vv| {
        *pp -= lr_t * (mm / c1) / ((vv / c2).sqrt() + ADAM_EPS);
    });
}

/// One optimizer update. `lr_t = learning_rate / (1 + decay·t)` where `t`
/// counts previous updates.
pub fn sgd_step(
    params: &mut NetworkParams,
    grads: &NetworkGrads,
    state: &mut OptimizerState,
    config: &TrainConfig,
) -> Result<()> {
    if !grads.matches(params) {
        return Err(Error::Dimension("gradient shape does not match parameters".into()));
    }
    if !state.slot1.matches(params) {
        return Err(Error::Dimension("optimizer state does not match parameters".into()));
    }
    let lr_t = config.learning_rate / (1.0 + config.decay * state.step_count as f64);
    match state.kind {
        OptimizerKind::Sgd => {
            for (l, layer) in params.layers_mut().iter_mut().enumerate() {
                sgd_update(
                    &mut layer.weights,
                    &mut layer.bias,
                    &grads.weights[l],
                    &grads.biases[l],
                    &mut state.slot1.weights[l],
                    &mut state.slot1.biases[l],
                    lr_t,
                    config.momentum,
                    config.nesterov,
                );
            }
        }
        OptimizerKind::Adam => {
            let t = state.step_count + 1;
            let slot2 = state.slot2.as_mut().expect("adam state");
            for (l, layer) in params.layers_mut().iter_mut().enumerate() {
                adam_update(
                    &mut layer.weights,
                    &mut layer.bias,
                    &grads.weights[l],
                    &grads.biases[l],
                    &mut state.slot1.weights[l],
                    &mut state.slot1.biases[l],
                    &mut slot2.weights[l],
                    &mut slot2.biases[l],
                    lr_t,
                    t,
                );
            }
        }
    }
    state.step_count += 1;
    Ok(())
}

/// Trains the network: initializes parameters, sub-samples pairs once, then
/// runs `epochs` passes of shuffled mini-batches. Fully deterministic given
/// `config.seed`.
///
/// Each mini-batch gradient averages the rank term over the batch's pairs
/// (penalty gradients are added unscaled), matching the batch-mean
/// convention the published learning rates were tuned for.
pub fn train(
    dataset: &SurvivalDataset,
    layers: &[LayerSpec],
    config: &TrainConfig,
) -> Result<NetworkParams> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = init_params(layers, dataset.p(), &mut rng)?;
    let sample = subsample_pairs(dataset, config.pairs_per_event, &mut rng)?;
    let log_times = dataset.log_times();
    let penalties = config.penalties();

    let mut state = OptimizerState::new(&params, config.optimizer);
    let mut order: Vec<usize> = (0..sample.len()).collect();
    let mut batch_buf: Vec<ResidualPair> = Vec::with_capacity(config.batch_size);
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            batch_buf.clear();
            batch_buf.extend(chunk.iter().map(|&k| sample.pairs()[k]));
            let batch = PairBatch::new(dataset.covariates(), &log_times, &batch_buf)?;
            let (_, grads) = pair_loss_and_grad_with(
                &params,
                &batch,
                &penalties,
                RankReduction::MeanOverPairs,
            )?;
            sgd_step(&mut params, &grads, &mut state, config)?;
        }
    }
    Ok(params)
}
