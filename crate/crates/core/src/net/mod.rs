//! Feedforward mean function `f_w` for the rank-based AFT model: shared
//! weights across both members of a residual pair, exact reverse-mode
//! gradients of the mini-batch Gehan loss, and the SGD training loop.

mod optim;

pub use optim::{sgd_step, train, OptimizerKind, OptimizerState, TrainConfig};

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gehan::ResidualPair;

/// Elementwise activation of one layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Linear,
}

/// Width and activation of one layer. The final layer of any stack must be
/// a width-1 linear layer (the regression output).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub width: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn relu(width: usize) -> Self {
        Self { width, activation: Activation::Relu }
    }

    pub fn linear(width: usize) -> Self {
        Self { width, activation: Activation::Linear }
    }

    /// The 128/32/16 ReLU stack with a linear scalar output used for the
    /// simulation studies.
    pub fn simulation_stack() -> Vec<LayerSpec> {
        vec![Self::relu(128), Self::relu(32), Self::relu(16), Self::linear(1)]
    }

    /// Same widths with every activation linear, for purely linear means.
    pub fn simulation_linear_stack() -> Vec<LayerSpec> {
        vec![Self::linear(128), Self::linear(32), Self::linear(16), Self::linear(1)]
    }

    /// The deeper 128×5 / 64×2 / 32×2 ReLU stack used on real datasets.
    pub fn real_data_stack() -> Vec<LayerSpec> {
        let mut layers = vec![Self::relu(128); 5];
        layers.extend(vec![Self::relu(64); 2]);
        layers.extend(vec![Self::relu(32); 2]);
        layers.push(Self::linear(1));
        layers
    }
}

/// One dense layer: `out × in` weights, `out` biases, and an activation.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
}

/// The single shared parameter set evaluated on both members of a pair.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    input_dim: usize,
    layers: Vec<Layer>,
}

impl NetworkParams {
    pub fn new(input_dim: usize, layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument("network needs at least one layer".into()));
        }
        let mut expected_in = input_dim;
        for (k, layer) in layers.iter().enumerate() {
            if layer.weights.ncols() != expected_in {
                return Err(Error::Dimension(format!(
                    "layer {k} expects input {} but receives {expected_in}",
                    layer.weights.ncols()
                )));
            }
            if layer.bias.len() != layer.weights.nrows() {
                return Err(Error::Dimension(format!(
                    "layer {k} has {} biases for {} outputs",
                    layer.bias.len(),
                    layer.weights.nrows()
                )));
            }
            expected_in = layer.weights.nrows();
        }
        let last = layers.last().expect("non-empty");
        if last.weights.nrows() != 1 || last.activation != Activation::Linear {
            return Err(Error::InvalidArgument(
                "the final layer must be a width-1 linear output".into(),
            ));
        }
        Ok(Self { input_dim, layers })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    /// Layer widths and activations, reconstructing the originating specs.
    pub fn layer_specs(&self) -> Vec<LayerSpec> {
        self.layers
            .iter()
            .map(|l| LayerSpec { width: l.weights.nrows(), activation: l.activation })
            .collect()
    }

    /// Total number of scalar parameters.
    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }
}

/// Gradient (or momentum/moment buffer) with the same shape as the network.
#[derive(Debug, Clone)]
pub struct NetworkGrads {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl NetworkGrads {
    pub fn zeros_like(params: &NetworkParams) -> Self {
        Self {
            weights: params.layers.iter().map(|l| Array2::zeros(l.weights.dim())).collect(),
            biases: params.layers.iter().map(|l| Array1::zeros(l.bias.len())).collect(),
        }
    }

    pub fn scale(&mut self, c: f64) {
        for w in &mut self.weights {
            *w *= c;
        }
        for b in &mut self.biases {
            *b *= c;
        }
    }

    fn matches(&self, params: &NetworkParams) -> bool {
        self.weights.len() == params.layers.len()
            && self
                .weights
                .iter()
                .zip(&params.layers)
                .all(|(g, l)| g.dim() == l.weights.dim())
            && self
                .biases
                .iter()
                .zip(&params.layers)
                .all(|(g, l)| g.len() == l.bias.len())
    }
}

/// Weights drawn from `N(0, 2 / fan_in)` per layer (suited to ReLU), biases
/// zero. Deterministic given the generator state.
pub fn init_params<R: Rng>(
    specs: &[LayerSpec],
    input_dim: usize,
    rng: &mut R,
) -> Result<NetworkParams> {
    if specs.is_empty() {
        return Err(Error::InvalidArgument("empty layer list".into()));
    }
    if input_dim == 0 {
        return Err(Error::InvalidArgument("input dimension must be positive".into()));
    }
    if specs.iter().any(|s| s.width == 0) {
        return Err(Error::InvalidArgument("layer widths must be positive".into()));
    }
    let mut layers = Vec::with_capacity(specs.len());
    let mut fan_in = input_dim;
    for spec in specs {
        let sd = (2.0 / fan_in as f64).sqrt();
        let dist = Normal::new(0.0, sd).expect("finite sd");
        let weights =
            Array2::from_shape_fn((spec.width, fan_in), |_| dist.sample(rng));
        layers.push(Layer {
            weights,
            bias: Array1::zeros(spec.width),
            activation: spec.activation,
        });
        fan_in = spec.width;
    }
    NetworkParams::new(input_dim, layers)
}

/// Forward pass over a batch of rows; returns per-layer post-activations
/// (index 0 is the input) and pre-activations.
fn forward_cached(params: &NetworkParams, x: &Array2<f64>) -> (Vec<Array2<f64>>, Vec<Array2<f64>>) {
    let mut acts: Vec<Array2<f64>> = Vec::with_capacity(params.layers.len() + 1);
    let mut preacts: Vec<Array2<f64>> = Vec::with_capacity(params.layers.len());
    acts.push(x.clone());
    for layer in &params.layers {
        let z = acts.last().expect("input present").dot(&layer.weights.t()) + &layer.bias;
        let a = match layer.activation {
            Activation::Linear => z.clone(),
            Activation::Relu => z.mapv(|v| v.max(0.0)),
        };
        preacts.push(z);
        acts.push(a);
    }
    (acts, preacts)
}

/// Per-layer post-activations (index 0 is the input) and pre-activations
/// over a batch of rows, for diagnostics and gradient checks.
pub fn forward_trace(
    params: &NetworkParams,
    x: &Array2<f64>,
) -> Result<(Vec<Array2<f64>>, Vec<Array2<f64>>)> {
    if x.ncols() != params.input_dim {
        return Err(Error::Dimension(format!(
            "input has {} columns, network expects {}",
            x.ncols(),
            params.input_dim
        )));
    }
    Ok(forward_cached(params, x))
}

/// Scalar network output for one covariate vector.
pub fn forward(params: &NetworkParams, x: &[f64]) -> Result<f64> {
    if x.len() != params.input_dim {
        return Err(Error::Dimension(format!(
            "input has {} coordinates, network expects {}",
            x.len(),
            params.input_dim
        )));
    }
    let row = Array2::from_shape_vec((1, x.len()), x.to_vec()).expect("shape");
    let (acts, _) = forward_cached(params, &row);
    Ok(acts.last().expect("output")[(0, 0)])
}

/// Row-wise network output over a covariate matrix.
pub fn predict(params: &NetworkParams, covariates: &Array2<f64>) -> Result<Vec<f64>> {
    if covariates.ncols() != params.input_dim {
        return Err(Error::Dimension(format!(
            "covariates have {} columns, network expects {}",
            covariates.ncols(),
            params.input_dim
        )));
    }
    let (acts, _) = forward_cached(params, covariates);
    Ok(acts.last().expect("output").column(0).to_vec())
}

/// Regularization weights for [`pair_loss_and_grad`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Penalties {
    /// Coefficient on `Σ_l ‖W_l‖²` (biases are not penalized).
    pub l2_weight: f64,
    /// Coefficient on the hidden post-activation ℓ2 terms, averaged over the
    /// rows of the batch.
    pub activity: f64,
}

impl Penalties {
    pub fn none() -> Self {
        Self { l2_weight: 0.0, activity: 0.0 }
    }
}

/// A mini-batch of residual pairs viewed against the full covariate matrix:
/// pair `k` supplies `(x_{i_k}, x_{j_k}, log Y_{i_k}, log Y_{j_k})`.
#[derive(Debug, Clone, Copy)]
pub struct PairBatch<'a> {
    covariates: &'a Array2<f64>,
    log_times: &'a [f64],
    pairs: &'a [ResidualPair],
}

impl<'a> PairBatch<'a> {
    pub fn new(
        covariates: &'a Array2<f64>,
        log_times: &'a [f64],
        pairs: &'a [ResidualPair],
    ) -> Result<Self> {
        let n = covariates.nrows();
        if log_times.len() != n {
            return Err(Error::Dimension(format!(
                "{} log-times for {} covariate rows",
                log_times.len(),
                n
            )));
        }
        for pair in pairs {
            for idx in [pair.i, pair.j] {
                if idx >= n {
                    return Err(Error::IndexOutOfRange { index: idx, len: n });
                }
            }
        }
        Ok(Self { covariates, log_times, pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// How the rank term aggregates over the batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RankReduction {
    /// Plain sum over pairs (the mini-batch loss definition).
    Sum,
    /// Sum divided by the number of pairs. The training loop uses this so
    /// the published learning rates, which assume batch-mean gradients,
    /// apply unchanged. Penalty terms are never rescaled.
    MeanOverPairs,
}

/// Mini-batch Gehan loss plus penalties, and its exact gradient with respect
/// to the shared parameters (both branch passes accumulate into one
/// gradient).
pub fn pair_loss_and_grad(
    params: &NetworkParams,
    batch: &PairBatch<'_>,
    penalties: &Penalties,
) -> Result<(f64, NetworkGrads)> {
    pair_loss_and_grad_with(params, batch, penalties, RankReduction::Sum)
}

pub(crate) fn pair_loss_and_grad_with(
    params: &NetworkParams,
    batch: &PairBatch<'_>,
    penalties: &Penalties,
    reduction: RankReduction,
) -> Result<(f64, NetworkGrads)> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty pair batch".into()));
    }
    if batch.covariates.ncols() != params.input_dim {
        return Err(Error::Dimension(format!(
            "covariates have {} columns, network expects {}",
            batch.covariates.ncols(),
            params.input_dim
        )));
    }
    let m = batch.len();
    let rows = 2 * m;
    let p = params.input_dim;

    // Stack the anchor rows first, the partner rows after.
    let mut x = Array2::zeros((rows, p));
    for (k, pair) in batch.pairs.iter().enumerate() {
        x.row_mut(k).assign(&batch.covariates.row(pair.i));
        x.row_mut(m + k).assign(&batch.covariates.row(pair.j));
    }

    let (acts, preacts) = forward_cached(params, &x);
    let out = acts.last().expect("output").column(0).to_owned();

    // Rank term: [e_i − e_j]^− is active exactly when e_i < e_j, and then
    // d/d f(x_i) = +1, d/d f(x_j) = −1.
    let mut rank_loss = 0.0;
    let mut gout = Array2::zeros((rows, 1));
    for (k, pair) in batch.pairs.iter().enumerate() {
        let e_i = batch.log_times[pair.i] - out[k];
        let e_j = batch.log_times[pair.j] - out[m + k];
        let margin = e_j - e_i;
        if margin > 0.0 {
            rank_loss += margin;
            gout[(k, 0)] = 1.0;
            gout[(m + k, 0)] = -1.0;
        }
    }
    let rank_scale = match reduction {
        RankReduction::Sum => 1.0,
        RankReduction::MeanOverPairs => 1.0 / m as f64,
    };
    rank_loss *= rank_scale;
    gout *= rank_scale;

    // Penalty terms. Activity applies to hidden post-activations only,
    // averaged over the rows of the stacked batch.
    let mut penalty_loss = 0.0;
    if penalties.l2_weight != 0.0 {
        penalty_loss += penalties.l2_weight
            * params
                .layers
                .iter()
                .map(|l| l.weights.iter().map(|w| w * w).sum::<f64>())
                .sum::<f64>();
    }
    let act_scale = penalties.activity / rows as f64;
    if penalties.activity != 0.0 {
        for hidden in &acts[1..params.layers.len()] {
            penalty_loss += act_scale * hidden.iter().map(|a| a * a).sum::<f64>();
        }
    }

    // Reverse pass.
    let mut grads = NetworkGrads::zeros_like(params);
    let layer_count = params.layers.len();
    let mut delta = gout; // dL/dz of the final linear layer
    for l in (0..layer_count).rev() {
        let layer = &params.layers[l];
        grads.weights[l] = delta.t().dot(&acts[l]);
        if penalties.l2_weight != 0.0 {
            grads.weights[l].scaled_add(2.0 * penalties.l2_weight, &layer.weights);
        }
        grads.biases[l] = delta.sum_axis(Axis(0));
        if l > 0 {
            let mut da = delta.dot(&layer.weights);
            if penalties.activity != 0.0 {
                da.scaled_add(2.0 * act_scale, &acts[l]);
            }
            let prev = &params.layers[l - 1];
            delta = match prev.activation {
                Activation::Linear => da,
                Activation::Relu => {
                    ndarray::Zip::from(&mut da).and(&preacts[l - 1]).for_each(|d, &z| {
                        if z <= 0.0 {
                            *d = 0.0;
                        }
                    });
                    da
                }
            };
        }
    }

    Ok((rank_loss + penalty_loss, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gehan;
    use ndarray::arr2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn init_shapes_single_linear_layer() {
        let params = init_params(&[LayerSpec::linear(1)], 3, &mut rng(0)).unwrap();
        assert_eq!(params.layer_count(), 1);
        assert_eq!(params.layers()[0].weights.dim(), (1, 3));
        assert_eq!(params.layers()[0].bias.len(), 1);
        assert!(params.layers()[0].bias.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn init_is_deterministic_per_seed() {
        let specs = LayerSpec::simulation_stack();
        let a = init_params(&specs, 3, &mut rng(5)).unwrap();
        let b = init_params(&specs, 3, &mut rng(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn init_variance_scales_with_fan_in() {
        let specs = [LayerSpec::relu(100), LayerSpec::linear(1)];
        let params = init_params(&specs, 128, &mut rng(7)).unwrap();
        let w = &params.layers()[0].weights;
        let n = w.len() as f64; // 12800 ≥ 10⁴ draws
        let mean = w.sum() / n;
        let var = w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let expect = 2.0 / 128.0;
        assert!(
            (var - expect).abs() / expect < 0.2,
            "variance {var} vs expected {expect}"
        );
    }

    #[test]
    fn init_rejects_bad_specs() {
        assert!(init_params(&[], 3, &mut rng(0)).is_err());
        assert!(init_params(&[LayerSpec::relu(0), LayerSpec::linear(1)], 3, &mut rng(0)).is_err());
        // Final layer must be width-1 linear.
        assert!(init_params(&[LayerSpec::relu(4)], 3, &mut rng(0)).is_err());
        assert!(init_params(&[LayerSpec::linear(2)], 3, &mut rng(0)).is_err());
    }

    #[test]
    fn forward_zero_network_is_zero() {
        let mut params = init_params(&LayerSpec::simulation_stack(), 3, &mut rng(1)).unwrap();
        for layer in params.layers_mut() {
            layer.weights.fill(0.0);
            layer.bias.fill(0.0);
        }
        assert_eq!(forward(&params, &[0.4, -1.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn forward_single_linear_layer_is_dot_product() {
        let layer = Layer {
            weights: arr2(&[[1.0, 2.0, 2.0]]),
            bias: Array1::zeros(1),
            activation: Activation::Linear,
        };
        let params = NetworkParams::new(3, vec![layer]).unwrap();
        assert_eq!(forward(&params, &[1.0, 1.0, 1.0]).unwrap(), 5.0);
    }

    #[test]
    fn forward_relu_kills_negative_preactivation() {
        let hidden = Layer {
            weights: arr2(&[[-1.0]]),
            bias: Array1::zeros(1),
            activation: Activation::Relu,
        };
        let output = Layer {
            weights: arr2(&[[1.0]]),
            bias: Array1::zeros(1),
            activation: Activation::Linear,
        };
        let params = NetworkParams::new(1, vec![hidden, output]).unwrap();
        assert_eq!(forward(&params, &[3.0]).unwrap(), 0.0);
    }

    #[test]
    fn forward_rejects_dimension_mismatch() {
        let params = init_params(&[LayerSpec::linear(1)], 3, &mut rng(2)).unwrap();
        assert!(forward(&params, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn predict_matches_forward_rowwise() {
        let params = init_params(&LayerSpec::simulation_stack(), 4, &mut rng(3)).unwrap();
        let x = Array2::from_shape_fn((17, 4), |(r, c)| ((r * 7 + c) as f64).sin());
        let batch = predict(&params, &x).unwrap();
        for (k, row) in x.rows().into_iter().enumerate() {
            let single = forward(&params, row.as_slice().unwrap()).unwrap();
            assert!(
                (single - batch[k]).abs() < 1e-10,
                "row {k}: {single} vs {}",
                batch[k]
            );
        }
    }

    #[test]
    fn predict_zero_network_is_zero_vector() {
        let mut params = init_params(&LayerSpec::simulation_stack(), 3, &mut rng(40)).unwrap();
        for layer in params.layers_mut() {
            layer.weights.fill(0.0);
            layer.bias.fill(0.0);
        }
        let x = Array2::from_shape_fn((6, 3), |(r, c)| (r + c) as f64);
        assert_eq!(predict(&params, &x).unwrap(), vec![0.0; 6]);
    }

    #[test]
    fn predict_linear_layer_reproduces_linear_mean() {
        let layer = Layer {
            weights: arr2(&[[1.0, 2.0, 2.0]]),
            bias: Array1::zeros(1),
            activation: Activation::Linear,
        };
        let params = NetworkParams::new(3, vec![layer]).unwrap();
        let x = arr2(&[[1.0, 0.0, 0.0], [0.5, 1.0, -1.0], [1.0, 1.0, 1.0]]);
        let pred = predict(&params, &x).unwrap();
        let expect = [1.0, 0.5 + 2.0 - 2.0, 5.0];
        for (a, b) in pred.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    fn toy_batch_data(
        n: usize,
        p: usize,
        seed: u64,
    ) -> (Array2<f64>, Vec<f64>, Vec<ResidualPair>) {
        let mut r = rng(seed);
        let x = Array2::from_shape_fn((n, p), |_| r.random::<f64>() * 2.0 - 1.0);
        let log_times: Vec<f64> = (0..n).map(|_| r.random::<f64>() * 4.0 - 2.0).collect();
        let mut pairs = Vec::new();
        for _ in 0..5 {
            let i = r.random_range(0..n);
            let mut j = r.random_range(0..n);
            while j == i {
                j = r.random_range(0..n);
            }
            pairs.push(ResidualPair { i, j });
        }
        (x, log_times, pairs)
    }

    #[test]
    fn inactive_batch_has_zero_rank_gradient() {
        // Zero network on data where every pair satisfies e_i ≥ e_j.
        let mut params = init_params(&LayerSpec::simulation_stack(), 2, &mut rng(4)).unwrap();
        for layer in params.layers_mut() {
            layer.weights.fill(0.0);
        }
        let x = Array2::zeros((2, 2));
        let log_times = vec![1.0, 0.0]; // e_0 > e_1 for the zero net
        let pairs = vec![ResidualPair { i: 0, j: 1 }];
        let batch = PairBatch::new(&x, &log_times, &pairs).unwrap();
        let (loss, grads) = pair_loss_and_grad(&params, &batch, &Penalties::none()).unwrap();
        assert_eq!(loss, 0.0);
        for w in &grads.weights {
            assert!(w.iter().all(|&g| g == 0.0));
        }
        for b in &grads.biases {
            assert!(b.iter().all(|&g| g == 0.0));
        }
    }

    #[test]
    fn gradients_match_central_differences() {
        let specs = [LayerSpec::relu(6), LayerSpec::relu(4), LayerSpec::linear(1)];
        let mut params = init_params(&specs, 3, &mut rng(8)).unwrap();
        let (x, log_times, pairs) = toy_batch_data(9, 3, 9);
        let batch = PairBatch::new(&x, &log_times, &pairs).unwrap();
        let penalties = Penalties { l2_weight: 0.01, activity: 0.01 };
        let (_, grads) = pair_loss_and_grad(&params, &batch, &penalties).unwrap();

        let h = 1e-5;
        let mut max_rel = 0.0_f64;
        for l in 0..params.layer_count() {
            for idx in 0..params.layers()[l].weights.len() {
                let (r, c) = (idx / params.layers()[l].weights.ncols(),
                              idx % params.layers()[l].weights.ncols());
                let orig = params.layers()[l].weights[(r, c)];
                params.layers_mut()[l].weights[(r, c)] = orig + h;
                let (lp, _) = pair_loss_and_grad(&params, &batch, &penalties).unwrap();
                params.layers_mut()[l].weights[(r, c)] = orig - h;
                let (lm, _) = pair_loss_and_grad(&params, &batch, &penalties).unwrap();
                params.layers_mut()[l].weights[(r, c)] = orig;
                let fd = (lp - lm) / (2.0 * h);
                let g = grads.weights[l][(r, c)];
                let rel = (fd - g).abs() / g.abs().max(1.0);
                max_rel = max_rel.max(rel);
            }
            for b in 0..params.layers()[l].bias.len() {
                let orig = params.layers()[l].bias[b];
                params.layers_mut()[l].bias[b] = orig + h;
                let (lp, _) = pair_loss_and_grad(&params, &batch, &penalties).unwrap();
                params.layers_mut()[l].bias[b] = orig - h;
                let (lm, _) = pair_loss_and_grad(&params, &batch, &penalties).unwrap();
                params.layers_mut()[l].bias[b] = orig;
                let fd = (lp - lm) / (2.0 * h);
                let g = grads.biases[l][b];
                max_rel = max_rel.max((fd - g).abs() / g.abs().max(1.0));
            }
        }
        assert!(max_rel < 1e-4, "max relative gradient error {max_rel}");
    }

    #[test]
    fn linear_net_gradient_reduces_to_weighted_subgradient() {
        // For f(x) = w·x the weight gradient of the batch rank loss equals
        // Σ_k g_k x_k with g the per-subject prediction subgradient
        // restricted to the batch pairs.
        let mut r = rng(12);
        let n = 8;
        let p = 3;
        let x = Array2::from_shape_fn((n, p), |_| r.random::<f64>() * 2.0 - 1.0);
        let log_times: Vec<f64> = (0..n).map(|_| r.random::<f64>() * 4.0 - 2.0).collect();
        let events = vec![true; n];
        let pairs = gehan::all_event_pairs(&events);

        let layer = Layer {
            weights: arr2(&[[0.3, -0.8, 0.5]]),
            bias: Array1::zeros(1),
            activation: Activation::Linear,
        };
        let params = NetworkParams::new(p, vec![layer]).unwrap();
        let batch = PairBatch::new(&x, &log_times, &pairs).unwrap();
        let (_, grads) = pair_loss_and_grad(&params, &batch, &Penalties::none()).unwrap();

        let pred = predict(&params, &x).unwrap();
        let res: Vec<f64> = log_times.iter().zip(&pred).map(|(y, f)| y - f).collect();
        let g = gehan::gehan_subgradient(
            &crate::data::ResidualVector::new(res).unwrap(),
            &events,
        )
        .unwrap();
        for c in 0..p {
            let expected: f64 = (0..n).map(|k| g[k] * x[(k, c)]).sum();
            let got = grads.weights[0][(0, c)];
            assert!(
                (expected - got).abs() < 1e-10,
                "column {c}: {expected} vs {got}"
            );
        }
    }

    #[test]
    fn output_bias_shift_moves_predictions_not_rank_loss() {
        let specs = [LayerSpec::relu(5), LayerSpec::linear(1)];
        let mut params = init_params(&specs, 3, &mut rng(14)).unwrap();
        let (x, log_times, pairs) = toy_batch_data(7, 3, 15);
        let batch = PairBatch::new(&x, &log_times, &pairs).unwrap();
        let (loss0, _) = pair_loss_and_grad(&params, &batch, &Penalties::none()).unwrap();
        let pred0 = predict(&params, &x).unwrap();

        let shift = 1.37;
        let last = params.layer_count() - 1;
        params.layers_mut()[last].bias[0] += shift;
        let (loss1, _) = pair_loss_and_grad(&params, &batch, &Penalties::none()).unwrap();
        let pred1 = predict(&params, &x).unwrap();

        for (a, b) in pred0.iter().zip(&pred1) {
            assert!((a + shift - b).abs() < 1e-12);
        }
        assert!((loss0 - loss1).abs() < 1e-9, "{loss0} vs {loss1}");
    }

    #[test]
    fn both_pair_branches_share_one_parameter_set() {
        // Perturbing any single parameter moves both branch outputs: the
        // two forward passes read the same NetworkParams.
        let specs = [LayerSpec::relu(4), LayerSpec::linear(1)];
        let mut params = init_params(&specs, 2, &mut rng(18)).unwrap();
        let xi = [0.4, -0.9];
        let xj = [-1.1, 0.3];
        let fi0 = forward(&params, &xi).unwrap();
        let fj0 = forward(&params, &xj).unwrap();
        params.layers_mut()[1].weights[(0, 0)] += 0.5;
        params.layers_mut()[0].bias[0] += 0.25;
        let fi1 = forward(&params, &xi).unwrap();
        let fj1 = forward(&params, &xj).unwrap();
        assert_ne!(fi0, fi1);
        assert_ne!(fj0, fj1);
    }

    #[test]
    fn rejects_empty_batch_and_bad_indices() {
        let params = init_params(&[LayerSpec::linear(1)], 2, &mut rng(16)).unwrap();
        let x = Array2::zeros((3, 2));
        let log_times = vec![0.0; 3];
        let batch = PairBatch::new(&x, &log_times, &[]).unwrap();
        assert!(pair_loss_and_grad(&params, &batch, &Penalties::none()).is_err());
        assert!(PairBatch::new(&x, &log_times, &[ResidualPair { i: 0, j: 3 }]).is_err());
        assert!(PairBatch::new(&x, &log_times[..2], &[]).is_err());
    }
}
