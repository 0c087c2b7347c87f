//! Shared fixtures for the criterion benches.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use rankaft::data::{ResidualVector, SurvivalDataset};
use rankaft::gehan::{subsample_pairs, PairSample};

/// A synthetic all-event instance whose loss cost depends only on `n`.
pub struct LossFixture {
    pub dataset: SurvivalDataset,
    pub residuals: ResidualVector,
    pub sample: PairSample,
}

pub fn loss_fixture(n: usize, s: usize, seed: u64) -> LossFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let times: Vec<f64> = (0..n).map(|_| f64::exp(normal.sample(&mut rng))).collect();
    let dataset =
        SurvivalDataset::new(times, vec![true; n], Array2::zeros((n, 1))).expect("valid");
    let residuals = dataset.residuals(&vec![0.0; n]).expect("valid");
    let sample = subsample_pairs(&dataset, s, &mut rng).expect("valid");
    LossFixture { dataset, residuals, sample }
}

/// Covariates, log-times and a pair batch sized like one training step.
pub fn training_fixture(
    n: usize,
    p: usize,
    batch_pairs: usize,
    seed: u64,
) -> (Array2<f64>, Vec<f64>, Vec<rankaft::gehan::ResidualPair>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Array2::from_shape_fn((n, p), |_| rng.random::<f64>() * 2.0 - 1.0);
    let log_times: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
    let mut pairs = Vec::with_capacity(batch_pairs);
    for _ in 0..batch_pairs {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n);
        while j == i {
            j = rng.random_range(0..n);
        }
        pairs.push(rankaft::gehan::ResidualPair { i, j });
    }
    (x, log_times, pairs)
}
