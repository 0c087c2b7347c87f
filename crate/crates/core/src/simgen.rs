//! Synthetic right-censored data generation: three mean-function shapes,
//! four standardized error laws, uniform censoring scaled by `tau`, optional
//! pure-noise covariates, and the replicated bias/variance protocol.

use ndarray::{Array2, ArrayView1};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gumbel, Normal, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::SurvivalDataset;
use crate::error::{Error, Result};

/// Euler–Mascheroni constant: mean of the standard (max) Gumbel law.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Shape of the true mean function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanKind {
    /// `2·x1 + x2·x3 + 2·x3` — nonlinear with an interaction.
    Interaction,
    /// `x1 + 0.5·x2² + exp(0.1·x3)` — additive nonlinear.
    Gam,
    /// `x1 + 2·x2 + 2·x3`.
    Linear,
}

/// Error law, standardized to zero mean and unit variance using exact
/// analytic moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorDist {
    Gaussian,
    Gumbel,
    Laplace,
    T3,
}

/// One simulation scenario: mean shape, error law, censoring scale `tau`,
/// sample sizes, number of pure-noise covariate dimensions, and the seed
/// all random streams derive from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub mean_kind: MeanKind,
    pub error_dist: ErrorDist,
    pub tau: f64,
    pub n_train: usize,
    pub n_test: usize,
    #[serde(default)]
    pub noise_dims: usize,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if self.n_train == 0 || self.n_test == 0 {
            return Err(Error::InvalidArgument("sample sizes must be positive".into()));
        }
        Ok(())
    }

    /// Covariate dimension: the three structural columns plus noise columns.
    pub fn dim(&self) -> usize {
        3 + self.noise_dims
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            mean_kind: MeanKind::Interaction,
            error_dist: ErrorDist::Gaussian,
            tau: 40.0,
            n_train: 1000,
            n_test: 2000,
            noise_dims: 0,
            seed: 0,
        }
    }
}

/// Covariate matrix `n × (3 + noise_dims)`: a Bernoulli(0.5) column, then
/// two chained conditional normals, then i.i.d. standard normal noise.
pub fn gen_covariates<R: Rng>(n: usize, noise_dims: usize, rng: &mut R) -> Result<Array2<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let p = 3 + noise_dims;
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut x = Array2::zeros((n, p));
    for mut row in x.rows_mut() {
        let x1 = if rng.random_bool(0.5) { 1.0 } else { 0.0 };
        let x2 = x1 / 2.0 + std_normal.sample(rng);
        let x3 = x2 / 2.0 + std_normal.sample(rng);
        row[0] = x1;
        row[1] = x2;
        row[2] = x3;
        for k in 0..noise_dims {
            row[3 + k] = std_normal.sample(rng);
        }
    }
    Ok(x)
}

/// True mean at one covariate row. Noise coordinates beyond the first three
/// never contribute.
pub fn mean_function(kind: MeanKind, x: ArrayView1<'_, f64>) -> Result<f64> {
    if x.len() < 3 {
        return Err(Error::Dimension(format!(
            "mean function needs at least 3 coordinates, got {}",
            x.len()
        )));
    }
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    Ok(match kind {
        MeanKind::Interaction => 2.0 * x1 + x2 * x3 + 2.0 * x3,
        MeanKind::Gam => x1 + 0.5 * x2 * x2 + (0.1 * x3).exp(),
        MeanKind::Linear => x1 + 2.0 * x2 + 2.0 * x3,
    })
}

/// Draws from the named law, shifted and scaled to zero mean and unit
/// variance using the law's exact moments.
pub fn gen_errors<R: Rng>(dist: ErrorDist, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let mut out = Vec::with_capacity(n);
    match dist {
        ErrorDist::Gaussian => {
            let d = Normal::new(0.0, 1.0).expect("unit normal");
            out.extend((0..n).map(|_| d.sample(rng)));
        }
        ErrorDist::Gumbel => {
            // Standard Gumbel has mean γ and variance π²/6.
            let d = Gumbel::new(0.0, 1.0).expect("standard gumbel");
            let sd = std::f64::consts::PI / 6.0_f64.sqrt();
            out.extend((0..n).map(|_| (d.sample(rng) - EULER_GAMMA) / sd));
        }
        ErrorDist::Laplace => {
            // Inverse-CDF draw from Laplace(0, 1), variance 2.
            let sd = 2.0_f64.sqrt();
            out.extend((0..n).map(|_| {
                let u: f64 = rng.random::<f64>() - 0.5;
                let tail = (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE);
                -u.signum() * tail.ln() / sd
            }));
        }
        ErrorDist::T3 => {
            // t(3) has variance 3/(3−2) = 3.
            let d = StudentT::new(3.0).expect("t with 3 df");
            let sd = 3.0_f64.sqrt();
            out.extend((0..n).map(|_| d.sample(rng) / sd));
        }
    }
    Ok(out)
}

/// A generated dataset together with the latent quantities a debug caller
/// may want to inspect.
#[derive(Debug, Clone)]
pub struct GeneratedData {
    pub dataset: SurvivalDataset,
    /// True mean `f(x_i)` per subject.
    pub truth: Vec<f64>,
    /// Latent failure times `T_i` (only retained by the debug generator).
    pub latent_failure: Option<Vec<f64>>,
    /// Latent censoring times `C_i` (only retained by the debug generator).
    pub latent_censoring: Option<Vec<f64>>,
}

fn generate(
    cfg: &ScenarioConfig,
    n: usize,
    rng: &mut ChaCha8Rng,
    keep_latent: bool,
) -> Result<GeneratedData> {
    cfg.validate()?;
    let x = gen_covariates(n, cfg.noise_dims, rng)?;
    let eps = gen_errors(cfg.error_dist, n, rng)?;
    let mut truth = Vec::with_capacity(n);
    let mut times = Vec::with_capacity(n);
    let mut events = Vec::with_capacity(n);
    let mut latent_t = keep_latent.then(|| Vec::with_capacity(n));
    let mut latent_c = keep_latent.then(|| Vec::with_capacity(n));
    for i in 0..n {
        let f = mean_function(cfg.mean_kind, x.row(i))?;
        let t = (f + eps[i]).exp();
        let c = cfg.tau * rng.random::<f64>();
        truth.push(f);
        times.push(t.min(c));
        events.push(t <= c);
        if let Some(v) = latent_t.as_mut() {
            v.push(t);
        }
        if let Some(v) = latent_c.as_mut() {
            v.push(c);
        }
    }
    Ok(GeneratedData {
        dataset: SurvivalDataset::new(times, events, x)?,
        truth,
        latent_failure: latent_t,
        latent_censoring: latent_c,
    })
}

/// Generates `n` subjects under the scenario: `T = exp(f(x) + ε)`,
/// `C = tau·U`, `Y = min(T, C)`, `Δ = I(T ≤ C)`.
pub fn gen_dataset(cfg: &ScenarioConfig, n: usize, rng: &mut ChaCha8Rng) -> Result<GeneratedData> {
    generate(cfg, n, rng, false)
}

/// Like [`gen_dataset`] but retains the latent `(T, C)` draws so tests can
/// reconstruct `Y` and `Δ`.
pub fn gen_dataset_with_latent(
    cfg: &ScenarioConfig,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<GeneratedData> {
    generate(cfg, n, rng, true)
}

/// Independent train/test draws for one replicate. Stream 0 of the scenario
/// seed is reserved for shared fixtures; replicate `r` reads stream `r + 1`.
pub fn gen_replicate(
    cfg: &ScenarioConfig,
    replicate: u64,
) -> Result<(GeneratedData, GeneratedData)> {
    let mut rng = replicate_rng(cfg.seed, replicate);
    let train = gen_dataset(cfg, cfg.n_train, &mut rng)?;
    let test = gen_dataset(cfg, cfg.n_test, &mut rng)?;
    Ok((train, test))
}

/// Seeded stream for replicate `r`; distinct replicates never overlap.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate.wrapping_add(1));
    rng
}

/// A fitter whose repeated fits the bias/variance protocol summarizes.
pub trait MeanFitter: Sync {
    fn name(&self) -> String;

    /// Fits on `train` and returns mean predictions at `test_covariates`,
    /// already centered so they estimate `f` itself.
    fn fit_predict(
        &self,
        train: &SurvivalDataset,
        test_covariates: &Array2<f64>,
        seed: u64,
    ) -> Result<Vec<f64>>;
}

/// Per-fitter replication summary over a fixed covariate grid.
#[derive(Debug, Clone)]
pub struct BiasVarianceReport {
    pub fitter: String,
    pub replicates: usize,
    /// `{mean_r f̂_r(x) − f(x)}²` per grid point.
    pub squared_bias: Vec<f64>,
    /// Population variance of `f̂_r(x)` over replicates, per grid point.
    pub variance: Vec<f64>,
    /// Mean over replicates of `{f̂_r(x) − f(x)}²` per grid point.
    pub mse: Vec<f64>,
    pub mean_squared_bias: f64,
    pub mean_variance: f64,
    pub mean_mse: f64,
}

/// Replicated bias/variance decomposition on a fixed covariate grid.
///
/// Draws `cfg.n_test` fixed covariate points, fits each fitter once per
/// replicate on an independent training draw and decomposes the pointwise
/// MSE into squared bias and variance (`mse = squared_bias + variance`
/// exactly, population-variance convention).
pub fn bias_variance_protocol(
    cfg: &ScenarioConfig,
    replicates: usize,
    fitters: &[&dyn MeanFitter],
) -> Result<Vec<BiasVarianceReport>> {
    cfg.validate()?;
    if replicates < 2 {
        return Err(Error::InvalidArgument(
            "bias/variance decomposition needs at least 2 replicates".into(),
        ));
    }
    // Fixed grid from the scenario's reserved stream.
    let mut grid_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    grid_rng.set_stream(0);
    let grid = gen_covariates(cfg.n_test, cfg.noise_dims, &mut grid_rng)?;
    let truth: Vec<f64> = grid
        .rows()
        .into_iter()
        .map(|row| mean_function(cfg.mean_kind, row))
        .collect::<Result<_>>()?;

    // predictions[fitter][replicate][point]
    let predictions: Vec<Vec<Vec<f64>>> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(cfg.seed, r);
            let train = gen_dataset(cfg, cfg.n_train, &mut rng)?;
            fitters
                .iter()
                .map(|f| f.fit_predict(&train.dataset, &grid, cfg.seed ^ r))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(vec![Vec::new(); fitters.len()], |mut acc, per_rep| {
            for (k, preds) in per_rep.into_iter().enumerate() {
                acc[k].push(preds);
            }
            acc
        });

    let m = cfg.n_test;
    let mut reports = Vec::with_capacity(fitters.len());
    for (fitter, preds) in fitters.iter().zip(predictions) {
        let mut squared_bias = vec![0.0; m];
        let mut variance = vec![0.0; m];
        let mut mse = vec![0.0; m];
        for point in 0..m {
            let vals: Vec<f64> = preds.iter().map(|rep| rep[point]).collect();
            let mean = vals.iter().sum::<f64>() / replicates as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / replicates as f64;
            let err = vals
                .iter()
                .map(|v| (v - truth[point]).powi(2))
                .sum::<f64>()
                / replicates as f64;
            squared_bias[point] = (mean - truth[point]).powi(2);
            variance[point] = var;
            mse[point] = err;
        }
        let avg = |v: &[f64]| v.iter().sum::<f64>() / m as f64;
        reports.push(BiasVarianceReport {
            fitter: fitter.name(),
            replicates,
            mean_squared_bias: avg(&squared_bias),
            mean_variance: avg(&variance),
            mean_mse: avg(&mse),
            squared_bias,
            variance,
            mse,
        });
    }
    Ok(reports)
}
