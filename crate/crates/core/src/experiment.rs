//! Replication driver: fits the competing methods on simulated scenarios
//! and evaluates them on held-out draws.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{fit_paft_lognormal, fit_saft_gehan};
use crate::centering::{residual_location, InterceptRule};
use crate::data::SurvivalDataset;
use crate::error::Result;
use crate::metrics::{c_index, mse};
use crate::net::{predict, train, LayerSpec, TrainConfig};
use crate::simgen::{gen_replicate, ErrorDist, MeanFitter, MeanKind, ScenarioConfig};

/// The competing fitters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Feedforward network trained on the sub-sampled Gehan loss.
    Deep,
    /// Parametric linear AFT (log-normal maximum likelihood).
    Paft,
    /// Semiparametric linear AFT (induced-smoothed Gehan).
    Saft,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Deep => "deep",
            Method::Paft => "paft",
            Method::Saft => "saft",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "deep" => Ok(Method::Deep),
            "paft" => Ok(Method::Paft),
            "saft" => Ok(Method::Saft),
            other => Err(crate::Error::InvalidArgument(format!(
                "unknown method '{other}' (expected deep, paft or saft)"
            ))),
        }
    }
}

/// Learning rate by training-set size and error law.
pub fn paper_learning_rate(n_train: usize, error: ErrorDist) -> f64 {
    match (error, n_train >= 5000) {
        (ErrorDist::Gumbel, false) => 0.003,
        (ErrorDist::Gumbel, true) => 0.002,
        (_, false) => 0.0003,
        (_, true) => 0.0001,
    }
}

/// Network architecture used in the simulation studies: the ReLU stack for
/// nonlinear means, the all-linear stack when the mean is purely linear.
pub fn simulation_layers(kind: MeanKind) -> Vec<LayerSpec> {
    match kind {
        MeanKind::Linear => LayerSpec::simulation_linear_stack(),
        _ => LayerSpec::simulation_stack(),
    }
}

/// Training configuration for a simulated scenario with the published
/// defaults and the size/error-law learning rate.
pub fn simulation_train_config(scenario: &ScenarioConfig) -> TrainConfig {
    TrainConfig {
        learning_rate: paper_learning_rate(scenario.n_train, scenario.error_dist),
        seed: scenario.seed,
        ..TrainConfig::default()
    }
}

/// One method's test-set evaluation for one replicate.
#[derive(Debug, Clone, Copy)]
pub struct MethodEval {
    pub method: Method,
    pub mse: f64,
    pub c_index: f64,
}

/// Fits on `train`, predicts the test covariates, and re-centers the
/// predictions so they estimate `f` itself (rank losses leave the constant
/// unidentified).
fn fit_and_predict(
    method: Method,
    train_data: &SurvivalDataset,
    test_covariates: &Array2<f64>,
    layers: &[LayerSpec],
    cfg: &TrainConfig,
) -> Result<Vec<f64>> {
    match method {
        Method::Paft => {
            let fit = fit_paft_lognormal(train_data)?;
            fit.predict(test_covariates)
        }
        Method::Saft => {
            let fit = fit_saft_gehan(train_data)?;
            fit.predict(test_covariates)
        }
        Method::Deep => {
            let params = train(train_data, layers, cfg)?;
            let train_pred = predict(&params, train_data.covariates())?;
            let residuals: Vec<f64> = train_data
                .log_times()
                .iter()
                .zip(&train_pred)
                .map(|(y, f)| y - f)
                .collect();
            let offset = residual_location(
                &residuals,
                train_data.events(),
                InterceptRule::KaplanMeierMean,
            )?;
            let mut pred = predict(&params, test_covariates)?;
            for v in &mut pred {
                *v += offset;
            }
            Ok(pred)
        }
    }
}

/// Runs one replicate of a scenario: independent train/test draws, one fit
/// per method, MSE against the true mean and C-index against the observed
/// test outcomes.
pub fn run_scenario_replicate(
    scenario: &ScenarioConfig,
    methods: &[Method],
    train_cfg: &TrainConfig,
    replicate: u64,
) -> Result<Vec<MethodEval>> {
    let (train_gen, test_gen) = gen_replicate(scenario, replicate)?;
    let layers = simulation_layers(scenario.mean_kind);
    // Every replicate trains from its own stream.
    let cfg = TrainConfig { seed: train_cfg.seed.wrapping_add(replicate), ..*train_cfg };
    methods
        .iter()
        .map(|&method| {
            let pred = fit_and_predict(
                method,
                &train_gen.dataset,
                test_gen.dataset.covariates(),
                &layers,
                &cfg,
            )?;
            Ok(MethodEval {
                method,
                mse: mse(&pred, &test_gen.truth)?,
                c_index: c_index(test_gen.dataset.times(), test_gen.dataset.events(), &pred)?,
            })
        })
        .collect()
}

/// All replicates of a scenario, in parallel. Element `r` of the result is
/// replicate `r`'s evaluations in method order.
pub fn run_scenario(
    scenario: &ScenarioConfig,
    methods: &[Method],
    train_cfg: &TrainConfig,
    replicates: usize,
) -> Result<Vec<Vec<MethodEval>>> {
    (0..replicates as u64)
        .into_par_iter()
        .map(|r| run_scenario_replicate(scenario, methods, train_cfg, r))
        .collect()
}

/// Mean and standard deviation of a slice.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

// ---------------------------------------------------------------------------
// MeanFitter adapters for the bias/variance protocol
// ---------------------------------------------------------------------------

/// Network fitter with re-centered predictions.
pub struct DeepFitter {
    pub layers: Vec<LayerSpec>,
    pub config: TrainConfig,
}

impl MeanFitter for DeepFitter {
    fn name(&self) -> String {
        Method::Deep.label().into()
    }

    fn fit_predict(
        &self,
        train_data: &SurvivalDataset,
        test_covariates: &Array2<f64>,
        seed: u64,
    ) -> Result<Vec<f64>> {
        let cfg = TrainConfig { seed, ..self.config };
        fit_and_predict(Method::Deep, train_data, test_covariates, &self.layers, &cfg)
    }
}

/// Parametric baseline fitter.
pub struct PaftFitter;

impl MeanFitter for PaftFitter {
    fn name(&self) -> String {
        Method::Paft.label().into()
    }

    fn fit_predict(
        &self,
        train_data: &SurvivalDataset,
        test_covariates: &Array2<f64>,
        _seed: u64,
    ) -> Result<Vec<f64>> {
        fit_paft_lognormal(train_data)?.predict(test_covariates)
    }
}

/// Semiparametric baseline fitter.
pub struct SaftFitter;

impl MeanFitter for SaftFitter {
    fn name(&self) -> String {
        Method::Saft.label().into()
    }

    fn fit_predict(
        &self,
        train_data: &SurvivalDataset,
        test_covariates: &Array2<f64>,
        _seed: u64,
    ) -> Result<Vec<f64>> {
        fit_saft_gehan(train_data)?.predict(test_covariates)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn learning_rate_table() {
        assert_eq!(paper_learning_rate(1000, ErrorDist::Gaussian), 0.0003);
        assert_eq!(paper_learning_rate(3000, ErrorDist::Laplace), 0.0003);
        assert_eq!(paper_learning_rate(3000, ErrorDist::T3), 0.0003);
        assert_eq!(paper_learning_rate(5000, ErrorDist::Gaussian), 0.0001);
        assert_eq!(paper_learning_rate(1000, ErrorDist::Gumbel), 0.003);
        assert_eq!(paper_learning_rate(5000, ErrorDist::Gumbel), 0.002);
    }

    #[test]
    fn linear_scenario_uses_linear_activations() {
        use crate::net::Activation;
        let layers = simulation_layers(MeanKind::Linear);
        assert!(layers.iter().all(|l| l.activation == Activation::Linear));
        let layers = simulation_layers(MeanKind::Interaction);
        assert!(layers.iter().any(|l| l.activation == Activation::Relu));
    }

    #[test]
    fn method_parsing_round_trips() {
        for m in [Method::Deep, Method::Paft, Method::Saft] {
            assert_eq!(Method::parse(m.label()).unwrap(), m);
        }
        assert!(Method::parse("cox").is_err());
    }

    #[test]
    fn baseline_replicate_runs_end_to_end() {
        let scenario = ScenarioConfig {
            mean_kind: MeanKind::Linear,
            n_train: 250,
            n_test: 300,
            seed: 5,
            ..Default::default()
        };
        let cfg = simulation_train_config(&scenario);
        let evals = run_scenario_replicate(
            &scenario,
            &[Method::Paft, Method::Saft],
            &cfg,
            0,
        )
        .unwrap();
        assert_eq!(evals.len(), 2);
        for e in &evals {
            assert!(e.mse.is_finite() && e.mse < 1.0, "{:?} mse {}", e.method, e.mse);
            assert!(e.c_index > 0.8, "{:?} c-index {}", e.method, e.c_index);
        }
    }

    #[test]
    fn replicates_are_deterministic() {
        let scenario = ScenarioConfig {
            mean_kind: MeanKind::Linear,
            n_train: 150,
            n_test: 200,
            seed: 11,
            ..Default::default()
        };
        let cfg = TrainConfig { epochs: 2, ..simulation_train_config(&scenario) };
        let a = run_scenario_replicate(&scenario, &[Method::Deep], &cfg, 3).unwrap();
        let b = run_scenario_replicate(&scenario, &[Method::Deep], &cfg, 3).unwrap();
        assert_eq!(a[0].mse, b[0].mse);
        assert_eq!(a[0].c_index, b[0].c_index);
    }
}
