//! Right-censored regression data: observed times, event indicators, covariates.

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};

/// A right-censored sample of `n` subjects.
///
/// Stores the observed time `Y_i = min(T_i, C_i)`, the event indicator
/// `Δ_i = I(T_i ≤ C_i)` (true means the failure was observed) and a dense
/// `n × p` covariate matrix, one row per subject. The latent failure and
/// censoring times are never stored.
///
/// Construction rejects non-positive or non-finite observed times so that
/// log-times always exist. Instances are immutable and safe to share
/// read-only across threads.
#[derive(Debug, Clone)]
pub struct SurvivalDataset {
    times: Vec<f64>,
    events: Vec<bool>,
    covariates: Array2<f64>,
}

impl SurvivalDataset {
    pub fn new(times: Vec<f64>, events: Vec<bool>, covariates: Array2<f64>) -> Result<Self> {
        let n = times.len();
        if n == 0 {
            return Err(Error::InvalidArgument("dataset must be non-empty".into()));
        }
        if events.len() != n {
            return Err(Error::Dimension(format!(
                "{} event indicators for {} observed times",
                events.len(),
                n
            )));
        }
        if covariates.nrows() != n {
            return Err(Error::Dimension(format!(
                "covariate matrix has {} rows for {} subjects",
                covariates.nrows(),
                n
            )));
        }
        for (i, &t) in times.iter().enumerate() {
            if !t.is_finite() || t <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "observed time {t} for subject {i} must be strictly positive"
                )));
            }
        }
        if covariates.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "covariate matrix contains a non-finite value".into(),
            ));
        }
        Ok(Self { times, events, covariates })
    }

    /// Number of subjects.
    pub fn n(&self) -> usize {
        self.times.len()
    }

    /// Covariate dimension.
    pub fn p(&self) -> usize {
        self.covariates.ncols()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn events(&self) -> &[bool] {
        &self.events
    }

    pub fn covariates(&self) -> &Array2<f64> {
        &self.covariates
    }

    pub fn covariate_row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.covariates.row(i)
    }

    /// Number of subjects with an observed failure.
    pub fn n_events(&self) -> usize {
        self.events.iter().filter(|&&e| e).count()
    }

    /// Indices of subjects with an observed failure, ascending.
    pub fn event_indices(&self) -> Vec<usize> {
        self.events
            .iter()
            .enumerate()
            .filter_map(|(i, &e)| e.then_some(i))
            .collect()
    }

    /// Natural log of each observed time.
    pub fn log_times(&self) -> Vec<f64> {
        self.times.iter().map(|t| t.ln()).collect()
    }

    /// Residuals `e_i = log Y_i − prediction_i`.
    pub fn residuals(&self, predictions: &[f64]) -> Result<ResidualVector> {
        if predictions.len() != self.n() {
            return Err(Error::Dimension(format!(
                "{} predictions for {} subjects",
                predictions.len(),
                self.n()
            )));
        }
        let values = self
            .times
            .iter()
            .zip(predictions)
            .map(|(t, p)| t.ln() - p)
            .collect();
        ResidualVector::new(values)
    }

    /// New dataset holding the selected rows, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let n = self.n();
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: bad, len: n });
        }
        let times = indices.iter().map(|&i| self.times[i]).collect();
        let events = indices.iter().map(|&i| self.events[i]).collect();
        let covariates = self.covariates.select(ndarray::Axis(0), indices);
        SurvivalDataset::new(times, events, covariates)
    }

    /// Replaces the covariate matrix (row count must be unchanged).
    pub fn with_covariates(&self, covariates: Array2<f64>) -> Result<Self> {
        SurvivalDataset::new(self.times.clone(), self.events.clone(), covariates)
    }
}

/// Residuals `e_i` for one prediction vector, length `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualVector {
    values: Vec<f64>,
}

impl ResidualVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty residual vector".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "residual vector contains a non-finite value".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.values
    }
}
