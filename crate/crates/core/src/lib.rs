//! Accelerated failure time (AFT) modeling with rank-based losses.
//!
//! The model is `log T = f(x) + ε` with right censoring: only
//! `Y = min(T, C)` and the event indicator `Δ = I(T ≤ C)` are observed.
//! This crate fits the mean function `f` three ways:
//!
//! - a feedforward network trained by mini-batch SGD on a sub-sampled
//!   Gehan rank loss ([`net`]),
//! - a parametric linear AFT model with log-normal errors, by censored
//!   maximum likelihood ([`baselines`]),
//! - a semiparametric linear AFT model via the induced-smoothed Gehan
//!   estimating function ([`baselines`]).
//!
//! Supporting modules cover the loss and pair sub-sampler ([`gehan`]),
//! evaluation metrics ([`metrics`]), synthetic data generation and the
//! bias/variance protocol ([`simgen`]), dataset/config/model persistence
//! ([`io`]), a full-versus-subsampled timing harness ([`bench`]), and the
//! replication driver tying them together ([`experiment`]).

pub mod baselines;
pub mod bench;
pub mod centering;
pub mod data;
pub mod error;
pub mod experiment;
pub mod gehan;
pub mod io;
pub mod metrics;
pub mod net;
pub mod simgen;

mod linalg;

pub use centering::InterceptRule;
pub use data::{ResidualVector, SurvivalDataset};
pub use error::{Error, Result};
pub use gehan::{PairSample, ResidualPair};
pub use net::{Activation, LayerSpec, NetworkParams, OptimizerKind, TrainConfig};
pub use simgen::{ErrorDist, MeanKind, ScenarioConfig};
