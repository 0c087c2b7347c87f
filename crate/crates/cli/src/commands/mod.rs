pub mod bench;
pub mod bias_variance;
pub mod evaluate;
pub mod fit;
pub mod simulate;

use rankaft::simgen::{ErrorDist, MeanKind};
use rankaft::{Error, Result};

pub fn parse_mean_kind(s: &str) -> Result<MeanKind> {
    match s.trim().to_ascii_lowercase().as_str() {
        "interaction" => Ok(MeanKind::Interaction),
        "gam" => Ok(MeanKind::Gam),
        "linear" => Ok(MeanKind::Linear),
        other => Err(Error::InvalidArgument(format!(
            "unknown mean kind '{other}' (interaction, gam or linear)"
        ))),
    }
}

pub fn parse_error_dist(s: &str) -> Result<ErrorDist> {
    match s.trim().to_ascii_lowercase().as_str() {
        "gaussian" | "normal" => Ok(ErrorDist::Gaussian),
        "gumbel" => Ok(ErrorDist::Gumbel),
        "laplace" => Ok(ErrorDist::Laplace),
        "t3" | "t" => Ok(ErrorDist::T3),
        other => Err(Error::InvalidArgument(format!(
            "unknown error law '{other}' (gaussian, gumbel, laplace or t3)"
        ))),
    }
}
