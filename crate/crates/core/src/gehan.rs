//! Gehan rank loss over censored residual pairs, its subgradient with
//! respect to predictions, and the pair sub-sampler that makes mini-batch
//! training linear in the sample size.
//!
//! The loss is `Σ_i Σ_j Δ_i [e_i − e_j]^−` with `[a]^− = |min(a, 0)|`: every
//! ordered pair anchored at an observed failure contributes the amount by
//! which its residual undershoots the partner's. Pairs with tied residuals
//! contribute zero to the subgradient (one-sided convention, fixed for
//! determinism).

use rand::Rng;

use crate::data::{ResidualVector, SurvivalDataset};
use crate::error::{Error, Result};

/// One ordered residual pair `(i, j)`: subject `i` has an observed failure,
/// `j` is any other subject.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ResidualPair {
    pub i: usize,
    pub j: usize,
}

/// A sub-sample of residual pairs: `s` distinct partners drawn without
/// replacement for every event subject.
#[derive(Debug, Clone)]
pub struct PairSample {
    pairs: Vec<ResidualPair>,
    s: usize,
    source_n: usize,
}

impl PairSample {
    pub fn pairs(&self) -> &[ResidualPair] {
        &self.pairs
    }

    /// Partners drawn per event subject.
    pub fn s(&self) -> usize {
        self.s
    }

    /// Size of the dataset the sample was drawn from.
    pub fn source_n(&self) -> usize {
        self.source_n
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

fn check_lengths(res: &ResidualVector, events: &[bool]) -> Result<usize> {
    if res.len() != events.len() {
        return Err(Error::Dimension(format!(
            "{} residuals for {} event indicators",
            res.len(),
            events.len()
        )));
    }
    Ok(res.len())
}

/// Exact Gehan loss over all ordered pairs, `O(n²)`.
pub fn full_gehan_loss(res: &ResidualVector, events: &[bool]) -> Result<f64> {
    let n = check_lengths(res, events)?;
    let e = res.values();
    let mut loss = 0.0;
    for i in 0..n {
        if !events[i] {
            continue;
        }
        let ei = e[i];
        for (j, &ej) in e.iter().enumerate() {
            if j == i {
                continue;
            }
            let d = ei - ej;
            if d < 0.0 {
                loss -= d;
            }
        }
    }
    Ok(loss)
}

/// Subgradient of [`full_gehan_loss`] with respect to the prediction vector.
///
/// Since `e_i = log Y_i − prediction_i`, a pair with `e_i < e_j` pushes
/// prediction `i` up (+1) and prediction `j` down (−1); ties contribute
/// nothing. Away from ties this is the exact gradient.
pub fn gehan_subgradient(res: &ResidualVector, events: &[bool]) -> Result<Vec<f64>> {
    let n = check_lengths(res, events)?;
    let e = res.values();
    let mut g = vec![0.0; n];
    for i in 0..n {
        if !events[i] {
            continue;
        }
        let ei = e[i];
        for (j, &ej) in e.iter().enumerate() {
            if j != i && ei < ej {
                g[i] += 1.0;
                g[j] -= 1.0;
            }
        }
    }
    Ok(g)
}

/// Draws `s` distinct partners, uniformly without replacement from the other
/// `n − 1` subjects, for every event subject. Deterministic given the state
/// of `rng`.
pub fn subsample_pairs<R: Rng>(
    dataset: &SurvivalDataset,
    s: usize,
    rng: &mut R,
) -> Result<PairSample> {
    let n = dataset.n();
    if s == 0 {
        return Err(Error::InvalidArgument("s must be positive".into()));
    }
    if s > n - 1 {
        return Err(Error::InvalidArgument(format!(
            "cannot draw {s} distinct partners from {} candidates",
            n - 1
        )));
    }
    let event_idx = dataset.event_indices();
    if event_idx.is_empty() {
        return Err(Error::NoEvents);
    }
    let mut pairs = Vec::with_capacity(event_idx.len() * s);
    for &i in &event_idx {
        // Sample s of the n−1 indices != i; shift the hole at i away.
        let drawn = rand::seq::index::sample(rng, n - 1, s);
        for raw in drawn.iter() {
            let j = if raw >= i { raw + 1 } else { raw };
            pairs.push(ResidualPair { i, j });
        }
    }
    Ok(PairSample { pairs, s, source_n: n })
}

/// Gehan loss restricted to an explicit batch of pairs.
pub fn minibatch_loss(res: &ResidualVector, batch: &[ResidualPair]) -> Result<f64> {
    let n = res.len();
    let e = res.values();
    let mut loss = 0.0;
    for pair in batch {
        if pair.i >= n {
            return Err(Error::IndexOutOfRange { index: pair.i, len: n });
        }
        if pair.j >= n {
            return Err(Error::IndexOutOfRange { index: pair.j, len: n });
        }
        let d = e[pair.i] - e[pair.j];
        if d < 0.0 {
            loss -= d;
        }
    }
    Ok(loss)
}

/// All ordered pairs `(i, j)` with `Δ_i = 1`, `j ≠ i` — the batch whose
/// [`minibatch_loss`] equals [`full_gehan_loss`] by definition.
pub fn all_event_pairs(events: &[bool]) -> Vec<ResidualPair> {
    let n = events.len();
    let mut pairs = Vec::new();
    for (i, &ev) in events.iter().enumerate() {
        if !ev {
            continue;
        }
        for j in 0..n {
            if j != i {
                pairs.push(ResidualPair { i, j });
            }
        }
    }
    pairs
}
