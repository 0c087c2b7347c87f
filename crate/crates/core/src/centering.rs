//! Intercept recovery for shift-invariant fitters.
//!
//! The rank loss only sees residual differences, so any fitted mean is
//! identified up to an additive constant. Before mean-squared-error
//! comparisons the constant is pinned by estimating the location of the
//! censored residual distribution.

use crate::error::{Error, Result};

/// How the unidentified additive constant is recovered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterceptRule {
    /// Mean of the Kaplan–Meier estimate of the residual distribution, with
    /// the largest residual treated as observed so the mean exists. This is
    /// consistent under independent censoring.
    #[default]
    KaplanMeierMean,
    /// Plain average of residuals over event subjects. Biased under
    /// censoring (events select small residuals) but cheap; kept as the
    /// documented alternative.
    EventMean,
}

/// Estimates the additive constant for residuals `e_i = log Y_i − f̂(x_i)`.
pub fn residual_location(residuals: &[f64], events: &[bool], rule: InterceptRule) -> Result<f64> {
    if residuals.len() != events.len() {
        return Err(Error::Dimension(format!(
            "{} residuals for {} event indicators",
            residuals.len(),
            events.len()
        )));
    }
    if !events.iter().any(|&e| e) {
        return Err(Error::NoEvents);
    }
    match rule {
        InterceptRule::KaplanMeierMean => kaplan_meier_mean(residuals, events),
        InterceptRule::EventMean => {
            let (sum, count) = residuals
                .iter()
                .zip(events)
                .filter(|(_, &e)| e)
                .fold((0.0, 0usize), |(s, c), (v, _)| (s + v, c + 1));
            Ok(sum / count as f64)
        }
    }
}

/// Mean of the Kaplan–Meier distribution of the (censored) residuals.
fn kaplan_meier_mean(values: &[f64], events: &[bool]) -> Result<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite residuals"));

    let mut flags: Vec<bool> = order.iter().map(|&i| events[i]).collect();
    // Restrict the tail: the largest residual absorbs the remaining mass.
    *flags.last_mut().expect("non-empty") = true;

    let mut survival = 1.0;
    let mut mean = 0.0;
    let mut at_risk = n;
    let mut k = 0;
    while k < n {
        let v = values[order[k]];
        let mut deaths = 0usize;
        let mut block = 0usize;
        while k + block < n && values[order[k + block]] == v {
            if flags[k + block] {
                deaths += 1;
            }
            block += 1;
        }
        if deaths > 0 {
            let next = survival * (1.0 - deaths as f64 / at_risk as f64);
            mean += v * (survival - next);
            survival = next;
        }
        at_risk -= block;
        k += block;
    }
    Ok(mean)
}
