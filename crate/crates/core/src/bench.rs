//! Timing harness contrasting the exact quadratic Gehan loss with the
//! sub-sampled linear-cost evaluation.

use std::hint::black_box;
use std::time::Instant;

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::data::SurvivalDataset;
use crate::error::{Error, Result};
use crate::gehan::{full_gehan_loss, minibatch_loss, subsample_pairs};

/// Timings for one sample size.
#[derive(Debug, Clone)]
pub struct TimingRow {
    pub n: usize,
    /// Median seconds for one full-loss evaluation.
    pub full_seconds: f64,
    /// Median seconds for one pass over the sub-sampled pairs.
    pub subsampled_seconds: f64,
    /// Number of pairs the sub-sampled pass touches (= events × s).
    pub pairs_evaluated: usize,
}

/// Result of [`loss_timing_sweep`]: per-size medians plus fitted log-log
/// slopes for the two curves.
#[derive(Debug, Clone)]
pub struct TimingTable {
    pub rows: Vec<TimingRow>,
    pub s: usize,
    pub repetitions: usize,
    pub full_slope: f64,
    pub subsampled_slope: f64,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn fit_slope(ns: &[usize], times: &[f64]) -> f64 {
    // Least squares of ln(time) on ln(n).
    let k = ns.len() as f64;
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = times.iter().map(|&t| t.max(1e-12).ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Times a closure `repetitions` times, repeating it inside each measurement
/// until the measured span exceeds ~2 ms so fast evaluations are resolvable,
/// and reports the median per-call seconds.
fn time_median<F: FnMut() -> f64>(mut f: F, repetitions: usize) -> f64 {
    // Warm-up, and a rough scale estimate for the inner repeat count.
    let start = Instant::now();
    black_box(f());
    let once = start.elapsed().as_secs_f64();
    let inner = ((2e-3 / once.max(1e-9)).ceil() as usize).clamp(1, 100_000);

    let mut samples = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let start = Instant::now();
        for _ in 0..inner {
            black_box(f());
        }
        samples.push(start.elapsed().as_secs_f64() / inner as f64);
    }
    median(samples)
}

/// Measures one full-loss and one sub-sampled-loss evaluation per sample
/// size and fits the asymptotic log-log slopes (≈2 for the exact double
/// sum, ≈1 for the sub-sampled form at fixed `s`).
pub fn loss_timing_sweep<R: Rng>(
    sizes: &[usize],
    s: usize,
    repetitions: usize,
    rng: &mut R,
) -> Result<TimingTable> {
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("sizes must be strictly ascending".into()));
    }
    if repetitions < 3 {
        return Err(Error::InvalidArgument("need at least 3 repetitions".into()));
    }
    if s == 0 {
        return Err(Error::InvalidArgument("s must be positive".into()));
    }
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        if n == 0 {
            return Err(Error::InvalidArgument("sizes must be positive".into()));
        }
        // Synthetic all-event instance: timing depends only on n and s.
        // At the degenerate n = 1 there are no partners, so both losses are
        // 0 over zero pairs; s is clamped to the n − 1 candidates.
        let times: Vec<f64> = (0..n).map(|_| f64::exp(normal.sample(rng))).collect();
        let dataset =
            SurvivalDataset::new(times, vec![true; n], Array2::zeros((n, 1)))?;
        let res = dataset.residuals(&vec![0.0; n])?;
        let pairs = match s.min(n - 1) {
            0 => Vec::new(),
            eff => subsample_pairs(&dataset, eff, rng)?.pairs().to_vec(),
        };
        debug_assert!(pairs.len() <= dataset.n_events() * s);

        let events = dataset.events();
        let full_seconds =
            time_median(|| full_gehan_loss(&res, events).expect("valid"), repetitions);
        let subsampled_seconds =
            time_median(|| minibatch_loss(&res, &pairs).expect("valid"), repetitions);
        rows.push(TimingRow {
            n,
            full_seconds,
            subsampled_seconds,
            pairs_evaluated: pairs.len(),
        });
    }
    let ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    let full: Vec<f64> = rows.iter().map(|r| r.full_seconds).collect();
    let sub: Vec<f64> = rows.iter().map(|r| r.subsampled_seconds).collect();
    Ok(TimingTable {
        full_slope: fit_slope(&ns, &full),
        subsampled_slope: fit_slope(&ns, &sub),
        rows,
        s,
        repetitions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn slope_fit_recovers_exact_power_laws() {
        let ns = [1000, 2000, 4000, 8000];
        let quad: Vec<f64> = ns.iter().map(|&n| 1e-9 * (n as f64).powi(2)).collect();
        let lin: Vec<f64> = ns.iter().map(|&n| 1e-7 * n as f64).collect();
        assert!((fit_slope(&ns, &quad) - 2.0).abs() < 1e-9);
        assert!((fit_slope(&ns, &lin) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sweep_rejects_bad_arguments() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(loss_timing_sweep(&[], 5, 3, &mut rng).is_err());
        assert!(loss_timing_sweep(&[100, 100], 5, 3, &mut rng).is_err());
        assert!(loss_timing_sweep(&[100, 200], 5, 2, &mut rng).is_err());
        assert!(loss_timing_sweep(&[100, 200], 0, 3, &mut rng).is_err());
    }

    #[test]
    fn single_subject_size_yields_zero_pairs_and_near_zero_time() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let table = loss_timing_sweep(&[1, 60], 5, 3, &mut rng).unwrap();
        let row = &table.rows[0];
        assert_eq!(row.pairs_evaluated, 0);
        assert!(row.full_seconds < 1e-5, "full {}", row.full_seconds);
        assert!(row.subsampled_seconds < 1e-5, "sub {}", row.subsampled_seconds);
        // Clamped s: the n = 60 row still draws 5 partners per subject.
        assert_eq!(table.rows[1].pairs_evaluated, 60 * 5);
    }

    #[test]
    fn sweep_reports_pair_budget_and_positive_times() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let table = loss_timing_sweep(&[50, 100, 200], 3, 3, &mut rng).unwrap();
        assert_eq!(table.rows.len(), 3);
        for row in &table.rows {
            assert_eq!(row.pairs_evaluated, row.n * 3);
            assert!(row.full_seconds > 0.0);
            assert!(row.subsampled_seconds > 0.0);
        }
    }
}
