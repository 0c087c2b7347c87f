//! Prediction-quality measures: mean squared error against the true mean
//! function and the censoring-aware concordance index.

use crate::error::{Error, Result};

/// Mean squared error `(1/n) Σ (predicted_i − truth_i)²`.
pub fn mse(predicted: &[f64], truth: &[f64]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::Dimension(format!(
            "{} predictions for {} truth values",
            predicted.len(),
            truth.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::InvalidArgument("empty input".into()));
    }
    let n = predicted.len() as f64;
    Ok(predicted
        .iter()
        .zip(truth)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n)
}

/// Concordance index: among ordered pairs with `Δ_i = 1` and `Y_i < Y_j`,
/// the fraction whose predictions satisfy `pred_i < pred_j`.
///
/// Both inequalities are strict — time-tied pairs are excluded from the
/// denominator and prediction ties earn no credit.
pub fn c_index(observed_time: &[f64], events: &[bool], predicted: &[f64]) -> Result<f64> {
    let n = observed_time.len();
    if events.len() != n || predicted.len() != n {
        return Err(Error::Dimension(format!(
            "lengths disagree: {} times, {} events, {} predictions",
            n,
            events.len(),
            predicted.len()
        )));
    }
    let mut num = 0u64;
    let mut den = 0u64;
    for i in 0..n {
        if !events[i] {
            continue;
        }
        let yi = observed_time[i];
        let pi = predicted[i];
        for j in 0..n {
            if j == i || yi >= observed_time[j] {
                continue;
            }
            den += 1;
            if pi < predicted[j] {
                num += 1;
            }
        }
    }
    if den == 0 {
        return Err(Error::UndefinedMetric(
            "no comparable event-anchored pairs".into(),
        ));
    }
    Ok(num as f64 / den as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[2.0, 3.0], &[1.0, 2.0]).unwrap(), 1.0);
        assert!((mse(&[0.0, 2.0], &[1.0, 0.0]).unwrap() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn mse_rejects_bad_input() {
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(mse(&[], &[]).is_err());
    }

    #[test]
    fn c_index_perfectly_concordant() {
        let y = [1.0, 2.0, 3.0, 4.0];
        let ev = [true; 4];
        let pred = [0.1, 0.2, 0.3, 0.4];
        assert_eq!(c_index(&y, &ev, &pred).unwrap(), 1.0);
    }

    #[test]
    fn c_index_fully_discordant() {
        let y = [1.0, 2.0, 3.0];
        let ev = [true; 3];
        let pred = [3.0, 2.0, 1.0];
        assert_eq!(c_index(&y, &ev, &pred).unwrap(), 0.0);
    }

    #[test]
    fn c_index_of_random_predictions_is_near_half() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let n = 400;
        let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.01).collect();
        let ev: Vec<bool> = (0..n).map(|_| rng.random_bool(0.7)).collect();
        let pred: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let c = c_index(&y, &ev, &pred).unwrap();
        assert!((c - 0.5).abs() < 0.05, "c-index {c}");
    }

    #[test]
    fn c_index_excludes_time_ties() {
        // The tied pair (1.0, 1.0) never enters the denominator.
        let y = [1.0, 1.0, 2.0];
        let ev = [true, true, false];
        let pred = [0.0, 1.0, 2.0];
        // Comparable pairs: (0, 2) and (1, 2), both concordant.
        assert_eq!(c_index(&y, &ev, &pred).unwrap(), 1.0);
    }

    #[test]
    fn c_index_rejects_zero_denominator() {
        // Only censored subjects anchor nothing.
        let y = [1.0, 2.0];
        let ev = [false, false];
        let pred = [0.3, 0.4];
        assert!(matches!(
            c_index(&y, &ev, &pred),
            Err(Error::UndefinedMetric(_))
        ));
        // Single subject: no pairs at all.
        assert!(c_index(&[1.0], &[true], &[0.0]).is_err());
    }

    #[test]
    fn c_index_prediction_ties_earn_no_credit() {
        let y = [1.0, 2.0];
        let ev = [true, true];
        let pred = [0.5, 0.5];
        assert_eq!(c_index(&y, &ev, &pred).unwrap(), 0.0);
    }

    #[test]
    fn brute_force_equivalence_at_n_2000() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2000);
        let n = 2000;
        let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 9.0 + 0.01).collect();
        let ev: Vec<bool> = (0..n).map(|_| rng.random_bool(0.7)).collect();
        let pred: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        // Independent transcription of the ratio.
        let (mut num, mut den) = (0u64, 0u64);
        for i in 0..n {
            for j in 0..n {
                if i != j && ev[i] && y[i] < y[j] {
                    den += 1;
                    if pred[i] < pred[j] {
                        num += 1;
                    }
                }
            }
        }
        let reference = num as f64 / den as f64;
        assert_eq!(c_index(&y, &ev, &pred).unwrap(), reference);
    }

    proptest! {
        #[test]
        fn c_index_invariant_under_increasing_transform(
            y in proptest::collection::vec(0.01f64..10.0, 4..40),
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = y.len();
            let ev: Vec<bool> = (0..n).map(|_| rng.random_bool(0.8)).collect();
            let pred: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 6.0 - 3.0).collect();
            let transformed: Vec<f64> = pred.iter().map(|p| (0.7 * p).exp() + 2.0 * p).collect();
            let a = c_index(&y, &ev, &pred);
            let b = c_index(&y, &ev, &transformed);
            match (a, b) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "one side defined, the other not"),
            }
        }

        #[test]
        fn c_index_bounds_and_reversal(
            y in proptest::collection::vec(0.01f64..10.0, 4..40),
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = y.len();
            let ev: Vec<bool> = (0..n).map(|_| rng.random_bool(0.8)).collect();
            // Continuous predictions: ties have probability zero.
            let pred: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 6.0 - 3.0).collect();
            let neg: Vec<f64> = pred.iter().map(|p| -p).collect();
            if let (Ok(a), Ok(b)) = (c_index(&y, &ev, &pred), c_index(&y, &ev, &neg)) {
                prop_assert!((0.0..=1.0).contains(&a));
                prop_assert!((a + b - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn metrics_invariant_under_joint_permutation(
            y in proptest::collection::vec(0.01f64..10.0, 4..25),
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            use rand::seq::SliceRandom;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = y.len();
            let ev: Vec<bool> = (0..n).map(|_| rng.random_bool(0.8)).collect();
            let pred: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let truth: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let yp: Vec<f64> = order.iter().map(|&k| y[k]).collect();
            let evp: Vec<bool> = order.iter().map(|&k| ev[k]).collect();
            let predp: Vec<f64> = order.iter().map(|&k| pred[k]).collect();
            let truthp: Vec<f64> = order.iter().map(|&k| truth[k]).collect();

            let m0 = mse(&pred, &truth).unwrap();
            let m1 = mse(&predp, &truthp).unwrap();
            prop_assert!((m0 - m1).abs() < 1e-12);

            if let (Ok(c0), Ok(c1)) = (c_index(&y, &ev, &pred), c_index(&yp, &evp, &predp)) {
                prop_assert_eq!(c0, c1);
            }
        }
    }
}
