//! Dense linear solve via Gaussian elimination with partial pivoting.
//! The systems here are small (a handful to a few hundred unknowns), so a
//! direct `O(n³)` elimination is plenty.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Solves `A x = b`. Fails on (numerically) singular systems.
pub(crate) fn solve(a: &Array2<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::Dimension(format!(
            "solve needs square A and matching b: A is {}×{}, b has {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let mut aug = a.clone();
    let mut rhs = b.to_vec();

    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = aug[(col, col)].abs();
        for row in (col + 1)..n {
            let v = aug[(row, col)].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = row;
            }
        }
        if pivot_val < 1e-12 {
            return Err(Error::SingularDesign(format!(
                "pivot {pivot_val:.3e} at column {col}"
            )));
        }
        if pivot_row != col {
            for k in col..n {
                let tmp = aug[(col, k)];
                aug[(col, k)] = aug[(pivot_row, k)];
                aug[(pivot_row, k)] = tmp;
            }
            rhs.swap(col, pivot_row);
        }
        let pivot = aug[(col, col)];
        for row in (col + 1)..n {
            let factor = aug[(row, col)] / pivot;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                let v = aug[(col, k)];
                aug[(row, k)] -= factor * v;
            }
            rhs[row] -= factor * rhs[col];
        }
    }

    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut sum = rhs[row];
        for k in (row + 1)..n {
            sum -= aug[(row, k)] * x[k];
        }
        x[row] = sum / aug[(row, row)];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    #[test]
    fn solves_a_known_system() {
        let a = arr2(&[[2.0, 1.0], [1.0, 3.0]]);
        let x = solve(&a, &[5.0, 10.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn needs_pivoting() {
        let a = arr2(&[[0.0, 1.0], [1.0, 0.0]]);
        let x = solve(&a, &[2.0, 3.0]).unwrap();
        assert!((x[0] - 3.0).abs() < 1e-12);
        assert!((x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_singular_matrix() {
        let a = arr2(&[[1.0, 2.0], [2.0, 4.0]]);
        assert!(matches!(solve(&a, &[1.0, 2.0]), Err(Error::SingularDesign(_))));
    }

    #[test]
    fn random_round_trip() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(44);
        for n in [1, 3, 8, 20] {
            let a = Array2::from_shape_fn((n, n), |_| rng.random::<f64>() * 2.0 - 1.0);
            let x_true: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
            let b: Vec<f64> = (0..n)
                .map(|r| (0..n).map(|c| a[(r, c)] * x_true[c]).sum())
                .collect();
            let x = solve(&a, &b).unwrap();
            for (got, want) in x.iter().zip(&x_true) {
                assert!((got - want).abs() < 1e-8, "{got} vs {want}");
            }
        }
    }
}
