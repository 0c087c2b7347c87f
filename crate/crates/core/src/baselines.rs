//! Linear AFT baselines.
//!
//! `fit_paft_lognormal` maximizes the right-censored log-normal likelihood
//! (normal errors on the log scale) by damped Newton ascent. `fit_saft_gehan`
//! minimizes the induced-smoothed Gehan objective, whose gradient is the
//! smoothed rank estimating function, so the returned slopes root that
//! function. Rank methods cannot identify the intercept; it is recovered
//! from the location of the censored residual distribution.

use ndarray::Array2;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::centering::{residual_location, InterceptRule};
use crate::data::SurvivalDataset;
use crate::error::{Error, Result};
use crate::linalg::solve;

/// Fitted linear AFT model: `beta[0]` is the intercept, `beta[1..]` the
/// slopes. `sigma` is the error scale (parametric fit only).
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct LinearAftFit {
    pub beta: Vec<f64>,
    pub sigma: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl LinearAftFit {
    /// Mean predictions `beta[0] + x·beta[1..]` per covariate row.
    pub fn predict(&self, covariates: &Array2<f64>) -> Result<Vec<f64>> {
        let p = self.beta.len() - 1;
        if covariates.ncols() != p {
            return Err(Error::Dimension(format!(
                "fit has {p} slopes but covariates have {} columns",
                covariates.ncols()
            )));
        }
        Ok(covariates
            .rows()
            .into_iter()
            .map(|row| self.beta[0] + row.iter().zip(&self.beta[1..]).map(|(x, b)| x * b).sum::<f64>())
            .collect())
    }

    pub fn slopes(&self) -> &[f64] {
        &self.beta[1..]
    }
}

/// Denominator used inside the smoothing CDF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BandwidthForm {
    /// `r_ij = (x_i − x_j)ᵀ(x_i − x_j) / n`, the quadratic form itself.
    #[default]
    QuadraticForm,
    /// Its square root, the common alternative in the literature.
    SqrtQuadraticForm,
}

fn bandwidth(form: BandwidthForm, dx_sq_sum: f64, n: usize) -> f64 {
    let q = dx_sq_sum / n as f64;
    match form {
        BandwidthForm::QuadraticForm => q,
        BandwidthForm::SqrtQuadraticForm => q.sqrt(),
    }
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// φ(z)/Φ(−z), the hazard of the standard normal, with an asymptotic guard
/// far in the right tail where Φ(−z) underflows.
fn normal_hazard(dist: &Normal, z: f64) -> f64 {
    if z > 30.0 {
        return z + 1.0 / z - 2.0 / (z * z * z);
    }
    dist.pdf(z) / dist.cdf(-z)
}

/// ln Φ(−z) with the same tail guard.
fn log_normal_sf(dist: &Normal, z: f64) -> f64 {
    if z > 30.0 {
        return -0.5 * z * z - z.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln();
    }
    dist.cdf(-z).ln()
}

// ---------------------------------------------------------------------------
// Parametric fit (log-normal errors)
// ---------------------------------------------------------------------------

struct PaftDerivs {
    loglik: f64,
    grad: Vec<f64>,
    hessian: Array2<f64>,
}

/// Log-likelihood plus derivatives in (β, s) with s = log σ.
fn paft_derivs(design: &Array2<f64>, log_y: &[f64], events: &[bool], theta: &[f64]) -> PaftDerivs {
    let n = design.nrows();
    let q = design.ncols(); // p + 1 including intercept
    let sigma = theta[q].exp();
    let dist = std_normal();

    let mut loglik = 0.0;
    // Per-subject first and second derivatives in (η, s).
    let mut g_eta = vec![0.0; n];
    let mut g_s = 0.0;
    let mut h_ee = vec![0.0; n];
    let mut h_es = vec![0.0; n];
    let mut h_ss = 0.0;
    for i in 0..n {
        let eta: f64 = design.row(i).iter().zip(&theta[..q]).map(|(x, b)| x * b).sum();
        let z = (log_y[i] - eta) / sigma;
        if events[i] {
            loglik += -theta[q] - 0.5 * z * z - 0.5 * (2.0 * std::f64::consts::PI).ln();
            g_eta[i] = z / sigma;
            g_s += z * z - 1.0;
            h_ee[i] = -1.0 / (sigma * sigma);
            h_es[i] = -2.0 * z / sigma;
            h_ss += -2.0 * z * z;
        } else {
            let h = normal_hazard(&dist, z);
            let hp = h * (h - z);
            loglik += log_normal_sf(&dist, z);
            g_eta[i] = h / sigma;
            g_s += h * z;
            h_ee[i] = -hp / (sigma * sigma);
            h_es[i] = -(z * hp + h) / sigma;
            h_ss += -z * (z * hp + h);
        }
    }

    let mut grad = vec![0.0; q + 1];
    let mut hessian = Array2::zeros((q + 1, q + 1));
    // β-block via weighted design products.
    for i in 0..n {
        let row = design.row(i);
        for j in 0..q {
            grad[j] += g_eta[i] * row[j];
            hessian[(j, q)] += h_es[i] * row[j];
            for k in j..q {
                hessian[(j, k)] += h_ee[i] * row[j] * row[k];
            }
        }
    }
    for j in 0..q {
        for k in j..q {
            hessian[(k, j)] = hessian[(j, k)];
        }
        hessian[(q, j)] = hessian[(j, q)];
    }
    grad[q] = g_s;
    hessian[(q, q)] = h_ss;
    PaftDerivs { loglik, grad, hessian }
}

fn ols_start(design: &Array2<f64>, log_y: &[f64]) -> Result<(Vec<f64>, f64)> {
    let q = design.ncols();
    let n = design.nrows();
    let mut xtx = Array2::zeros((q, q));
    let mut xty = vec![0.0; q];
    for i in 0..n {
        let row = design.row(i);
        for j in 0..q {
            xty[j] += row[j] * log_y[i];
            for k in j..q {
                xtx[(j, k)] += row[j] * row[k];
            }
        }
    }
    for j in 0..q {
        for k in j..q {
            xtx[(k, j)] = xtx[(j, k)];
        }
    }
    let beta = solve(&xtx, &xty).map_err(|_| {
        Error::SingularDesign("intercept-augmented design is rank deficient".into())
    })?;
    let rss: f64 = (0..n)
        .map(|i| {
            let fit: f64 = design.row(i).iter().zip(&beta).map(|(x, b)| x * b).sum();
            (log_y[i] - fit).powi(2)
        })
        .sum();
    Ok((beta, (rss / n as f64).sqrt().max(1e-6)))
}

pub(crate) fn fit_paft_lognormal_traced(
    dataset: &SurvivalDataset,
) -> Result<(LinearAftFit, Vec<f64>)> {
    let n = dataset.n();
    let p = dataset.p();
    if n <= p + 1 {
        return Err(Error::InvalidArgument(format!(
            "need more than p + 1 = {} subjects, got {n}",
            p + 1
        )));
    }
    if dataset.n_events() == 0 {
        return Err(Error::NoEvents);
    }
    let mut design = Array2::ones((n, p + 1));
    design.slice_mut(ndarray::s![.., 1..]).assign(dataset.covariates());
    let log_y = dataset.log_times();
    let events = dataset.events();

    let (beta0, sigma0) = ols_start(&design, &log_y)?;
    let mut theta = beta0;
    theta.push(sigma0.ln());

    let q = p + 1;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut current = paft_derivs(&design, &log_y, events, &theta);
    trace.push(current.loglik);
    for iter in 0..100 {
        iterations = iter + 1;
        let grad_norm = current.grad.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
        if grad_norm < 1e-8 {
            converged = true;
            iterations = iter;
            break;
        }
        // Ascent direction from the (negated) Hessian.
        let neg_h = current.hessian.mapv(|v| -v);
        let direction = match solve(&neg_h, &current.grad) {
            Ok(d) => d,
            Err(_) => current.grad.clone(), // fall back to steepest ascent
        };
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let candidate: Vec<f64> = theta
                .iter()
                .zip(&direction)
                .map(|(t, d)| t + step * d)
                .collect();
            let trial = paft_derivs(&design, &log_y, events, &candidate);
            if trial.loglik.is_finite() && trial.loglik >= current.loglik {
                theta = candidate;
                current = trial;
                trace.push(current.loglik);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break; // no ascent possible at floating precision
        }
    }
    let sigma = theta[q].exp();
    let fit = LinearAftFit {
        beta: theta[..q].to_vec(),
        sigma: Some(sigma),
        converged,
        iterations,
    };
    Ok((fit, trace))
}

/// Maximum-likelihood linear AFT fit under log-normal failure times.
pub fn fit_paft_lognormal(dataset: &SurvivalDataset) -> Result<LinearAftFit> {
    fit_paft_lognormal_traced(dataset).map(|(fit, _)| fit)
}

// ---------------------------------------------------------------------------
// Semiparametric fit (induced-smoothed Gehan)
// ---------------------------------------------------------------------------

/// The induced-smoothed Gehan estimating function
/// `Σ_i Σ_j Δ_i (x_i − x_j) Φ{(e_j − e_i)/r_ij}` at the given slopes.
///
/// Pairs with `r_ij = 0` have identical covariate rows, so their
/// `(x_i − x_j)` factor vanishes and the indicator-with-half-ties fallback
/// contributes exactly zero; they are skipped.
pub fn smoothed_estimating_function(beta: &[f64], dataset: &SurvivalDataset) -> Result<Vec<f64>> {
    smoothed_estimating_function_with(beta, dataset, BandwidthForm::default())
}

pub fn smoothed_estimating_function_with(
    beta: &[f64],
    dataset: &SurvivalDataset,
    form: BandwidthForm,
) -> Result<Vec<f64>> {
    let (residuals, x) = slope_residuals(beta, dataset)?;
    let n = dataset.n();
    let p = beta.len();
    let dist = std_normal();
    let mut u = vec![0.0; p];
    let mut dx = vec![0.0; p];
    for i in 0..n {
        if !dataset.events()[i] {
            continue;
        }
        for j in 0..n {
            if j == i {
                continue;
            }
            let mut sq = 0.0;
            for c in 0..p {
                let d = x[(i, c)] - x[(j, c)];
                dx[c] = d;
                sq += d * d;
            }
            let r = bandwidth(form, sq, n);
            if r == 0.0 {
                continue;
            }
            let w = dist.cdf((residuals[j] - residuals[i]) / r);
            for c in 0..p {
                u[c] += w * dx[c];
            }
        }
    }
    Ok(u)
}

/// Smoothed Gehan objective whose gradient is
/// [`smoothed_estimating_function_with`]: each active pair contributes
/// `r·φ(d/r) − d·Φ(−d/r)` with `d = e_i − e_j` (the Gaussian smoothing of
/// `[d]^−`); zero-bandwidth pairs contribute `[d]^−` exactly.
pub fn smoothed_gehan_objective(
    beta: &[f64],
    dataset: &SurvivalDataset,
    form: BandwidthForm,
) -> Result<f64> {
    let (residuals, x) = slope_residuals(beta, dataset)?;
    let n = dataset.n();
    let p = beta.len();
    let dist = std_normal();
    let mut total = 0.0;
    for i in 0..n {
        if !dataset.events()[i] {
            continue;
        }
        for j in 0..n {
            if j == i {
                continue;
            }
            let mut sq = 0.0;
            for c in 0..p {
                let d = x[(i, c)] - x[(j, c)];
                sq += d * d;
            }
            let d = residuals[i] - residuals[j];
            let r = bandwidth(form, sq, n);
            if r == 0.0 {
                total += (-d).max(0.0);
            } else {
                let z = d / r;
                total += r * dist.pdf(z) - d * dist.cdf(-z);
            }
        }
    }
    Ok(total)
}

fn slope_residuals<'a>(
    beta: &[f64],
    dataset: &'a SurvivalDataset,
) -> Result<(Vec<f64>, &'a Array2<f64>)> {
    if beta.len() != dataset.p() {
        return Err(Error::Dimension(format!(
            "{} slopes for {} covariate columns (rank fits carry no intercept)",
            beta.len(),
            dataset.p()
        )));
    }
    let x = dataset.covariates();
    let residuals: Vec<f64> = dataset
        .log_times()
        .iter()
        .enumerate()
        .map(|(i, ly)| ly - x.row(i).iter().zip(beta).map(|(v, b)| v * b).sum::<f64>())
        .collect();
    Ok((residuals, x))
}

/// Gradient and curvature of the smoothed objective. For small `p` the full
/// Hessian is accumulated; for large `p` only its diagonal, which the solver
/// uses as a preconditioner.
fn saft_derivs(
    beta: &[f64],
    dataset: &SurvivalDataset,
    form: BandwidthForm,
    full_hessian: bool,
) -> Result<(Vec<f64>, Array2<f64>, Vec<f64>)> {
    let (residuals, x) = slope_residuals(beta, dataset)?;
    let n = dataset.n();
    let p = beta.len();
    let dist = std_normal();
    let mut grad = vec![0.0; p];
    let mut hess = if full_hessian { Array2::zeros((p, p)) } else { Array2::zeros((0, 0)) };
    let mut diag = vec![0.0; p];
    let mut dx = vec![0.0; p];
    for i in 0..n {
        if !dataset.events()[i] {
            continue;
        }
        for j in 0..n {
            if j == i {
                continue;
            }
            let mut sq = 0.0;
            for c in 0..p {
                let d = x[(i, c)] - x[(j, c)];
                dx[c] = d;
                sq += d * d;
            }
            let r = bandwidth(form, sq, n);
            if r == 0.0 {
                continue;
            }
            let d = residuals[i] - residuals[j];
            let z = d / r;
            let w = dist.cdf(-z);
            let curv = dist.pdf(z) / r;
            for c in 0..p {
                grad[c] += w * dx[c];
                diag[c] += curv * dx[c] * dx[c];
            }
            if full_hessian {
                for a in 0..p {
                    let base = curv * dx[a];
                    for b in a..p {
                        hess[(a, b)] += base * dx[b];
                    }
                }
            }
        }
    }
    if full_hessian {
        for a in 0..p {
            for b in a..p {
                hess[(b, a)] = hess[(a, b)];
            }
        }
    }
    Ok((grad, hess, diag))
}

/// Semiparametric linear AFT fit: minimizes the induced-smoothed Gehan
/// objective starting from the parametric slope estimate, then recovers the
/// intercept from the Kaplan–Meier location of the residuals.
pub fn fit_saft_gehan(dataset: &SurvivalDataset) -> Result<LinearAftFit> {
    fit_saft_gehan_with(dataset, BandwidthForm::default(), InterceptRule::default())
}

pub fn fit_saft_gehan_with(
    dataset: &SurvivalDataset,
    form: BandwidthForm,
    intercept: InterceptRule,
) -> Result<LinearAftFit> {
    let n = dataset.n();
    let p = dataset.p();
    if p == 0 {
        return Err(Error::InvalidArgument("no covariates to fit".into()));
    }
    if dataset.n_events() == 0 {
        return Err(Error::NoEvents);
    }

    let start = fit_paft_lognormal(dataset)?;
    let mut beta = start.beta[1..].to_vec();
    // Full Newton only while the Hessian stays cheap.
    let full_hessian = p <= 40;

    let mut objective = smoothed_gehan_objective(&beta, dataset, form)?;
    let mut converged_by_step = false;
    let mut iterations = 0;
    for iter in 0..200 {
        iterations = iter + 1;
        let (grad, hess, diag) = saft_derivs(&beta, dataset, form, full_hessian)?;
        let neg_grad: Vec<f64> = grad.iter().map(|g| -g).collect();
        let direction = if full_hessian {
            match solve(&hess, &neg_grad) {
                Ok(d) => d,
                Err(_) => {
                    // Ridge escalation, then preconditioned fallback.
                    let mean_diag =
                        (0..p).map(|c| hess[(c, c)]).sum::<f64>().max(1e-12) / p as f64;
                    let mut ridged = hess.clone();
                    for c in 0..p {
                        ridged[(c, c)] += 1e-6 * mean_diag;
                    }
                    solve(&ridged, &neg_grad).unwrap_or_else(|_| {
                        precondition(&neg_grad, &diag)
                    })
                }
            }
        } else {
            precondition(&neg_grad, &diag)
        };

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let candidate: Vec<f64> =
                beta.iter().zip(&direction).map(|(b, d)| b + step * d).collect();
            let trial = smoothed_gehan_objective(&candidate, dataset, form)?;
            if trial.is_finite() && trial <= objective {
                let max_move = direction
                    .iter()
                    .fold(0.0_f64, |m, d| m.max((step * d).abs()));
                beta = candidate;
                objective = trial;
                accepted = true;
                if max_move < 1e-7 {
                    converged_by_step = true;
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            converged_by_step = true; // stuck at floating precision
            break;
        }
        if converged_by_step {
            break;
        }
    }

    // Declare convergence only if the estimating function is near zero on
    // the per-comparison scale.
    let u = smoothed_estimating_function_with(&beta, dataset, form)?;
    let scale = (n * dataset.n_events()) as f64;
    let u_norm = u.iter().fold(0.0_f64, |m, v| m.max(v.abs())) / scale;
    let converged = converged_by_step && u_norm < 1e-4;

    let residuals: Vec<f64> = slope_residuals(&beta, dataset)?.0;
    let icpt = residual_location(&residuals, dataset.events(), intercept)?;
    let mut full_beta = Vec::with_capacity(p + 1);
    full_beta.push(icpt);
    full_beta.extend(beta);
    Ok(LinearAftFit { beta: full_beta, sigma: None, converged, iterations })
}

fn precondition(neg_grad: &[f64], diag: &[f64]) -> Vec<f64> {
    let floor = diag.iter().cloned().fold(0.0_f64, f64::max).max(1e-12) * 1e-8;
    neg_grad
        .iter()
        .zip(diag)
        .map(|(g, d)| g / (d + floor))
        .collect()
}
