//! Maximum-likelihood estimation for the ordered probit model.
//!
//! The threshold ordering constraint is removed by optimizing over
//! `theta = (beta, tau_0, d_1..d_4)` with `tau_j = tau_{j-1} + exp(d_j)`.
//! BFGS with backtracking line search maximizes the log-likelihood; the
//! covariance comes from the inverse negative finite-difference Hessian in
//! the unconstrained coordinates, mapped back to `(beta, tau)` by the delta
//! method. The null (thresholds-only) model is fitted the same way for the
//! fit statistics.

use rand::Rng;

use super::{OrderedProbitParams, ProbitError};
use crate::data::{Dataset, OrdinalLabel};
use crate::numeric::linalg::Matrix;
use crate::numeric::quasi_newton::{maximize, MaximizeResult, QuasiNewtonOptions};
use crate::numeric::norm_quantile;
use crate::{seed, NUM_THRESHOLDS};

/// Estimation controls. The seed only matters when the first optimization
/// attempt fails to converge and a jittered restart is tried.
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub max_iter: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_iter: 200, tolerance: 1e-6, seed: 0 }
    }
}

/// A fitted ordered probit model with inference and fit statistics.
#[derive(Debug, Clone)]
pub struct OrderedProbitFit {
    pub feature_names: Vec<String>,
    pub params: OrderedProbitParams,
    /// `(p+5) x (p+5)` covariance over `(beta, tau)`; `None` when the
    /// Hessian was singular or indefinite at the optimum.
    pub covariance: Option<Matrix>,
    pub std_errors: Option<Vec<f64>>,
    pub t_values: Option<Vec<f64>>,
    pub log_likelihood_full: f64,
    pub log_likelihood_null: f64,
    pub mcfadden_r2: f64,
    pub aic_full: f64,
    pub aic_null: f64,
    pub converged: bool,
    pub iterations: usize,
    pub n_obs: usize,
    /// Log-likelihood at the start and after every accepted optimizer step.
    pub ll_trace: Vec<f64>,
}

impl OrderedProbitFit {
    pub fn n_parameters(&self) -> usize {
        self.params.n_features() + NUM_THRESHOLDS
    }

    /// Parameter estimates in report order: coefficients then thresholds.
    pub fn estimates(&self) -> Vec<f64> {
        let mut out = self.params.beta().to_vec();
        out.extend_from_slice(self.params.thresholds());
        out
    }
}

/// McFadden's pseudo R-squared, `1 - LL / LL_null`.
pub fn mcfadden_r2(ll_full: f64, ll_null: f64) -> f64 {
    1.0 - ll_full / ll_null
}

/// Akaike information criterion, `-2 (LL - k)`.
pub fn aic(ll: f64, k: usize) -> f64 {
    -2.0 * (ll - k as f64)
}

/// Fits the ordered probit model on the named feature columns.
///
/// Non-convergence is reported through `converged = false`, never silently;
/// a singular Hessian leaves `covariance` as `None`.
pub fn fit(
    data: &Dataset,
    feature_names: &[String],
    options: &FitOptions,
) -> Result<OrderedProbitFit, ProbitError> {
    let design = data.select_columns(feature_names)?;
    let p = design.n_features();
    let n = design.n_rows();
    let distinct = design.class_counts().iter().filter(|&&c| c > 0).count();
    if distinct < 2 {
        return Err(ProbitError::DegenerateLabels);
    }
    if n <= p + NUM_THRESHOLDS {
        return Err(ProbitError::TooFewRows { n, p });
    }

    let qn_opts = QuasiNewtonOptions { max_iter: options.max_iter, tolerance: options.tolerance };
    let theta0 = initial_theta(&design, p);
    let objective = |theta: &[f64]| objective_theta(theta, p, &design);
    let mut result = maximize(objective, &theta0, &qn_opts);
    if !result.converged {
        // one jittered restart, seeded for reproducibility
        let mut rng = seed::rng_for(options.seed, "probit.restart");
        let jittered: Vec<f64> =
            theta0.iter().map(|t| t + rng.random_range(-0.1..0.1)).collect();
        let retry = maximize(objective, &jittered, &qn_opts);
        if retry.converged || retry.value > result.value {
            result = retry;
        }
    }

    let params = params_from_theta(&result.x, p);
    let ll_full = result.value;

    // null model: thresholds only
    let null = fit_null(design.labels(), options)?;
    let ll_null = null.log_likelihood;

    let (covariance, std_errors, t_values) = inference(&result, p, &design, &params);

    let k_full = p + NUM_THRESHOLDS;
    Ok(OrderedProbitFit {
        feature_names: feature_names.to_vec(),
        params,
        covariance,
        std_errors,
        t_values,
        log_likelihood_full: ll_full,
        log_likelihood_null: ll_null,
        mcfadden_r2: mcfadden_r2(ll_full, ll_null),
        aic_full: aic(ll_full, k_full),
        aic_null: aic(ll_null, NUM_THRESHOLDS),
        converged: result.converged,
        iterations: result.iterations,
        n_obs: n,
        ll_trace: result.trace,
    })
}

/// Result of the thresholds-only (null) fit.
#[derive(Debug, Clone)]
pub struct NullFit {
    pub thresholds: [f64; NUM_THRESHOLDS],
    pub log_likelihood: f64,
    pub converged: bool,
}

/// Fits the null model (no covariates). Its optimum places the implied
/// class probabilities at the empirical shares.
pub fn fit_null(labels: &[OrdinalLabel], options: &FitOptions) -> Result<NullFit, ProbitError> {
    if labels.is_empty() {
        return Err(ProbitError::Data(crate::data::DataError::Empty));
    }
    let design = null_design(labels);
    let qn_opts = QuasiNewtonOptions { max_iter: options.max_iter, tolerance: options.tolerance };
    let theta0 = initial_theta(&design, 0);
    let result = maximize(|theta| objective_theta(theta, 0, &design), &theta0, &qn_opts);
    let params = params_from_theta(&result.x, 0);
    Ok(NullFit {
        thresholds: *params.thresholds(),
        log_likelihood: result.value,
        converged: result.converged,
    })
}

fn null_design(labels: &[OrdinalLabel]) -> Dataset {
    use crate::data::FeatureSchema;
    let schema = FeatureSchema::new(Vec::new()).expect("empty schema is valid");
    Dataset::from_parts_unchecked(schema, Vec::new(), labels.to_vec())
}

/// Threshold initialization: inverse normal CDF of the cumulative class
/// shares (the null-model optimum), clamped away from 0/1 and forced
/// strictly increasing.
fn initial_theta(design: &Dataset, p: usize) -> Vec<f64> {
    let counts = design.class_counts();
    let n = design.n_rows() as f64;
    let mut taus = [0.0; NUM_THRESHOLDS];
    let mut cum = 0.0;
    for j in 0..NUM_THRESHOLDS {
        cum += counts[j] as f64;
        let share = (cum / n).clamp(1e-4, 1.0 - 1e-4);
        taus[j] = norm_quantile(share);
        if j > 0 && taus[j] < taus[j - 1] + 1e-3 {
            taus[j] = taus[j - 1] + 1e-3;
        }
    }
    let mut theta = vec![0.0; p + NUM_THRESHOLDS];
    theta[p] = taus[0];
    for j in 1..NUM_THRESHOLDS {
        theta[p + j] = (taus[j] - taus[j - 1]).ln();
    }
    theta
}

// Increment exponents are clamped so exp() stays positive and finite.
const DELTA_CLAMP: f64 = 700.0;

fn thresholds_from_theta(theta: &[f64], p: usize) -> [f64; NUM_THRESHOLDS] {
    let mut taus = [0.0; NUM_THRESHOLDS];
    taus[0] = theta[p];
    for j in 1..NUM_THRESHOLDS {
        taus[j] = taus[j - 1] + theta[p + j].clamp(-DELTA_CLAMP, DELTA_CLAMP).exp();
    }
    taus
}

fn params_from_theta(theta: &[f64], p: usize) -> OrderedProbitParams {
    OrderedProbitParams::new(theta[..p].to_vec(), thresholds_from_theta(theta, p))
        .expect("accepted optimizer points keep thresholds ordered")
}

/// Log-likelihood and gradient in unconstrained coordinates. Degenerate
/// points (threshold absorption at extreme magnitudes) evaluate to `-inf`
/// and are rejected by the line search.
fn objective_theta(theta: &[f64], p: usize, design: &Dataset) -> (f64, Vec<f64>) {
    let taus = thresholds_from_theta(theta, p);
    let (ll, grad_orig) = super::score_raw(&theta[..p], &taus, design);
    if !ll.is_finite() {
        return (ll, grad_orig);
    }
    let mut grad = vec![0.0; theta.len()];
    grad[..p].copy_from_slice(&grad_orig[..p]);
    // d tau_j / d tau_0 = 1 for all j; d tau_j / d d_m = exp(d_m) for m <= j
    let tau_grad = &grad_orig[p..];
    grad[p] = tau_grad.iter().sum();
    for m in 1..NUM_THRESHOLDS {
        let e = theta[p + m].clamp(-DELTA_CLAMP, DELTA_CLAMP).exp();
        grad[p + m] = e * tau_grad[m..].iter().sum::<f64>();
    }
    (ll, grad)
}

/// Covariance in `(beta, tau)` coordinates: inverse negative
/// finite-difference Hessian of the unconstrained objective, pushed through
/// the reparameterization Jacobian (delta method).
fn inference(
    result: &MaximizeResult,
    p: usize,
    design: &Dataset,
    params: &OrderedProbitParams,
) -> (Option<Matrix>, Option<Vec<f64>>, Option<Vec<f64>>) {
    let dim = p + NUM_THRESHOLDS;
    let theta = &result.x;
    let mut hessian = Matrix::zeros(dim, dim);
    for i in 0..dim {
        let h = 1e-4 * theta[i].abs().max(1.0);
        let mut plus = theta.clone();
        plus[i] += h;
        let mut minus = theta.clone();
        minus[i] -= h;
        let (_, g_plus) = objective_theta(&plus, p, design);
        let (_, g_minus) = objective_theta(&minus, p, design);
        for j in 0..dim {
            hessian[(i, j)] = (g_plus[j] - g_minus[j]) / (2.0 * h);
        }
    }
    hessian.symmetrize();

    let Some(cov_theta) = hessian.scale(-1.0).inverse() else {
        return (None, None, None);
    };

    // Jacobian of (beta, tau) with respect to theta
    let mut jac = Matrix::identity(dim);
    for j in 0..NUM_THRESHOLDS {
        jac[(p + j, p)] = 1.0;
        for m in 1..=j {
            jac[(p + j, p + m)] = theta[p + m].clamp(-DELTA_CLAMP, DELTA_CLAMP).exp();
        }
    }
    let mut cov = jac.matmul(&cov_theta).matmul(&jac.transpose());
    cov.symmetrize();

    let diag: Vec<f64> = (0..dim).map(|i| cov[(i, i)]).collect();
    if diag.iter().any(|&d| d < 0.0 || !d.is_finite()) {
        return (None, None, None);
    }
    let std_errors: Vec<f64> = diag.iter().map(|d| d.sqrt()).collect();
    let mut estimates = params.beta().to_vec();
    estimates.extend_from_slice(params.thresholds());
    let t_values: Vec<f64> =
        estimates.iter().zip(&std_errors).map(|(e, s)| if *s > 0.0 { e / s } else { f64::NAN }).collect();
    (Some(cov), Some(std_errors), Some(t_values))
}
