//! Ordered probit model for 6-class ordinal outcomes.
//!
//! The latent outcome `y* = beta'x + eps` (standard normal `eps`) is binned
//! by five strictly increasing thresholds. Class probabilities are normal
//! CDF differences; estimation maximizes the log-likelihood over an
//! unconstrained reparameterization of the thresholds (see [`fit`]).

mod estimate;
mod report;

pub use estimate::{aic, fit, fit_null, mcfadden_r2, FitOptions, NullFit, OrderedProbitFit};
pub use report::{parse_probit_dump, probit_dump, probit_table_report};

use thiserror::Error;

use crate::data::{DataError, Dataset, OrdinalLabel};
use crate::numeric::{norm_cdf, norm_pdf, norm_sf, KahanSum};
use crate::{NUM_CLASSES, NUM_THRESHOLDS};

/// Errors raised by ordered probit operations.
#[derive(Debug, Error)]
pub enum ProbitError {
    #[error("thresholds must be strictly increasing, got {0:?}")]
    ThresholdOrder([f64; NUM_THRESHOLDS]),
    #[error("parameters must be finite")]
    NonFiniteParams,
    #[error("dimension mismatch: expected {expected} features, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("feature vector contains non-finite values")]
    NonFiniteInput,
    #[error("fit requires at least 2 distinct labels")]
    DegenerateLabels,
    #[error("fit requires n > p + {} (got n = {n}, p = {p})", NUM_THRESHOLDS)]
    TooFewRows { n: usize, p: usize },
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Coefficients and thresholds of an ordered probit model.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedProbitParams {
    beta: Vec<f64>,
    thresholds: [f64; NUM_THRESHOLDS],
}

impl OrderedProbitParams {
    pub fn new(beta: Vec<f64>, thresholds: [f64; NUM_THRESHOLDS]) -> Result<Self, ProbitError> {
        if !beta.iter().all(|b| b.is_finite()) || !thresholds.iter().all(|t| t.is_finite()) {
            return Err(ProbitError::NonFiniteParams);
        }
        if !thresholds.windows(2).all(|w| w[0] < w[1]) {
            return Err(ProbitError::ThresholdOrder(thresholds));
        }
        Ok(Self { beta, thresholds })
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn thresholds(&self) -> &[f64; NUM_THRESHOLDS] {
        &self.thresholds
    }

    pub fn n_features(&self) -> usize {
        self.beta.len()
    }

    fn check_x(&self, x: &[f64]) -> Result<(), ProbitError> {
        if x.len() != self.beta.len() {
            return Err(ProbitError::DimensionMismatch { expected: self.beta.len(), found: x.len() });
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(ProbitError::NonFiniteInput);
        }
        Ok(())
    }

    fn systematic(&self, x: &[f64]) -> f64 {
        self.beta.iter().zip(x).map(|(b, v)| b * v).sum()
    }
}

/// Probability floor applied before taking logs, so extreme tails never
/// produce `-inf`.
pub(crate) const PROB_FLOOR: f64 = 1e-300;

/// Class probabilities for systematic utility `bx`.
pub(crate) fn probabilities_from_systematic(
    thresholds: &[f64; NUM_THRESHOLDS],
    bx: f64,
) -> [f64; NUM_CLASSES] {
    let mut probs = [0.0; NUM_CLASSES];
    let cum: Vec<f64> = thresholds.iter().map(|t| norm_cdf(t - bx)).collect();
    probs[0] = cum[0];
    for j in 1..NUM_THRESHOLDS {
        probs[j] = (cum[j] - cum[j - 1]).max(0.0);
    }
    probs[NUM_CLASSES - 1] = norm_sf(thresholds[NUM_THRESHOLDS - 1] - bx);
    probs
}

/// Probability of one observed label, floored at [`PROB_FLOOR`]. Shares the
/// exact arithmetic of [`probabilities_from_systematic`] so analytic scores
/// match finite differences of the log-likelihood.
pub(crate) fn label_probability(
    thresholds: &[f64; NUM_THRESHOLDS],
    bx: f64,
    label: usize,
) -> f64 {
    let p = if label == 0 {
        norm_cdf(thresholds[0] - bx)
    } else if label == NUM_CLASSES - 1 {
        norm_sf(thresholds[NUM_THRESHOLDS - 1] - bx)
    } else {
        (norm_cdf(thresholds[label] - bx) - norm_cdf(thresholds[label - 1] - bx)).max(0.0)
    };
    p.max(PROB_FLOOR)
}

/// Class probabilities `P(Y = c | x)` for `c = 0..=5`. Entries lie in
/// `[0, 1]` and sum to 1 within 1e-12.
pub fn class_probabilities(
    params: &OrderedProbitParams,
    x: &[f64],
) -> Result<[f64; NUM_CLASSES], ProbitError> {
    params.check_x(x)?;
    Ok(probabilities_from_systematic(&params.thresholds, params.systematic(x)))
}

/// Log-likelihood of a dataset whose columns match the coefficient vector.
pub fn log_likelihood(params: &OrderedProbitParams, data: &Dataset) -> Result<f64, ProbitError> {
    check_data(params, data)?;
    let mut acc = KahanSum::new();
    for i in 0..data.n_rows() {
        let bx = params.systematic(data.row(i));
        acc.add(label_probability(&params.thresholds, bx, data.labels()[i].value()).ln());
    }
    Ok(acc.value())
}

/// Analytic gradient of the log-likelihood over `(beta, tau)`, in that
/// order (length `p + 5`).
pub fn score(params: &OrderedProbitParams, data: &Dataset) -> Result<Vec<f64>, ProbitError> {
    check_data(params, data)?;
    Ok(score_unchecked(params, data).1)
}

/// One-pass log-likelihood and original-coordinate gradient.
pub(crate) fn score_unchecked(params: &OrderedProbitParams, data: &Dataset) -> (f64, Vec<f64>) {
    score_raw(&params.beta, &params.thresholds, data)
}

/// Like [`score_unchecked`] but over raw arrays, tolerating degenerate
/// thresholds (returns `-inf` so optimizer line searches reject the point).
pub(crate) fn score_raw(
    beta: &[f64],
    taus: &[f64; NUM_THRESHOLDS],
    data: &Dataset,
) -> (f64, Vec<f64>) {
    let p = beta.len();
    if !taus.iter().all(|t| t.is_finite()) || !taus.windows(2).all(|w| w[0] < w[1]) {
        return (f64::NEG_INFINITY, vec![0.0; p + NUM_THRESHOLDS]);
    }
    let mut grad = vec![0.0; p + NUM_THRESHOLDS];
    let mut ll = KahanSum::new();
    for i in 0..data.n_rows() {
        let x = data.row(i);
        let y = data.labels()[i].value();
        let bx: f64 = beta.iter().zip(x).map(|(b, v)| b * v).sum();
        let prob = label_probability(taus, bx, y);
        ll.add(prob.ln());
        let pdf_hi = if y < NUM_CLASSES - 1 { norm_pdf(taus[y] - bx) } else { 0.0 };
        let pdf_lo = if y > 0 { norm_pdf(taus[y - 1] - bx) } else { 0.0 };
        let beta_factor = (pdf_lo - pdf_hi) / prob;
        for (g, xv) in grad[..p].iter_mut().zip(x) {
            *g += beta_factor * xv;
        }
        if y < NUM_CLASSES - 1 {
            grad[p + y] += pdf_hi / prob;
        }
        if y > 0 {
            grad[p + y - 1] -= pdf_lo / prob;
        }
    }
    (ll.value(), grad)
}

/// Hard class prediction: argmax probability, ties resolved toward the
/// lowest class.
pub fn predict_class(params: &OrderedProbitParams, x: &[f64]) -> Result<OrdinalLabel, ProbitError> {
    let probs = class_probabilities(params, x)?;
    Ok(argmax_label(&probs))
}

pub(crate) fn argmax_label(probs: &[f64; NUM_CLASSES]) -> OrdinalLabel {
    let mut best = 0;
    for c in 1..NUM_CLASSES {
        if probs[c] > probs[best] {
            best = c;
        }
    }
    OrdinalLabel::new(best as i64).expect("class index in range")
}

/// Mean predicted class probabilities over a dataset; sums to 1 within
/// 1e-10.
pub fn expected_class_shares(
    params: &OrderedProbitParams,
    data: &Dataset,
) -> Result<[f64; NUM_CLASSES], ProbitError> {
    check_data(params, data)?;
    let mut acc = [KahanSum::new(); NUM_CLASSES];
    for i in 0..data.n_rows() {
        let probs = probabilities_from_systematic(&params.thresholds, params.systematic(data.row(i)));
        for (a, p) in acc.iter_mut().zip(probs) {
            a.add(p);
        }
    }
    let n = data.n_rows() as f64;
    Ok(acc.map(|a| a.value() / n))
}

/// Marginal effects `dP(Y = c | x) / dx_k` as a 6 x p matrix (classes by
/// features). Columns sum to zero across classes.
pub fn marginal_effects(
    params: &OrderedProbitParams,
    x: &[f64],
) -> Result<Vec<Vec<f64>>, ProbitError> {
    params.check_x(x)?;
    let bx = params.systematic(x);
    let pdf: Vec<f64> = params.thresholds.iter().map(|t| norm_pdf(t - bx)).collect();
    let mut effects = Vec::with_capacity(NUM_CLASSES);
    for c in 0..NUM_CLASSES {
        let factor = if c == 0 {
            -pdf[0]
        } else if c == NUM_CLASSES - 1 {
            pdf[NUM_THRESHOLDS - 1]
        } else {
            pdf[c - 1] - pdf[c]
        };
        effects.push(params.beta.iter().map(|b| factor * b).collect());
    }
    Ok(effects)
}

fn check_data(params: &OrderedProbitParams, data: &Dataset) -> Result<(), ProbitError> {
    if data.n_features() != params.n_features() {
        return Err(ProbitError::DimensionMismatch {
            expected: params.n_features(),
            found: data.n_features(),
        });
    }
    if data.n_rows() == 0 {
        return Err(ProbitError::Data(DataError::Empty));
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::data::{ColumnCategory, ColumnDef, ColumnKind, FeatureSchema};

    pub(crate) fn dataset_from(rows: Vec<Vec<f64>>, labels: Vec<usize>) -> Dataset {
        let p = rows[0].len();
        let cols = (0..p)
            .map(|j| ColumnDef::new(format!("x{j}"), ColumnKind::Continuous, ColumnCategory::Trip))
            .collect();
        let schema = FeatureSchema::new(cols).unwrap();
        let labels = labels.into_iter().map(|l| OrdinalLabel::new(l as i64).unwrap()).collect();
        Dataset::new(schema, rows, labels).unwrap()
    }

    fn centered_params() -> OrderedProbitParams {
        OrderedProbitParams::new(vec![0.0], [-1.5, -0.5, 0.5, 1.5, 2.5]).unwrap()
    }

    #[test]
    fn params_reject_unordered_thresholds() {
        assert!(OrderedProbitParams::new(vec![], [0.0, 0.0, 1.0, 2.0, 3.0]).is_err());
        assert!(OrderedProbitParams::new(vec![f64::NAN], [-2.0, -1.0, 0.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn class_probabilities_match_cdf_oracle() {
        // high-precision reference values for tau = (-1.5,-0.5,0.5,1.5,2.5), bx = 0
        let want = [
            0.066807201268858066,
            0.24173033745712883,
            0.38292492254802621,
            0.24173033745712883,
            0.060597535943081931,
            0.0062096653257761352,
        ];
        let probs = class_probabilities(&centered_params(), &[123.0]).unwrap();
        for (got, want) in probs.iter().zip(want) {
            assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
        }
        let total: f64 = probs.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn extreme_systematic_utility_saturates() {
        let params = OrderedProbitParams::new(vec![1.0], [-1.5, -0.5, 0.5, 1.5, 2.5]).unwrap();
        let hi = class_probabilities(&params, &[1e6]).unwrap();
        for c in 0..5 {
            assert!(hi[c].abs() < 1e-12);
        }
        assert!((hi[5] - 1.0).abs() < 1e-12);
        let lo = class_probabilities(&params, &[-1e6]).unwrap();
        assert!((lo[0] - 1.0).abs() < 1e-12);
        for c in 1..6 {
            assert!(lo[c].abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let err = class_probabilities(&centered_params(), &[1.0, 2.0]).unwrap_err();
        assert!(matches!(err, ProbitError::DimensionMismatch { expected: 1, found: 2 }));
    }

    #[test]
    fn log_likelihood_single_row_and_additivity() {
        // tau_0 = 0, bx = 0 gives P(0) = 0.5
        let params = OrderedProbitParams::new(vec![0.0], [0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        let single = dataset_from(vec![vec![1.0]], vec![0]);
        let ll = log_likelihood(&params, &single).unwrap();
        assert!((ll - 0.5f64.ln()).abs() < 1e-12);

        let data = dataset_from(vec![vec![0.3], vec![-1.2], vec![0.8]], vec![0, 2, 5]);
        let doubled = dataset_from(
            vec![vec![0.3], vec![-1.2], vec![0.8], vec![0.3], vec![-1.2], vec![0.8]],
            vec![0, 2, 5, 0, 2, 5],
        );
        let one = log_likelihood(&centered_params(), &data).unwrap();
        let two = log_likelihood(&centered_params(), &doubled).unwrap();
        assert!((two - 2.0 * one).abs() < 1e-10);
    }

    #[test]
    fn null_log_likelihood_matches_class_count_oracle() {
        // beta = 0 with thresholds at empirical-share quantiles gives
        // sum_c n_c ln(n_c / n)
        let labels = vec![0, 0, 0, 1, 1, 2, 2, 2, 2, 3, 4, 4, 5, 5, 5];
        let n = labels.len() as f64;
        let counts = [3.0, 2.0, 4.0, 1.0, 2.0, 3.0];
        let mut cum = 0.0;
        let mut taus = [0.0; 5];
        for j in 0..5 {
            cum += counts[j];
            taus[j] = crate::numeric::norm_quantile(cum / n);
        }
        let params = OrderedProbitParams::new(vec![0.0], taus).unwrap();
        let rows = labels.iter().map(|_| vec![0.0]).collect();
        let data = dataset_from(rows, labels);
        let want: f64 = counts.iter().map(|&c| c * (c / n).ln()).sum();
        let got = log_likelihood(&params, &data).unwrap();
        assert!((got - want).abs() < 1e-9, "got {got}, want {want}");
    }

    #[test]
    fn score_matches_finite_differences() {
        use rand::Rng;
        let mut rng = crate::seed::rng(314);
        for _ in 0..30 {
            let p = 3;
            let beta: Vec<f64> = (0..p).map(|_| rng.random_range(-0.8..0.8)).collect();
            let mut taus = [0.0; 5];
            let mut t = rng.random_range(-2.0..-1.0);
            for tau in &mut taus {
                *tau = t;
                t += rng.random_range(0.3..1.0);
            }
            let params = OrderedProbitParams::new(beta, taus).unwrap();
            let rows: Vec<Vec<f64>> =
                (0..20).map(|_| (0..p).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
            let labels: Vec<usize> = (0..20).map(|_| rng.random_range(0..6)).collect();
            let data = dataset_from(rows, labels);

            let analytic = score(&params, &data).unwrap();
            let h = 1e-5;
            for k in 0..p + 5 {
                let perturb = |sign: f64| {
                    let mut b = params.beta().to_vec();
                    let mut t = *params.thresholds();
                    if k < p {
                        b[k] += sign * h;
                    } else {
                        t[k - p] += sign * h;
                    }
                    let q = OrderedProbitParams::new(b, t).unwrap();
                    log_likelihood(&q, &data).unwrap()
                };
                let fd = (perturb(1.0) - perturb(-1.0)) / (2.0 * h);
                let denom = analytic[k].abs().max(fd.abs()).max(1e-6);
                assert!(
                    (analytic[k] - fd).abs() / denom < 1e-4,
                    "component {k}: analytic {}, fd {fd}",
                    analytic[k]
                );
            }
        }
    }

    #[test]
    fn tau_score_antisymmetric_under_label_reversal() {
        // beta = 0 and symmetric thresholds: reversing labels mirrors the
        // tau-gradient with a sign flip
        let taus = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let params = OrderedProbitParams::new(vec![0.0], taus).unwrap();
        let labels = vec![0, 1, 1, 2, 3, 5, 5, 4, 2, 0];
        let reversed: Vec<usize> = labels.iter().map(|&l| 5 - l).collect();
        let rows: Vec<Vec<f64>> = labels.iter().map(|_| vec![0.5]).collect();
        let g = score(&params, &dataset_from(rows.clone(), labels)).unwrap();
        let g_rev = score(&params, &dataset_from(rows, reversed)).unwrap();
        for j in 0..5 {
            assert!(
                (g_rev[1 + j] + g[1 + 4 - j]).abs() < 1e-10,
                "tau {j}: {} vs {}",
                g_rev[1 + j],
                g[1 + 4 - j]
            );
        }
    }

    #[test]
    fn predict_class_tie_breaks_low() {
        // huge positive utility: class 5
        let params = OrderedProbitParams::new(vec![1.0], [-1.5, -0.5, 0.5, 1.5, 2.5]).unwrap();
        assert_eq!(predict_class(&params, &[1e6]).unwrap().value(), 5);
        // symmetric probabilities around the middle: classes 2 and 3 tie exactly
        let sym = OrderedProbitParams::new(vec![0.0], [-2.0, -1.0, 0.0, 1.0, 2.0]).unwrap();
        let probs = class_probabilities(&sym, &[0.0]).unwrap();
        assert_eq!(probs[2], probs[3]);
        assert_eq!(predict_class(&sym, &[0.0]).unwrap().value(), 2);
        // clear argmax at class 0
        let low = OrderedProbitParams::new(vec![0.0], [2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(predict_class(&low, &[0.0]).unwrap().value(), 0);
    }

    #[test]
    fn expected_shares_examples() {
        let params = centered_params();
        let single = dataset_from(vec![vec![0.7]], vec![3]);
        let shares = expected_class_shares(&params, &single).unwrap();
        let probs = class_probabilities(&params, &[0.7]).unwrap();
        assert_eq!(shares, probs);

        let twice = dataset_from(vec![vec![0.7], vec![0.7]], vec![3, 1]);
        let shares2 = expected_class_shares(&params, &twice).unwrap();
        for (a, b) in shares2.iter().zip(probs) {
            assert!((a - b).abs() < 1e-15);
        }
        let total: f64 = shares2.iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn marginal_effects_oracle_and_column_sums() {
        // p = 1, beta = 0.5, bx = 0, tau_0 = 0: dP(0)/dx = -phi(0) * 0.5
        let params = OrderedProbitParams::new(vec![0.5], [0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        let effects = marginal_effects(&params, &[0.0]).unwrap();
        assert!((effects[0][0] - (-0.19947114020071633)).abs() < 1e-12);

        let params2 = OrderedProbitParams::new(vec![0.4, -0.7], [-1.0, -0.2, 0.4, 1.1, 2.2]).unwrap();
        let effects2 = marginal_effects(&params2, &[0.3, -1.4]).unwrap();
        for k in 0..2 {
            let col_sum: f64 = (0..NUM_CLASSES).map(|c| effects2[c][k]).sum();
            assert!(col_sum.abs() < 1e-10);
        }

        let zero = OrderedProbitParams::new(vec![0.0, 0.0], [-1.0, -0.2, 0.4, 1.1, 2.2]).unwrap();
        let effects3 = marginal_effects(&zero, &[0.3, -1.4]).unwrap();
        assert!(effects3.iter().flatten().all(|&e| e == 0.0));
    }

    #[test]
    fn probability_normalization_over_random_draws() {
        use rand::Rng;
        let mut rng = crate::seed::rng(2718);
        for _ in 0..10_000 {
            let p = rng.random_range(1..4);
            let beta: Vec<f64> = (0..p).map(|_| rng.random_range(-2.0..2.0)).collect();
            let mut taus = [0.0; 5];
            let mut t = rng.random_range(-3.0..0.0);
            for tau in &mut taus {
                *tau = t;
                t += rng.random_range(1e-3..1.5);
            }
            let params = OrderedProbitParams::new(beta, taus).unwrap();
            let x: Vec<f64> = (0..p).map(|_| rng.random_range(-3.0..3.0)).collect();
            let probs = class_probabilities(&params, &x).unwrap();
            let total: f64 = probs.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!(probs.iter().all(|&q| (0.0..=1.0).contains(&q)));
            // cumulative probabilities nondecreasing
            let mut cum = 0.0;
            let mut last = 0.0;
            for q in &probs[..5] {
                cum += q;
                assert!(cum >= last - 1e-15);
                last = cum;
            }
        }
    }

    #[test]
    fn shift_equivariance_with_intercept_column() {
        // add c to every threshold and c*e1 to beta with x1 == 1
        let params = OrderedProbitParams::new(vec![0.3, -0.6], [-1.2, -0.4, 0.3, 1.0, 2.1]).unwrap();
        let c = 0.8125; // exactly representable
        let shifted_beta = vec![params.beta()[0] + c, params.beta()[1]];
        let shifted_taus = params.thresholds().map(|t| t + c);
        let shifted = OrderedProbitParams::new(shifted_beta, shifted_taus).unwrap();
        for &x2 in &[-1.5, 0.0, 0.25, 2.0] {
            let x = [1.0, x2];
            let a = class_probabilities(&params, &x).unwrap();
            let b = class_probabilities(&shifted, &x).unwrap();
            for (pa, pb) in a.iter().zip(b) {
                assert!((pa - pb).abs() < 1e-12);
            }
        }
    }
}
