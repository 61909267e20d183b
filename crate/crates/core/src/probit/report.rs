//! Text reports and the machine-readable dump for fitted probit models.
//!
//! The table report mirrors the usual estimation-table layout: attribute
//! rows with estimates and t-values, threshold rows, then log-likelihoods,
//! McFadden's R-squared, and AIC for the full and null models. The dump is
//! a flat `key = value` file holding coefficients, thresholds, and the
//! covariance with full round-trip precision.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{OrderedProbitFit, OrderedProbitParams, ProbitError};
use crate::data::DataError;
use crate::numeric::linalg::Matrix;
use crate::NUM_THRESHOLDS;

const THRESHOLD_LABELS: [&str; NUM_THRESHOLDS] = ["0|1", "1|2", "2|3", "3|4", "4|5+"];

/// Human-readable estimation table.
pub fn probit_table_report(fit: &OrderedProbitFit) -> String {
    let mut out = String::new();
    let width = fit
        .feature_names
        .iter()
        .map(String::len)
        .chain(std::iter::once("attribute".len()))
        .max()
        .unwrap_or(12)
        .max(12);
    let _ = writeln!(out, "ordered probit weekly home delivery frequency model");
    let _ = writeln!(out, "{:-<w$}", "", w = width + 22);
    let _ = writeln!(out, "{:<w$}  {:>10}  {:>8}", "attribute", "estimate", "t-value", w = width);
    let fmt_t = |t: Option<f64>| match t {
        Some(v) if v.is_finite() => format!("{v:>8.2}"),
        _ => format!("{:>8}", "-"),
    };
    for (k, name) in fit.feature_names.iter().enumerate() {
        let t = fit.t_values.as_ref().map(|ts| ts[k]);
        let _ = writeln!(
            out,
            "{:<w$}  {:>10.4}  {}",
            name,
            fit.params.beta()[k],
            fmt_t(t),
            w = width
        );
    }
    let p = fit.params.n_features();
    let _ = writeln!(out, "{:-<w$}", "", w = width + 22);
    for (j, label) in THRESHOLD_LABELS.iter().enumerate() {
        let t = fit.t_values.as_ref().map(|ts| ts[p + j]);
        let _ = writeln!(
            out,
            "{:<w$}  {:>10.4}  {}",
            label,
            fit.params.thresholds()[j],
            fmt_t(t),
            w = width
        );
    }
    let _ = writeln!(out, "{:-<w$}", "", w = width + 22);
    let _ = writeln!(out, "{:<w$}  {:>10.1}", "log likelihood (full)", fit.log_likelihood_full, w = width);
    let _ = writeln!(out, "{:<w$}  {:>10.1}", "log likelihood (null)", fit.log_likelihood_null, w = width);
    let _ = writeln!(out, "{:<w$}  {:>10.2}", "McFadden's R^2", fit.mcfadden_r2, w = width);
    let _ = writeln!(out, "{:<w$}  {:>10.1}", "AIC (full)", fit.aic_full, w = width);
    let _ = writeln!(out, "{:<w$}  {:>10.1}", "AIC (null)", fit.aic_null, w = width);
    let _ = writeln!(out, "{:<w$}  {:>10}", "observations", fit.n_obs, w = width);
    let _ = writeln!(out, "{:<w$}  {:>10}", "converged", fit.converged, w = width);
    let _ = writeln!(out, "{:<w$}  {:>10}", "iterations", fit.iterations, w = width);
    if fit.covariance.is_none() {
        let _ = writeln!(out, "note: Hessian singular or indefinite; covariance omitted");
    }
    out
}

/// Machine-readable `key = value` dump with full round-trip precision.
pub fn probit_dump(fit: &OrderedProbitFit) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model = probit");
    let _ = writeln!(out, "n_features = {}", fit.params.n_features());
    let _ = writeln!(out, "n_obs = {}", fit.n_obs);
    let _ = writeln!(out, "converged = {}", fit.converged);
    let _ = writeln!(out, "iterations = {}", fit.iterations);
    let _ = writeln!(out, "ll_full = {}", fit.log_likelihood_full);
    let _ = writeln!(out, "ll_null = {}", fit.log_likelihood_null);
    let _ = writeln!(out, "mcfadden_r2 = {}", fit.mcfadden_r2);
    let _ = writeln!(out, "aic_full = {}", fit.aic_full);
    let _ = writeln!(out, "aic_null = {}", fit.aic_null);
    for (k, name) in fit.feature_names.iter().enumerate() {
        let _ = writeln!(out, "feature_{k} = {name}");
        let _ = writeln!(out, "beta_{k} = {}", fit.params.beta()[k]);
    }
    for (j, tau) in fit.params.thresholds().iter().enumerate() {
        let _ = writeln!(out, "tau_{j} = {tau}");
    }
    if let (Some(se), Some(t)) = (&fit.std_errors, &fit.t_values) {
        for (k, (s, tv)) in se.iter().zip(t).enumerate() {
            let _ = writeln!(out, "se_{k} = {s}");
            let _ = writeln!(out, "t_{k} = {tv}");
        }
    }
    if let Some(cov) = &fit.covariance {
        for i in 0..cov.rows() {
            for j in 0..cov.cols() {
                let _ = writeln!(out, "cov_{i}_{j} = {}", cov[(i, j)]);
            }
        }
    }
    out
}

/// Parses a dump written by [`probit_dump`]. The trace is not serialized,
/// so the reloaded fit carries an empty one.
pub fn parse_probit_dump(text: &str) -> Result<OrderedProbitFit, ProbitError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| bad_dump(i + 1, "expected `key = value`"))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    let get = |key: &str| -> Result<&String, ProbitError> {
        map.get(key).ok_or_else(|| bad_dump(0, &format!("missing key `{key}`")))
    };
    let parse_f64 = |key: &str| -> Result<f64, ProbitError> {
        get(key)?.parse().map_err(|_| bad_dump(0, &format!("bad number for `{key}`")))
    };
    if get("model")? != "probit" {
        return Err(bad_dump(0, "not a probit dump"));
    }
    let p: usize =
        get("n_features")?.parse().map_err(|_| bad_dump(0, "bad `n_features`"))?;
    let mut feature_names = Vec::with_capacity(p);
    let mut beta = Vec::with_capacity(p);
    for k in 0..p {
        feature_names.push(get(&format!("feature_{k}"))?.clone());
        beta.push(parse_f64(&format!("beta_{k}"))?);
    }
    let mut thresholds = [0.0; NUM_THRESHOLDS];
    for (j, tau) in thresholds.iter_mut().enumerate() {
        *tau = parse_f64(&format!("tau_{j}"))?;
    }
    let params = OrderedProbitParams::new(beta, thresholds)?;

    let dim = p + NUM_THRESHOLDS;
    let covariance = if map.contains_key("cov_0_0") {
        let mut cov = Matrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                cov[(i, j)] = parse_f64(&format!("cov_{i}_{j}"))?;
            }
        }
        Some(cov)
    } else {
        None
    };
    let (std_errors, t_values) = if map.contains_key("se_0") {
        let mut se = Vec::with_capacity(dim);
        let mut tv = Vec::with_capacity(dim);
        for k in 0..dim {
            se.push(parse_f64(&format!("se_{k}"))?);
            tv.push(parse_f64(&format!("t_{k}"))?);
        }
        (Some(se), Some(tv))
    } else {
        (None, None)
    };

    Ok(OrderedProbitFit {
        feature_names,
        params,
        covariance,
        std_errors,
        t_values,
        log_likelihood_full: parse_f64("ll_full")?,
        log_likelihood_null: parse_f64("ll_null")?,
        mcfadden_r2: parse_f64("mcfadden_r2")?,
        aic_full: parse_f64("aic_full")?,
        aic_null: parse_f64("aic_null")?,
        converged: get("converged")? == "true",
        iterations: get("iterations")?.parse().map_err(|_| bad_dump(0, "bad `iterations`"))?,
        n_obs: get("n_obs")?.parse().map_err(|_| bad_dump(0, "bad `n_obs`"))?,
        ll_trace: Vec::new(),
    })
}

fn bad_dump(line: usize, message: &str) -> ProbitError {
    ProbitError::Data(DataError::SpecParse {
        path: "probit dump".into(),
        line,
        message: message.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, SyntheticSpec};
    use crate::probit::{fit, FitOptions};

    #[test]
    fn dump_round_trips() {
        let spec = SyntheticSpec::household_default();
        let data = generate_synthetic(&spec, 1_500, 4).unwrap();
        let names: Vec<String> =
            data.schema().names().into_iter().filter(|n| n != "Never_shop_online").collect();
        let fitted = fit(&data, &names, &FitOptions::default()).unwrap();
        let dump = probit_dump(&fitted);
        let back = parse_probit_dump(&dump).unwrap();
        assert_eq!(back.params, fitted.params);
        assert_eq!(back.feature_names, fitted.feature_names);
        assert_eq!(back.log_likelihood_full, fitted.log_likelihood_full);
        assert_eq!(back.covariance, fitted.covariance);
        assert_eq!(back.t_values, fitted.t_values);
        assert_eq!(back.converged, fitted.converged);
    }

    #[test]
    fn table_report_contains_fit_statistics() {
        let spec = SyntheticSpec::household_default();
        let data = generate_synthetic(&spec, 900, 8).unwrap();
        let names = data.schema().names();
        let fitted = fit(&data, &names, &FitOptions::default()).unwrap();
        let report = probit_table_report(&fitted);
        assert!(report.contains("log likelihood (full)"));
        assert!(report.contains("McFadden's R^2"));
        assert!(report.contains("AIC (null)"));
        assert!(report.contains("0|1"));
        assert!(report.contains("4|5+"));
        for name in &names {
            assert!(report.contains(name.as_str()), "missing {name}");
        }
    }
}
