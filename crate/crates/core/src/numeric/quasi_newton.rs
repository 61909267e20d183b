//! BFGS quasi-Newton maximizer with backtracking line search.
//!
//! Maximizes a smooth objective given a closure returning the value and
//! analytic gradient at a point. The line search enforces the Armijo
//! condition on the negated objective, so the objective value is strictly
//! nondecreasing across accepted steps.

use super::linalg::Matrix;

/// Stopping controls for [`maximize`].
#[derive(Debug, Clone, Copy)]
pub struct QuasiNewtonOptions {
    pub max_iter: usize,
    /// Convergence when the gradient max-norm falls below this.
    pub tolerance: f64,
}

impl Default for QuasiNewtonOptions {
    fn default() -> Self {
        Self { max_iter: 200, tolerance: 1e-6 }
    }
}

/// Outcome of a maximization run.
#[derive(Debug, Clone)]
pub struct MaximizeResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub grad_inf_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value at the start plus after every accepted step.
    pub trace: Vec<f64>,
}

const ARMIJO_C1: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MIN_STEP: f64 = 1e-20;
const CURVATURE_EPS: f64 = 1e-12;

/// BFGS ascent from `x0`. `objective` returns `(value, gradient)`.
pub fn maximize<F>(objective: F, x0: &[f64], opts: &QuasiNewtonOptions) -> MaximizeResult
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut value, mut grad) = objective(&x);
    assert!(value.is_finite(), "objective not finite at the start point");
    let mut trace = vec![value];
    let mut h_inv = Matrix::identity(n);
    let mut iterations = 0;

    while iterations < opts.max_iter {
        let gnorm = inf_norm(&grad);
        if gnorm < opts.tolerance {
            return MaximizeResult {
                x,
                value,
                grad_inf_norm: gnorm,
                gradient: grad,
                iterations,
                converged: true,
                trace,
            };
        }

        // ascent direction d = H_inv * grad
        let mut direction = mat_vec(&h_inv, &grad);
        let mut slope = dot(&grad, &direction);
        if !slope.is_finite() || slope <= 0.0 {
            // curvature information went bad; restart from steepest ascent
            h_inv = Matrix::identity(n);
            direction = grad.clone();
            slope = dot(&grad, &direction);
        }

        // backtracking line search (Armijo)
        let mut step = 1.0;
        let mut accepted = None;
        while step >= MIN_STEP {
            let candidate: Vec<f64> =
                x.iter().zip(&direction).map(|(xi, di)| xi + step * di).collect();
            let (cand_value, cand_grad) = objective(&candidate);
            if cand_value.is_finite() && cand_value >= value + ARMIJO_C1 * step * slope {
                accepted = Some((candidate, cand_value, cand_grad));
                break;
            }
            step *= BACKTRACK;
        }
        let Some((new_x, new_value, new_grad)) = accepted else {
            break; // line search failed; report current point
        };
        iterations += 1;

        // BFGS inverse-Hessian update (minimization convention on -objective)
        let s: Vec<f64> = new_x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = grad.iter().zip(&new_grad).map(|(old, new)| old - new).collect();
        let sy = dot(&s, &y);
        if sy > CURVATURE_EPS * norm2(&s) * norm2(&y) {
            let rho = 1.0 / sy;
            let hy = mat_vec(&h_inv, &y);
            let yhy = dot(&y, &hy);
            for i in 0..n {
                for j in 0..n {
                    h_inv[(i, j)] += (1.0 + rho * yhy) * rho * s[i] * s[j]
                        - rho * (s[i] * hy[j] + hy[i] * s[j]);
                }
            }
        }

        x = new_x;
        value = new_value;
        grad = new_grad;
        trace.push(value);
    }

    let gnorm = inf_norm(&grad);
    let converged = gnorm < opts.tolerance;
    MaximizeResult {
        x,
        value,
        grad_inf_norm: gnorm,
        gradient: grad,
        iterations,
        converged,
        trace,
    }
}

fn mat_vec(m: &Matrix, v: &[f64]) -> Vec<f64> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m[(i, j)] * v[j]).sum()).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maximizes_concave_quadratic() {
        // f(x) = -(x0-1)^2 - 2*(x1+3)^2, maximum at (1, -3)
        let obj = |x: &[f64]| {
            let v = -(x[0] - 1.0).powi(2) - 2.0 * (x[1] + 3.0).powi(2);
            let g = vec![-2.0 * (x[0] - 1.0), -4.0 * (x[1] + 3.0)];
            (v, g)
        };
        let result = maximize(obj, &[10.0, 10.0], &QuasiNewtonOptions::default());
        assert!(result.converged);
        assert!((result.x[0] - 1.0).abs() < 1e-5);
        assert!((result.x[1] + 3.0).abs() < 1e-5);
    }

    #[test]
    fn trace_is_nondecreasing() {
        let obj = |x: &[f64]| {
            let v = -(x[0].powi(4)) - x[1].powi(2) + x[0];
            let g = vec![-4.0 * x[0].powi(3) + 1.0, -2.0 * x[1]];
            (v, g)
        };
        let result = maximize(obj, &[2.0, -5.0], &QuasiNewtonOptions::default());
        assert!(result.converged);
        for pair in result.trace.windows(2) {
            assert!(pair[1] >= pair[0]);
        }
    }

    #[test]
    fn respects_max_iter() {
        let obj = |x: &[f64]| (-(x[0] - 3.0).powi(4), vec![-4.0 * (x[0] - 3.0).powi(3)]);
        let opts = QuasiNewtonOptions { max_iter: 1, tolerance: 1e-16 };
        let result = maximize(obj, &[0.0], &opts);
        assert!(!result.converged);
        assert_eq!(result.iterations, 1);
    }
}
