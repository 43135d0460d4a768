//! Levenberg-Marquardt for small dense least-squares problems.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop when `‖Jᵀr‖∞` falls below this.
    pub gradient_tol: f64,
    /// Stop when `‖r‖` falls below this.
    pub residual_tol: f64,
    /// Stop when the accepted step is shorter than this.
    pub step_tol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions { max_iterations: 200, gradient_tol: 1e-12, residual_tol: 1e-14, step_tol: 1e-15 }
    }
}

#[derive(Debug, Clone)]
pub struct LmResult {
    pub x: Vec<f64>,
    /// `‖r(x)‖`.
    pub residual: f64,
    pub iterations: usize,
}

/// Minimizes `‖r(x)‖²`. `eval` returns the residual vector and its Jacobian.
pub fn levenberg_marquardt<F>(eval: F, x0: &[f64], opts: &LmOptions) -> LmResult
where
    F: Fn(&[f64]) -> (DVector<f64>, DMatrix<f64>),
{
    let n = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let (mut r, mut j) = eval(x.as_slice());
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        if cost.sqrt() <= opts.residual_tol {
            break;
        }
        let jt = j.transpose();
        let g = &jt * &r;
        if g.amax() <= opts.gradient_tol {
            break;
        }
        let jtj = &jt * &j;
        let mut accepted = false;
        let mut step_norm = 0.0;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += lambda * (jtj[(i, i)].max(1e-12));
            }
            let Some(step) = a.cholesky().map(|ch| ch.solve(&(-&g))) else {
                lambda *= 10.0;
                continue;
            };
            let trial = &x + &step;
            let (tr, tj) = eval(trial.as_slice());
            let tcost = tr.norm_squared();
            if tcost < cost {
                x = trial;
                r = tr;
                j = tj;
                cost = tcost;
                lambda = (lambda / 3.0).max(1e-15);
                step_norm = step.norm();
                accepted = true;
                break;
            }
            lambda *= 4.0;
        }
        if !accepted || step_norm < opts.step_tol {
            break;
        }
    }
    LmResult { x: x.iter().copied().collect(), residual: cost.sqrt(), iterations }
}

/// Central-difference Jacobian of `f` at `x`.
pub fn numeric_jacobian<F>(f: &F, x: &[f64], h: f64) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> DVector<f64>,
{
    let mut xp = x.to_vec();
    let m = f(x).len();
    let mut jac = DMatrix::zeros(m, x.len());
    for i in 0..x.len() {
        xp[i] = x[i] + h;
        let fp = f(&xp);
        xp[i] = x[i] - h;
        let fm = f(&xp);
        xp[i] = x[i];
        jac.set_column(i, &((fp - fm) / (2.0 * h)));
    }
    jac
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let eval = |x: &[f64]| {
            let r = DVector::from_vec(vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]]);
            let j = DMatrix::from_row_slice(2, 2, &[-20.0 * x[0], 10.0, -1.0, 0.0]);
            (r, j)
        };
        let res = levenberg_marquardt(eval, &[-1.2, 1.0], &LmOptions::default());
        assert!((res.x[0] - 1.0).abs() < 1e-10 && (res.x[1] - 1.0).abs() < 1e-10);
        assert!(res.residual < 1e-12);
    }

    #[test]
    fn numeric_jacobian_matches_analytic() {
        let f = |x: &[f64]| DVector::from_vec(vec![x[0].sin() * x[1], x[1] * x[1]]);
        let j = numeric_jacobian(&f, &[0.4, 1.3], 1e-6);
        assert!((j[(0, 0)] - 0.4f64.cos() * 1.3).abs() < 1e-8);
        assert!((j[(0, 1)] - 0.4f64.sin()).abs() < 1e-8);
        assert!((j[(1, 1)] - 2.6).abs() < 1e-8);
        assert!(j[(1, 0)].abs() < 1e-12);
    }
}
