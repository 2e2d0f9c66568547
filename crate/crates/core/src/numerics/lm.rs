//! Levenberg-Marquardt for complex residuals.
//!
//! Unknowns and residual components are split into real and imaginary parts, so
//! residuals need not be holomorphic (gauge constraints such as `|U|^2 - 1` are
//! fine). The Jacobian is formed by central differences in the real coordinates.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop once the residual norm drops to this value.
    pub abs_tol: f64,
    /// Relative step tolerance.
    pub xtol: f64,
    /// Infinity-norm tolerance on the gradient `J^T r`, relative to `|r|`.
    pub gtol: f64,
    pub initial_damping: f64,
    /// Relative finite-difference step for the Jacobian.
    pub fd_step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            abs_tol: 1e-12,
            xtol: 1e-15,
            gtol: 1e-15,
            initial_damping: 1e-3,
            fd_step: 6e-6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub solution: Vec<C64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn to_real(x: &[C64]) -> DVector<f64> {
    DVector::from_iterator(2 * x.len(), x.iter().flat_map(|z| [z.re, z.im]))
}

fn to_complex(p: &DVector<f64>) -> Vec<C64> {
    p.as_slice()
        .chunks_exact(2)
        .map(|c| C64::new(c[0], c[1]))
        .collect()
}

fn eval<F>(f: &mut F, p: &DVector<f64>) -> Result<DVector<f64>>
where
    F: FnMut(&[C64]) -> Result<Vec<C64>>,
{
    let r = to_real(&f(&to_complex(p))?);
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::Evaluation("residual is not finite".into()));
    }
    Ok(r)
}

fn jacobian<F>(f: &mut F, p: &DVector<f64>, m: usize, rel_step: f64) -> Result<DMatrix<f64>>
where
    F: FnMut(&[C64]) -> Result<Vec<C64>>,
{
    let n = p.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut q = p.clone();
    for j in 0..n {
        let h = rel_step * p[j].abs().max(1.0);
        q[j] = p[j] + h;
        let fp = eval(f, &q)?;
        q[j] = p[j] - h;
        let fm = eval(f, &q)?;
        q[j] = p[j];
        if fp.len() != m || fm.len() != m {
            return Err(Error::Evaluation("residual length changed".into()));
        }
        jac.set_column(j, &((fp - fm) / (2.0 * h)));
    }
    Ok(jac)
}

/// Minimizes `|residual(x)|^2` starting from `x0`.
///
/// Running out of iterations is reported through `converged = false`, not as an error.
pub fn lm_fit<F>(mut residual: F, x0: &[C64], opts: &LmOptions) -> Result<FitResult>
where
    F: FnMut(&[C64]) -> Result<Vec<C64>>,
{
    let mut p = to_real(x0);
    let mut r = eval(&mut residual, &p)?;
    let m = r.len();
    let mut cost = r.norm_squared();
    let mut mu = opts.initial_damping;
    let mut nu = 2.0;
    let mut iterations = 0;
    let mut converged = r.norm() <= opts.abs_tol;

    let mut jac = jacobian(&mut residual, &p, m, opts.fd_step)?;
    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &r;
        if grad.amax() <= opts.gtol * r.norm().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
        let diag = DVector::from_iterator(
            jtj.nrows(),
            (0..jtj.nrows()).map(|i| jtj[(i, i)].max(1e-12 * jtj.diagonal().amax())),
        );
        let mut a = jtj.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += mu * diag[i];
        }
        let step = match a.clone().cholesky() {
            Some(ch) => ch.solve(&(-&grad)),
            None => match a.lu().solve(&(-&grad)) {
                Some(s) => s,
                None => {
                    mu *= nu;
                    nu *= 2.0;
                    continue;
                }
            },
        };
        let trial = &p + &step;
        let r_trial = match eval(&mut residual, &trial) {
            Ok(v) => v,
            Err(_) => {
                mu *= nu;
                nu *= 2.0;
                continue;
            }
        };
        let cost_trial = r_trial.norm_squared();
        // Predicted decrease of the quadratic model.
        let predicted = step.dot(&(mu * diag.component_mul(&step) - &grad));
        let gain = (cost - cost_trial) / predicted.max(f64::MIN_POSITIVE);
        if cost_trial < cost {
            let small_step = step.norm() <= opts.xtol * (p.norm() + opts.xtol);
            p = trial;
            r = r_trial;
            cost = cost_trial;
            mu *= (1.0 - (2.0 * gain - 1.0).powi(3)).max(1.0 / 3.0);
            nu = 2.0;
            if r.norm() <= opts.abs_tol || small_step {
                converged = true;
                break;
            }
            jac = jacobian(&mut residual, &p, m, opts.fd_step)?;
        } else if predicted <= 8.0 * f64::EPSILON * cost {
            // Cost differences are below roundoff, so comparisons can no longer
            // locate the minimum. Finish with one undamped Gauss-Newton step on a
            // Richardson-extrapolated Jacobian (O(h^4) truncation, less roundoff).
            let fine = jacobian(&mut residual, &p, m, 1e-4)?;
            let coarse = jacobian(&mut residual, &p, m, 2e-4)?;
            let sharp = (fine * 4.0 - coarse) / 3.0;
            if let Ok(gn) = sharp.clone().svd(true, true).solve(&(-&r), 1e-14 * sharp.amax()) {
                let trial = &p + &gn;
                if let Ok(r_gn) = eval(&mut residual, &trial) {
                    if r_gn.norm_squared() <= cost * (1.0 + 1e-10) {
                        p = trial;
                        r = r_gn;
                        cost = r.norm_squared();
                    }
                }
            }
            converged = true;
            break;
        } else {
            if step.norm() <= opts.xtol * (p.norm() + opts.xtol) {
                converged = true;
                break;
            }
            mu *= nu;
            nu *= 2.0;
            if !mu.is_finite() {
                break;
            }
        }
    }

    Ok(FitResult {
        solution: to_complex(&p),
        residual_norm: cost.sqrt(),
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_residual_recovers_constant() {
        let c = vec![C64::new(1.5, -2.0), C64::new(0.0, 3.0)];
        let fit = lm_fit(
            |x| Ok(x.iter().zip(&c).map(|(a, b)| a - b).collect()),
            &[C64::new(0.0, 0.0); 2],
            &LmOptions::default(),
        )
        .unwrap();
        assert!(fit.converged);
        assert!(fit.residual_norm < 1e-12);
        for (u, v) in fit.solution.iter().zip(&c) {
            assert!((u - v).norm() < 1e-10);
        }
    }

    #[test]
    fn square_root_of_one() {
        let fit = lm_fit(
            |x| Ok(vec![x[0] * x[0] - 1.0]),
            &[C64::new(0.5, 0.0)],
            &LmOptions::default(),
        )
        .unwrap();
        assert!(fit.converged);
        assert!((fit.solution[0] - C64::new(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn iteration_cap_is_not_an_error() {
        let opts = LmOptions {
            max_iterations: 1,
            ..LmOptions::default()
        };
        let fit = lm_fit(
            |x| Ok(vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]]),
            &[C64::new(-1.2, 0.3), C64::new(1.0, 0.0)],
            &opts,
        )
        .unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.iterations, 1);
    }

    #[test]
    fn evaluation_errors_propagate() {
        let out = lm_fit(
            |_| Err(Error::Evaluation("boom".into())),
            &[C64::new(0.0, 0.0)],
            &LmOptions::default(),
        );
        assert!(matches!(out, Err(Error::Evaluation(_))));
    }
}
