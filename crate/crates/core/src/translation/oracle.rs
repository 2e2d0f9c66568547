//! Implicit hypersurfaces `f(z) = 0` in `C^g` with analytic derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::theta::{theta_local, PeriodMatrix, DEFAULT_ABS_TOL};
use crate::C64;

pub trait HypersurfaceOracle {
    fn dim(&self) -> usize;
    fn value(&self, z: &[C64]) -> Result<C64>;
    fn gradient(&self, z: &[C64]) -> Result<Vec<C64>>;
    /// Row-major `g x g`.
    fn hessian(&self, z: &[C64]) -> Result<Vec<C64>>;

    /// Magnitude against which `|f(z)|` is judged.
    fn scale(&self, _z: &[C64]) -> Result<f64> {
        Ok(1.0)
    }
}

fn check_dim(z: &[C64], g: usize) -> Result<()> {
    if z.len() != g {
        return Err(Error::invalid(format!(
            "point has dimension {}, expected {g}",
            z.len()
        )));
    }
    Ok(())
}

/// Polynomial in one variable, coefficients from the constant term up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly(pub Vec<C64>);

impl Poly {
    pub fn eval(&self, x: C64) -> C64 {
        self.0.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    /// `x^k`.
    pub fn monomial(k: usize) -> Poly {
        let mut c = vec![C64::new(0.0, 0.0); k + 1];
        c[k] = C64::new(1.0, 0.0);
        Poly(c)
    }
}

/// `sum c_i z_i = b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    pub normal: Vec<C64>,
    pub offset: C64,
}

impl HypersurfaceOracle for Hyperplane {
    fn dim(&self) -> usize {
        self.normal.len()
    }

    fn value(&self, z: &[C64]) -> Result<C64> {
        check_dim(z, self.dim())?;
        Ok(self.normal.iter().zip(z).map(|(a, b)| a * b).sum::<C64>() - self.offset)
    }

    fn gradient(&self, z: &[C64]) -> Result<Vec<C64>> {
        check_dim(z, self.dim())?;
        Ok(self.normal.clone())
    }

    fn hessian(&self, z: &[C64]) -> Result<Vec<C64>> {
        check_dim(z, self.dim())?;
        Ok(vec![C64::new(0.0, 0.0); self.dim() * self.dim()])
    }
}

/// `sum z_i^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadric {
    pub g: usize,
}

impl HypersurfaceOracle for Quadric {
    fn dim(&self) -> usize {
        self.g
    }

    fn value(&self, z: &[C64]) -> Result<C64> {
        check_dim(z, self.g)?;
        Ok(z.iter().map(|w| w * w).sum::<C64>() - 1.0)
    }

    fn gradient(&self, z: &[C64]) -> Result<Vec<C64>> {
        check_dim(z, self.g)?;
        Ok(z.iter().map(|w| 2.0 * w).collect())
    }

    fn hessian(&self, z: &[C64]) -> Result<Vec<C64>> {
        check_dim(z, self.g)?;
        let mut h = vec![C64::new(0.0, 0.0); self.g * self.g];
        for i in 0..self.g {
            h[i * self.g + i] = C64::new(2.0, 0.0);
        }
        Ok(h)
    }
}

/// `z_1^2 + ... + z_{g-1}^2 = 1` in `C^g`: a quadric times a line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cylinder {
    pub g: usize,
}

impl HypersurfaceOracle for Cylinder {
    fn dim(&self) -> usize {
        self.g
    }

    fn value(&self, z: &[C64]) -> Result<C64> {
        check_dim(z, self.g)?;
        Ok(z[..self.g - 1].iter().map(|w| w * w).sum::<C64>() - 1.0)
    }

    fn gradient(&self, z: &[C64]) -> Result<Vec<C64>> {
        check_dim(z, self.g)?;
        let mut grad: Vec<C64> = z.iter().map(|w| 2.0 * w).collect();
        grad[self.g - 1] = C64::new(0.0, 0.0);
        Ok(grad)
    }

    fn hessian(&self, z: &[C64]) -> Result<Vec<C64>> {
        check_dim(z, self.g)?;
        let mut h = vec![C64::new(0.0, 0.0); self.g * self.g];
        for i in 0..self.g - 1 {
            h[i * self.g + i] = C64::new(2.0, 0.0);
        }
        Ok(h)
    }
}

/// `z_3 = c(z_1) + q(z_2 - p(z_1))` in `C^3`: the translation surface swept by the
/// curve `t -> (t, p(t), c(t))` along `s -> (0, s, q(s))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationSurface {
    pub c: Poly,
    pub p: Poly,
    pub q: Poly,
}

impl TranslationSurface {
    /// `z_3 = z_1^3 + (z_2 - z_1^2)^2`.
    pub fn cubic() -> Self {
        Self {
            c: Poly::monomial(3),
            p: Poly::monomial(2),
            q: Poly::monomial(2),
        }
    }

    /// The chart `(t1, t2) -> (t1, p(t1) + t2, c(t1) + q(t2))`.
    pub fn chart_point(&self, t1: C64, t2: C64) -> Vec<C64> {
        vec![t1, self.p.eval(t1) + t2, self.c.eval(t1) + self.q.eval(t2)]
    }

    /// The generating curve `t -> (t, p(t), c(t))`.
    pub fn curve(&self) -> super::PolynomialCurve {
        super::PolynomialCurve::new(vec![Poly::monomial(1), self.p.clone(), self.c.clone()])
    }
}

impl HypersurfaceOracle for TranslationSurface {
    fn dim(&self) -> usize {
        3
    }

    fn value(&self, z: &[C64]) -> Result<C64> {
        check_dim(z, 3)?;
        Ok(z[2] - self.c.eval(z[0]) - self.q.eval(z[1] - self.p.eval(z[0])))
    }

    fn gradient(&self, z: &[C64]) -> Result<Vec<C64>> {
        check_dim(z, 3)?;
        let s = z[1] - self.p.eval(z[0]);
        let dq = self.q.derivative().eval(s);
        let dp = self.p.derivative().eval(z[0]);
        let dc = self.c.derivative().eval(z[0]);
        Ok(vec![-dc + dq * dp, -dq, C64::new(1.0, 0.0)])
    }

    fn hessian(&self, z: &[C64]) -> Result<Vec<C64>> {
        check_dim(z, 3)?;
        let s = z[1] - self.p.eval(z[0]);
        let dq = self.q.derivative().eval(s);
        let ddq = self.q.derivative().derivative().eval(s);
        let dp = self.p.derivative().eval(z[0]);
        let ddp = self.p.derivative().derivative().eval(z[0]);
        let ddc = self.c.derivative().derivative().eval(z[0]);
        let zero = C64::new(0.0, 0.0);
        let h00 = -ddc - ddq * dp * dp + dq * ddp;
        let h01 = ddq * dp;
        let h11 = -ddq;
        Ok(vec![h00, h01, zero, h01, h11, zero, zero, zero, zero])
    }
}

/// The theta divisor `theta(z, Omega) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaDivisor {
    pub period: PeriodMatrix,
}

impl HypersurfaceOracle for ThetaDivisor {
    fn dim(&self) -> usize {
        self.period.g()
    }

    fn value(&self, z: &[C64]) -> Result<C64> {
        Ok(theta_local(z, &self.period, DEFAULT_ABS_TOL)?.value)
    }

    fn gradient(&self, z: &[C64]) -> Result<Vec<C64>> {
        Ok(theta_local(z, &self.period, DEFAULT_ABS_TOL)?.gradient)
    }

    fn hessian(&self, z: &[C64]) -> Result<Vec<C64>> {
        Ok(theta_local(z, &self.period, DEFAULT_ABS_TOL)?.hessian)
    }

    fn scale(&self, z: &[C64]) -> Result<f64> {
        Ok(theta_local(z, &self.period, DEFAULT_ABS_TOL)?.scale)
    }
}

/// Largest relative discrepancies `(gradient, hessian)` between the analytic
/// derivatives and central differences with step `h` along the real axes.
pub fn fd_consistency<H: HypersurfaceOracle + ?Sized>(oracle: &H, z: &[C64], h: f64) -> Result<(f64, f64)> {
    let g = oracle.dim();
    check_dim(z, g)?;
    let grad = oracle.gradient(z)?;
    let hess = oracle.hessian(z)?;
    let shifted = |i: usize, step: f64| {
        let mut w = z.to_vec();
        w[i] += step;
        w
    };
    let mut grad_err: f64 = 0.0;
    let mut hess_err: f64 = 0.0;
    let grad_scale = grad.iter().map(|w| w.norm()).fold(f64::MIN_POSITIVE, f64::max);
    let hess_scale = hess.iter().map(|w| w.norm()).fold(f64::MIN_POSITIVE, f64::max);
    for i in 0..g {
        let fd = (oracle.value(&shifted(i, h))? - oracle.value(&shifted(i, -h))?) / (2.0 * h);
        grad_err = grad_err.max((fd - grad[i]).norm() / grad_scale);
        let gp = oracle.gradient(&shifted(i, h))?;
        let gm = oracle.gradient(&shifted(i, -h))?;
        for j in 0..g {
            let fd = (gp[j] - gm[j]) / (2.0 * h);
            hess_err = hess_err.max((fd - hess[j * g + i]).norm() / hess_scale);
        }
    }
    Ok((grad_err, hess_err))
}
