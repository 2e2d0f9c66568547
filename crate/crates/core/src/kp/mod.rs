//! KP-type theta relations: the operator relation on the second-order theta
//! vector, its bilinear (Hirota) form at a point, the KP equation for
//! `u = 2 d_x^2 log theta`, the gauge group, flex fitting and tangency data on the
//! theta divisor.

mod fit;
mod hirota;
mod pde;
mod tangency;

pub use fit::{flex_fit, flex_fit_with, gauge_fix, FlexFit, FlexFitOptions, FlexSystem};
pub use hirota::{hirota_residual, hirota_terms, HirotaTerms};
pub use pde::{
    cube_grid, kp_pde_residual, pde_residual_field, ConstantPotential, PdeMode, PdeReport, PotentialDerivatives,
    PotentialField, ThetaPotential,
};
pub use tangency::{divisor_point, tangency_point, tangent_flex, TangencyData};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kummer::theta2_vector;
use crate::theta::{DerivativeSpec, PeriodMatrix};
use crate::C64;

/// Directions `D1 = U`, `D2 = V`, `D3 = W` and the scalar `d` of the operator
/// relation `[D1^4 - D1 D3 + 3/4 D2^2 + d] theta2(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlexData {
    pub u: Vec<C64>,
    pub v: Vec<C64>,
    pub w: Vec<C64>,
    pub d: C64,
}

impl FlexData {
    pub fn new(u: Vec<C64>, v: Vec<C64>, w: Vec<C64>, d: C64) -> Result<Self> {
        if u.len() != v.len() || u.len() != w.len() {
            return Err(Error::invalid("U, V, W must have the same dimension"));
        }
        if u.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            return Err(Error::invalid("U must be nonzero"));
        }
        Ok(Self { u, v, w, d })
    }

    pub fn g(&self) -> usize {
        self.u.len()
    }

    /// Space and time directions in which `u = 2 d_x^2 log theta` solves KP.
    ///
    /// The operator relation, rewritten through the addition formula, is the
    /// bilinear equation for `x = U`, `y = V/2`, `t = W/4` with constant `d/16`.
    pub fn kp_frame(&self) -> KpFrame {
        KpFrame {
            x: self.u.clone(),
            y: self.v.iter().map(|z| z * 0.5).collect(),
            t: self.w.iter().map(|z| z * 0.25).collect(),
            constant: self.d / 16.0,
        }
    }
}

/// Directions substituted for `x`, `y`, `t` in the bilinear equation, and its
/// constant term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpFrame {
    pub x: Vec<C64>,
    pub y: Vec<C64>,
    pub t: Vec<C64>,
    pub constant: C64,
}

impl KpFrame {
    /// `z0 + x X + y Y + t T`.
    pub fn point(&self, z0: &[C64], x: f64, y: f64, t: f64) -> Vec<C64> {
        (0..z0.len())
            .map(|i| z0[i] + self.x[i] * x + self.y[i] * y + self.t[i] * t)
            .collect()
    }
}

/// Element `(lambda, alpha, sign)` of the gauge group:
/// `U -> lambda U`, `V -> sign (lambda^2 V + 2 alpha lambda U)`,
/// `W -> lambda^3 W + 3 lambda^2 alpha V + 3 lambda alpha^2 U`, `d -> lambda^4 d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugeTransform {
    pub lambda: C64,
    pub alpha: C64,
    pub sign: i8,
}

impl GaugeTransform {
    pub fn new(lambda: C64, alpha: C64, sign: i8) -> Result<Self> {
        if lambda == C64::new(0.0, 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidGauge);
        }
        if sign != 1 && sign != -1 {
            return Err(Error::invalid("gauge sign must be +1 or -1"));
        }
        Ok(Self {
            lambda,
            alpha,
            sign,
        })
    }

    pub fn identity() -> Self {
        Self {
            lambda: C64::new(1.0, 0.0),
            alpha: C64::new(0.0, 0.0),
            sign: 1,
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &GaugeTransform) -> GaugeTransform {
        GaugeTransform {
            lambda: self.lambda * next.lambda,
            alpha: next.lambda * self.alpha + f64::from(self.sign) * next.alpha,
            sign: self.sign * next.sign,
        }
    }
}

pub fn apply_gauge(f: &FlexData, t: &GaugeTransform) -> Result<FlexData> {
    if t.lambda == C64::new(0.0, 0.0) || !t.lambda.is_finite() {
        return Err(Error::InvalidGauge);
    }
    let (l, a, s) = (t.lambda, t.alpha, f64::from(t.sign));
    let g = f.g();
    let u = (0..g).map(|i| l * f.u[i]).collect();
    let v = (0..g)
        .map(|i| s * (l * l * f.v[i] + 2.0 * a * l * f.u[i]))
        .collect();
    let w = (0..g)
        .map(|i| l * l * l * f.w[i] + 3.0 * l * l * a * f.v[i] + 3.0 * l * a * a * f.u[i])
        .collect();
    Ok(FlexData {
        u,
        v,
        w,
        d: l * l * l * l * f.d,
    })
}

/// `[D1^4 - D1 D3 + 3/4 D2^2 + d] theta2(0)`.
pub fn op_residual(p: &PeriodMatrix, f: &FlexData) -> Result<Vec<C64>> {
    if f.g() != p.g() {
        return Err(Error::invalid("flex data and period matrix have different genus"));
    }
    let zero = vec![C64::new(0.0, 0.0); p.g()];
    let u = f.u.clone();
    let d4 = theta2_vector(&zero, p, &DerivativeSpec::new(vec![u.clone(); 4])?)?;
    let d13 = theta2_vector(&zero, p, &DerivativeSpec::new(vec![u, f.w.clone()])?)?;
    let d22 = theta2_vector(&zero, p, &DerivativeSpec::new(vec![f.v.clone(); 2])?)?;
    let d0 = theta2_vector(&zero, p, &DerivativeSpec::none())?;
    Ok((0..d0.values.len())
        .map(|e| d4.values[e] - d13.values[e] + 0.75 * d22.values[e] + f.d * d0.values[e])
        .collect())
}
