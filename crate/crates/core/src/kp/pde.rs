//! Residual of the KP equation `3/4 u_yy = (u_t - 1/4 (6 u u_x + u_xxx))_x` for
//! `u = 2 d_x^2 log theta(z0 + x X + y Y + t T)`.

use serde::{Deserialize, Serialize};

use super::{FlexData, KpFrame};
use crate::error::{Error, Result};
use crate::theta::{theta_jet, PeriodMatrix, DEFAULT_ABS_TOL};
use crate::C64;

/// Values of `u` and the derivatives entering the equation at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialDerivatives {
    pub u: C64,
    pub u_x: C64,
    pub u_xx: C64,
    pub u_xxxx: C64,
    pub u_yy: C64,
    pub u_xt: C64,
}

impl PotentialDerivatives {
    /// `3/4 u_yy`, `-u_xt`, `3/2 u_x^2`, `3/2 u u_xx`, `1/4 u_xxxx`.
    pub fn terms(&self) -> [C64; 5] {
        [
            0.75 * self.u_yy,
            -self.u_xt,
            1.5 * self.u_x * self.u_x,
            1.5 * self.u * self.u_xx,
            0.25 * self.u_xxxx,
        ]
    }

    pub fn residual(&self) -> C64 {
        self.terms().iter().sum()
    }
}

/// A potential `u(x, y, t)` that can be sampled pointwise and differentiated exactly.
pub trait PotentialField {
    fn value(&self, x: f64, y: f64, t: f64) -> Result<C64>;
    fn derivatives(&self, x: f64, y: f64, t: f64) -> Result<PotentialDerivatives>;
}

/// `u = 2 d_x^2 log theta` along a frame.
#[derive(Debug, Clone)]
pub struct ThetaPotential<'a> {
    pub period: &'a PeriodMatrix,
    pub frame: KpFrame,
    pub z0: Vec<C64>,
    /// `theta` counts as zero below this multiple of its summand mass.
    pub pole_tol: f64,
}

impl<'a> ThetaPotential<'a> {
    pub fn new(period: &'a PeriodMatrix, frame: KpFrame, z0: Vec<C64>) -> Self {
        Self {
            period,
            frame,
            z0,
            pole_tol: 1e-10,
        }
    }

    fn jet(&self, x: f64, y: f64, t: f64, dirs: &[Vec<C64>], order: usize) -> Result<crate::theta::TaylorJet> {
        let z = self.frame.point(&self.z0, x, y, t);
        let tj = theta_jet(&z, self.period, dirs, order, DEFAULT_ABS_TOL)?;
        if tj.jet.coeffs()[0].norm() <= self.pole_tol * tj.mass {
            return Err(Error::Pole { x, y, t });
        }
        Ok(tj.jet)
    }
}

impl PotentialField for ThetaPotential<'_> {
    fn value(&self, x: f64, y: f64, t: f64) -> Result<C64> {
        let jet = self.jet(x, y, t, &[self.frame.x.clone()], 2)?;
        let (th, th_x, th_xx) = (jet.derivative(&[0]), jet.derivative(&[1]), jet.derivative(&[2]));
        Ok(2.0 * (th * th_xx - th_x * th_x) / (th * th))
    }

    fn derivatives(&self, x: f64, y: f64, t: f64) -> Result<PotentialDerivatives> {
        let dirs = [self.frame.x.clone(), self.frame.y.clone(), self.frame.t.clone()];
        let log = self.jet(x, y, t, &dirs, 6)?.ln();
        let d = |e: [u8; 3]| 2.0 * log.derivative(&e);
        Ok(PotentialDerivatives {
            u: d([2, 0, 0]),
            u_x: d([3, 0, 0]),
            u_xx: d([4, 0, 0]),
            u_xxxx: d([6, 0, 0]),
            u_yy: d([2, 2, 0]),
            u_xt: d([3, 0, 1]),
        })
    }
}

/// `u` constant in space and time.
#[derive(Debug, Clone, Copy)]
pub struct ConstantPotential(pub C64);

impl PotentialField for ConstantPotential {
    fn value(&self, _: f64, _: f64, _: f64) -> Result<C64> {
        Ok(self.0)
    }

    fn derivatives(&self, _: f64, _: f64, _: f64) -> Result<PotentialDerivatives> {
        let zero = C64::new(0.0, 0.0);
        Ok(PotentialDerivatives {
            u: self.0,
            u_x: zero,
            u_xx: zero,
            u_xxxx: zero,
            u_yy: zero,
            u_xt: zero,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum PdeMode {
    /// Derivatives of `u` from exact theta derivatives and the logarithm of the jet.
    Exact,
    /// Central differences of `u` with step `h`.
    FiniteDifference { h: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeReport {
    pub mode: PdeMode,
    /// `|residual|` at each grid point, in grid order.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    /// Largest single term of the equation over the grid.
    pub max_term: f64,
}

fn fd_derivatives<F: PotentialField + ?Sized>(
    field: &F,
    x: f64,
    y: f64,
    t: f64,
    h: f64,
) -> Result<PotentialDerivatives> {
    let u = |dx: f64, dy: f64, dt: f64| field.value(x + dx * h, y + dy * h, t + dt * h);
    let u0 = u(0.0, 0.0, 0.0)?;
    let (xp, xm) = (u(1.0, 0.0, 0.0)?, u(-1.0, 0.0, 0.0)?);
    let (xpp, xmm) = (u(2.0, 0.0, 0.0)?, u(-2.0, 0.0, 0.0)?);
    let (yp, ym) = (u(0.0, 1.0, 0.0)?, u(0.0, -1.0, 0.0)?);
    let mixed = u(1.0, 0.0, 1.0)? - u(1.0, 0.0, -1.0)? - u(-1.0, 0.0, 1.0)? + u(-1.0, 0.0, -1.0)?;
    let h2 = h * h;
    Ok(PotentialDerivatives {
        u: u0,
        u_x: (xp - xm) / (2.0 * h),
        u_xx: ((xp + xm) - 2.0 * u0) / h2,
        u_xxxx: ((xpp + xmm) - 4.0 * (xp + xm) + 6.0 * u0) / (h2 * h2),
        u_yy: ((yp + ym) - 2.0 * u0) / h2,
        u_xt: mixed / (4.0 * h2),
    })
}

/// KP residual of an arbitrary potential over `grid`.
pub fn pde_residual_field<F: PotentialField + ?Sized>(
    field: &F,
    grid: &[[f64; 3]],
    mode: PdeMode,
) -> Result<PdeReport> {
    if let PdeMode::FiniteDifference { h } = mode {
        if !(h > 0.0) {
            return Err(Error::invalid("finite-difference step must be positive"));
        }
    }
    let mut residuals = Vec::with_capacity(grid.len());
    let mut max_term: f64 = 0.0;
    for &[x, y, t] in grid {
        let d = match mode {
            PdeMode::Exact => field.derivatives(x, y, t)?,
            PdeMode::FiniteDifference { h } => fd_derivatives(field, x, y, t, h)?,
        };
        max_term = d.terms().iter().map(|z| z.norm()).fold(max_term, f64::max);
        residuals.push(d.residual().norm());
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(PdeReport {
        mode,
        residuals,
        max_residual,
        max_term,
    })
}

/// KP residual of `u = 2 d_x^2 log theta` along the KP frame of `f` through `z0`.
pub fn kp_pde_residual(
    p: &PeriodMatrix,
    f: &FlexData,
    z0: &[C64],
    grid: &[[f64; 3]],
    mode: PdeMode,
) -> Result<PdeReport> {
    if z0.len() != p.g() || f.g() != p.g() {
        return Err(Error::invalid("point and flex data must have dimension g"));
    }
    let field = ThetaPotential::new(p, f.kp_frame(), z0.to_vec());
    pde_residual_field(&field, grid, mode)
}

/// `n x n x n` grid of side `span` centred at the origin.
pub fn cube_grid(n: usize, span: f64) -> Vec<[f64; 3]> {
    let coord = |i: usize| {
        if n == 1 {
            0.0
        } else {
            -0.5 * span + span * i as f64 / (n - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out.push([coord(i), coord(j), coord(k)]);
            }
        }
    }
    out
}
