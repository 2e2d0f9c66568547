//! Translation frames: verification on an implicit surface and extraction from a chart curve.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use super::{HypersurfaceOracle, Poly};
use crate::error::{Error, Result};
use crate::kp::TangencyData;
use crate::C64;

/// Frame `(tau, sigma, lambda)` at a surface point, with `tau[slot] = 1` and the
/// parameter `tau2 = tau[param]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationFrame {
    pub tau: Vec<C64>,
    pub sigma: Vec<C64>,
    pub lambda_t: C64,
    pub tau2: C64,
    pub slot: usize,
    pub param: usize,
}

impl From<&TangencyData> for TranslationFrame {
    fn from(t: &TangencyData) -> Self {
        Self {
            tau: t.tau.clone(),
            sigma: t.sigma.clone(),
            lambda_t: t.lambda_t,
            tau2: t.tau2(),
            slot: t.slot,
            param: t.other(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameCheck {
    /// `|sum f_i tau_i|`.
    pub res_i: f64,
    /// `|sum f_ij tau_i tau_j + sum f_i sigma_i|`.
    pub res_ii: f64,
    pub passed: bool,
}

pub fn verify_frame<H: HypersurfaceOracle + ?Sized>(
    oracle: &H,
    z: &[C64],
    frame: &TranslationFrame,
    tol: f64,
) -> Result<FrameCheck> {
    let g = oracle.dim();
    if frame.tau.len() != g || frame.sigma.len() != g {
        return Err(Error::invalid("frame has wrong dimension"));
    }
    let value = oracle.value(z)?.norm();
    let bound = tol * oracle.scale(z)?;
    if value > bound {
        return Err(Error::OffSurface { value, bound });
    }
    let grad = oracle.gradient(z)?;
    let hess = oracle.hessian(z)?;
    let first: C64 = grad.iter().zip(&frame.tau).map(|(a, b)| a * b).sum();
    let mut second: C64 = grad.iter().zip(&frame.sigma).map(|(a, b)| a * b).sum();
    for i in 0..g {
        for j in 0..g {
            second += hess[i * g + j] * frame.tau[i] * frame.tau[j];
        }
    }
    let (res_i, res_ii) = (first.norm(), second.norm());
    Ok(FrameCheck {
        res_i,
        res_ii,
        passed: res_i <= tol && res_ii <= tol,
    })
}

/// A holomorphic curve `t -> alpha(t)` in `C^g`.
pub trait ChartCurve {
    fn dim(&self) -> usize;
    fn point(&self, t: C64) -> Vec<C64>;

    /// `(alpha'(t), alpha''(t))`; central differences unless overridden.
    fn derivatives(&self, t: C64) -> (Vec<C64>, Vec<C64>) {
        let h = 1e-4;
        let p = self.point(t + h);
        let m = self.point(t - h);
        let c = self.point(t);
        let d1 = p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        let d2 = (0..c.len())
            .map(|i| (p[i] - 2.0 * c[i] + m[i]) / (h * h))
            .collect();
        (d1, d2)
    }
}

/// Curve with polynomial coordinates and exact derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialCurve {
    coords: Vec<Poly>,
    first: Vec<Poly>,
    second: Vec<Poly>,
}

impl PolynomialCurve {
    pub fn new(coords: Vec<Poly>) -> Self {
        let first: Vec<Poly> = coords.iter().map(Poly::derivative).collect();
        let second = first.iter().map(Poly::derivative).collect();
        Self {
            coords,
            first,
            second,
        }
    }
}

impl ChartCurve for PolynomialCurve {
    fn dim(&self) -> usize {
        self.coords.len()
    }

    fn point(&self, t: C64) -> Vec<C64> {
        self.coords.iter().map(|p| p.eval(t)).collect()
    }

    fn derivatives(&self, t: C64) -> (Vec<C64>, Vec<C64>) {
        (
            self.first.iter().map(|p| p.eval(t)).collect(),
            self.second.iter().map(|p| p.eval(t)).collect(),
        )
    }
}

/// Any closure `t -> alpha(t)`, differentiated numerically.
pub struct FnCurve<F> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(C64) -> Vec<C64>> ChartCurve for FnCurve<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn point(&self, t: C64) -> Vec<C64> {
        (self.f)(t)
    }
}

/// Coordinate 0 unless its modulus is below `1e-3` of the largest, else the largest.
pub(crate) fn pick_slot(v: &[C64]) -> usize {
    let (arg, max) = v
        .iter()
        .enumerate()
        .fold((0, 0.0), |(bi, bm), (i, z)| if z.norm() > bm { (i, z.norm()) } else { (bi, bm) });
    if v[0].norm() >= 1e-3 * max {
        0
    } else {
        arg
    }
}

fn frame_with_slot(d1: &[C64], d2: &[C64], slot: usize, param: Option<usize>) -> TranslationFrame {
    let g = d1.len();
    let a = d1[slot];
    let tau: Vec<C64> = d1.iter().map(|x| x / a).collect();
    // d tau_i / dt
    let dtau: Vec<C64> = (0..g).map(|i| (d2[i] * a - d1[i] * d2[slot]) / (a * a)).collect();
    let sigma: Vec<C64> = dtau.iter().map(|x| x / a).collect();
    let max = dtau.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let param = param.unwrap_or_else(|| {
        (0..g)
            .filter(|&i| i != slot)
            .find(|&i| dtau[i].norm() > 1e-12 * max && max > 0.0)
            .unwrap_or(if slot == 0 { 1 } else { 0 })
    });
    let lambda_t = if dtau[param].norm() > 0.0 {
        // Least squares for sigma = lambda d tau / d tau2 over the active components.
        let rate: Vec<C64> = dtau.iter().map(|x| x / dtau[param]).collect();
        let (mut num, mut den) = (C64::new(0.0, 0.0), 0.0);
        for i in (0..g).filter(|&i| i != slot && rate[i].norm() > 1e-12) {
            num += rate[i].conj() * sigma[i];
            den += rate[i].norm_sqr();
        }
        if den > 0.0 {
            num / den
        } else {
            C64::new(0.0, 0.0)
        }
    } else {
        C64::new(0.0, 0.0)
    };
    TranslationFrame {
        tau2: tau[param],
        tau,
        sigma,
        lambda_t,
        slot,
        param,
    }
}

/// Frame of the translation structure generated by `curve` at parameter `t1`:
/// `tau = alpha' / alpha'_s`, `sigma_i = (alpha'_s alpha''_i - alpha'_i alpha''_s) / alpha'_s^3`.
pub fn frame_from_chart<C: ChartCurve + ?Sized>(curve: &C, t1: C64) -> Result<TranslationFrame> {
    let (d1, d2) = curve.derivatives(t1);
    if d1.len() < 2 {
        return Err(Error::invalid("chart curve needs dimension at least 2"));
    }
    if d1.iter().all(|z| z.norm() < 1e-12) {
        return Err(Error::DegenerateChart);
    }
    Ok(frame_with_slot(&d1, &d2, pick_slot(&d1), None))
}

/// `tau2 -> (tau, lambda)` along a reconstruction segment.
pub trait FrameField {
    fn frame_at(&self, tau2: C64) -> Result<(Vec<C64>, C64)>;
}

/// The same `(tau, lambda)` everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantFrameField {
    pub tau: Vec<C64>,
    pub lambda: C64,
}

impl FrameField for ConstantFrameField {
    fn frame_at(&self, _: C64) -> Result<(Vec<C64>, C64)> {
        Ok((self.tau.clone(), self.lambda))
    }
}

/// Frames of a chart curve as a function of `tau2`, found by Newton continuation in
/// the curve parameter from the previous query.
pub struct ChartFrameField<'a, C: ?Sized> {
    curve: &'a C,
    slot: usize,
    param: usize,
    t: Cell<C64>,
}

impl<'a, C: ChartCurve + ?Sized> ChartFrameField<'a, C> {
    pub fn new(curve: &'a C, t_start: C64) -> Result<Self> {
        let fr = frame_from_chart(curve, t_start)?;
        Ok(Self {
            curve,
            slot: fr.slot,
            param: fr.param,
            t: Cell::new(t_start),
        })
    }

    /// Curve parameter at which `tau[param] = tau2`.
    pub fn solve_parameter(&self, tau2: C64) -> Result<C64> {
        let mut t = self.t.get();
        for _ in 0..50 {
            let (d1, d2) = self.curve.derivatives(t);
            let fr = frame_with_slot(&d1, &d2, self.slot, Some(self.param));
            let gap = fr.tau[self.param] - tau2;
            if gap.norm() <= 1e-14 * tau2.norm().max(1.0) {
                self.t.set(t);
                return Ok(t);
            }
            // d tau_param / dt = sigma_param * alpha'_slot
            let slope = fr.sigma[self.param] * d1[self.slot];
            if slope.norm() == 0.0 {
                return Err(Error::DegenerateChart);
            }
            t -= gap / slope;
        }
        Err(Error::DegenerateChart)
    }

    pub fn frame(&self, tau2: C64) -> Result<TranslationFrame> {
        let t = self.solve_parameter(tau2)?;
        let (d1, d2) = self.curve.derivatives(t);
        Ok(frame_with_slot(&d1, &d2, self.slot, Some(self.param)))
    }
}

impl<C: ChartCurve + ?Sized> FrameField for ChartFrameField<'_, C> {
    fn frame_at(&self, tau2: C64) -> Result<(Vec<C64>, C64)> {
        let fr = self.frame(tau2)?;
        Ok((fr.tau, fr.lambda_t))
    }
}
