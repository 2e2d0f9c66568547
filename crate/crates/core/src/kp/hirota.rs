//! The bilinear relation
//! `theta theta_xxxx - 4 theta_xxx theta_x + 3 theta_xx^2 + 4 theta_x theta_t
//!  - 4 theta_xt theta + 3 theta_yy theta - 3 theta_y^2 + 8 c theta^2`
//! evaluated at a point, together with its restrictions to the theta divisor.

use serde::{Deserialize, Serialize};

use super::{FlexData, KpFrame};
use crate::error::{Error, Result};
use crate::theta::{theta_jet, PeriodMatrix, DEFAULT_ABS_TOL};
use crate::C64;

/// Derivatives of `theta(z0 + x X + y Y + t T)` at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HirotaTerms {
    pub theta: C64,
    pub x: C64,
    pub xx: C64,
    pub xxx: C64,
    pub xxxx: C64,
    pub y: C64,
    pub yy: C64,
    pub t: C64,
    pub xt: C64,
    pub constant: C64,
    /// Summand mass of `theta` at `z0`.
    pub scale: f64,
}

impl HirotaTerms {
    /// The eight summands of the relation in order.
    pub fn terms(&self) -> [C64; 8] {
        let th = self.theta;
        [
            th * self.xxxx,
            -4.0 * self.xxx * self.x,
            3.0 * self.xx * self.xx,
            4.0 * self.x * self.t,
            -4.0 * self.xt * th,
            3.0 * self.yy * th,
            -3.0 * self.y * self.y,
            8.0 * self.constant * th * th,
        ]
    }

    pub fn residual(&self) -> C64 {
        self.terms().iter().sum()
    }

    pub fn max_term(&self) -> f64 {
        self.terms().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// The relation with every term containing `theta` dropped, i.e. its value on
    /// the theta divisor.
    pub fn on_divisor(&self) -> C64 {
        -4.0 * self.xxx * self.x + 3.0 * self.xx * self.xx + 4.0 * self.x * self.t
            - 3.0 * self.y * self.y
    }

    /// `theta_xx^2 - theta_y^2`: the divisor form once also `theta_x = 0`, up to the
    /// factor 3.
    pub fn at_tangency(&self) -> C64 {
        self.xx * self.xx - self.y * self.y
    }

    /// `theta_xx + theta_y` and `theta_xx - theta_y`.
    pub fn factors(&self) -> (C64, C64) {
        (self.xx + self.y, self.xx - self.y)
    }
}

/// Derivatives along an arbitrary frame, from one lattice pass.
pub fn hirota_terms(p: &PeriodMatrix, frame: &KpFrame, z0: &[C64]) -> Result<HirotaTerms> {
    let g = p.g();
    if [&frame.x, &frame.y, &frame.t].iter().any(|d| d.len() != g) || z0.len() != g {
        return Err(Error::invalid("frame and point must have dimension g"));
    }
    let tj = theta_jet(
        z0,
        p,
        &[frame.x.clone(), frame.y.clone(), frame.t.clone()],
        4,
        DEFAULT_ABS_TOL,
    )?;
    let f = tj.log_factor.exp();
    let d = |e: [u8; 3]| tj.jet.derivative(&e) * f;
    Ok(HirotaTerms {
        theta: d([0, 0, 0]),
        x: d([1, 0, 0]),
        xx: d([2, 0, 0]),
        xxx: d([3, 0, 0]),
        xxxx: d([4, 0, 0]),
        y: d([0, 1, 0]),
        yy: d([0, 2, 0]),
        t: d([0, 0, 1]),
        xt: d([1, 0, 1]),
        constant: frame.constant,
        scale: tj.mass * f.norm(),
    })
}

/// Bilinear residual at `z0` for the KP frame of `f` (see [`FlexData::kp_frame`]).
pub fn hirota_residual(p: &PeriodMatrix, f: &FlexData, z0: &[C64]) -> Result<C64> {
    Ok(hirota_terms(p, &f.kp_frame(), z0)?.residual())
}
