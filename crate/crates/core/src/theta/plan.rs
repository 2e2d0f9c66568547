//! Truncation of the lattice sums.
//!
//! After reduction the summand at `k` has modulus
//! `exp(-pi s (k+v)^T Y (k+v) + pi s v^T Y v)` with `v = Y^{-1} Im z_red` in the unit
//! cube `[-1/2, 1/2)^g`. We sum over the ellipsoid `|k|_Y <= R` and bound the rest by
//! summing over unit shells in the `Y`-norm, counting lattice points per shell by the
//! volume of the shell thickened by the covering radius of the unit cube.

use serde::{Deserialize, Serialize};

use super::PeriodMatrix;
use crate::error::{Error, Result};

/// Hard cap on the truncation radius (in the `Im Omega` norm).
pub const MAX_RADIUS: f64 = 60.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummationPlan {
    /// Ellipsoid radius `R` in the `Im Omega` norm.
    pub radius: f64,
    /// Euclidean radius of a ball around `center` containing the ellipsoid.
    pub lattice_radius: f64,
    /// Lattice point the ellipsoid is centred on (`-b` after reduction).
    pub center: Vec<i64>,
    pub abs_tol: f64,
    /// Number of lattice points of `Z^g` inside the ellipsoid.
    pub term_count: usize,
    pub deriv_order: usize,
    pub z_bound: f64,
}

fn unit_ball_volume(g: usize) -> f64 {
    // V_g = pi^{g/2} / Gamma(g/2 + 1), via the recursion V_g = 2 pi V_{g-2} / g.
    let mut v = if g % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = g % 2;
    while k < g {
        k += 2;
        v *= 2.0 * std::f64::consts::PI / k as f64;
    }
    v
}

/// Upper bound on the truncated tail for an ellipsoid of radius `radius`.
///
/// `scale` is 1 for `theta(z, Omega)` and 2 for `theta[eps; 0](2z, 2 Omega)`;
/// `dir_norm` bounds the Euclidean norm of every derivative direction.
pub(crate) fn tail_bound(
    p: &PeriodMatrix,
    scale: f64,
    radius: f64,
    deriv_order: usize,
    z_bound: f64,
    dir_norm: f64,
) -> f64 {
    use std::f64::consts::PI;
    let g = p.g() as f64;
    let offset = 0.5 * (p.lambda_max() * g).sqrt();
    let cover = offset;
    let volume = unit_ball_volume(p.g()) / p.im_det().sqrt();
    let inv_sqrt_min = 1.0 / p.lambda_min().sqrt();
    if radius <= offset {
        return f64::INFINITY;
    }
    let mut total = 0.0;
    for j in 0..400 {
        let r_in = radius + j as f64;
        let r_out = r_in + 1.0;
        let count = volume * (r_out + cover).powf(g);
        let dist = r_in - offset;
        let gauss = (-PI * scale * dist * dist + PI * scale * offset * offset).exp();
        let weight = (2.0 * PI * scale * (r_out * inv_sqrt_min + z_bound) * dir_norm)
            .max(1.0)
            .powi(deriv_order as i32);
        let shell = count * gauss * weight;
        total += shell;
        if shell <= 1e-3 * total && j > 2 {
            break;
        }
    }
    total
}

pub(crate) fn plan_radius(
    p: &PeriodMatrix,
    scale: f64,
    abs_tol: f64,
    deriv_order: usize,
    z_bound: f64,
    dir_norm: f64,
) -> Result<f64> {
    if !(abs_tol > 0.0) {
        return Err(Error::invalid("abs_tol must be positive"));
    }
    let offset = 0.5 * (p.lambda_max() * p.g() as f64).sqrt();
    let mut radius = offset + 0.25;
    loop {
        if tail_bound(p, scale, radius, deriv_order, z_bound, dir_norm) <= abs_tol {
            return Ok(radius);
        }
        radius += 0.125;
        if radius > MAX_RADIUS {
            return Err(Error::ToleranceUnachievable {
                abs_tol,
                radius,
                cap: MAX_RADIUS,
            });
        }
    }
}

/// Truncation radius for `theta(z, Omega)` with `deriv_order` unit-norm derivative
/// directions. `z_bound` bounds the norm of the lattice shift `b` produced by
/// reduction, which enters the derivative weights.
pub fn truncation_radius(
    p: &PeriodMatrix,
    abs_tol: f64,
    deriv_order: usize,
    z_bound: f64,
) -> Result<SummationPlan> {
    if deriv_order > super::MAX_DERIVATIVE_ORDER {
        return Err(Error::invalid(format!(
            "derivative order {deriv_order} exceeds {}",
            super::MAX_DERIVATIVE_ORDER
        )));
    }
    let radius = plan_radius(p, 1.0, abs_tol, deriv_order, z_bound.max(0.0), 1.0)?;
    let zero = vec![0u8; p.g()];
    let term_count = ellipsoid_points(p, radius, &zero).len();
    Ok(SummationPlan {
        radius,
        lattice_radius: radius / p.lambda_min().sqrt(),
        center: vec![0; p.g()],
        abs_tol,
        term_count,
        deriv_order,
        z_bound,
    })
}

/// All `k in Z^g + eps/2` with `k^T Y k <= radius^2`, in lexicographic order of the
/// integer part.
pub(crate) fn ellipsoid_points(p: &PeriodMatrix, radius: f64, eps: &[u8]) -> Vec<Vec<f64>> {
    let g = p.g();
    let r2 = radius * radius;
    let bounds: Vec<(i64, i64)> = (0..g)
        .map(|i| {
            let half = radius * p.im_inv(i, i).sqrt();
            let shift = 0.5 * eps[i] as f64;
            ((-half - shift).ceil() as i64, (half - shift).floor() as i64)
        })
        .collect();
    let mut out = Vec::new();
    if bounds.iter().any(|(lo, hi)| lo > hi) {
        return out;
    }
    let mut n: Vec<i64> = bounds.iter().map(|b| b.0).collect();
    loop {
        let k: Vec<f64> = n
            .iter()
            .zip(eps)
            .map(|(&ni, &e)| ni as f64 + 0.5 * e as f64)
            .collect();
        if p.im_quad(&k) <= r2 {
            out.push(k);
        }
        // Odometer increment, last coordinate fastest.
        let mut i = g;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if n[i] < bounds[i].1 {
                n[i] += 1;
                for (nj, b) in n.iter_mut().zip(&bounds).skip(i + 1) {
                    *nj = b.0;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;

    #[test]
    fn unit_ball_volumes() {
        use std::f64::consts::PI;
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-15);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn ellipsoid_is_symmetric() {
        let p = PeriodMatrix::from_rows(&[
            vec![C64::new(0.1, 1.2), C64::new(0.3, 0.4)],
            vec![C64::new(0.3, 0.4), C64::new(-0.2, 0.9)],
        ])
        .unwrap();
        for eps in [[0u8, 0], [1, 0], [1, 1]] {
            let pts = ellipsoid_points(&p, 3.0, &eps);
            for k in &pts {
                let neg: Vec<f64> = k.iter().map(|x| -x).collect();
                assert!(pts.contains(&neg));
            }
        }
    }
}
