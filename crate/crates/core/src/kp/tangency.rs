//! Points of the theta divisor and the tangency data attached to them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{hdot, lstsq, norm, ComplexMatrix};
use crate::theta::{theta_local, PeriodMatrix, DEFAULT_ABS_TOL};
use crate::C64;

const MAX_NEWTON: usize = 50;
/// `|theta| <= ROOT_TOL * scale` counts as a zero.
pub const ROOT_TOL: f64 = 1e-11;

/// Newton iteration for `theta(base + s dir) = 0` in the complex scalar `s`, from `s = 0`.
pub fn divisor_point(p: &PeriodMatrix, base: &[C64], dir: &[C64]) -> Result<Vec<C64>> {
    if dir.len() != p.g() || base.len() != p.g() {
        return Err(Error::invalid("base and direction must have dimension g"));
    }
    if norm(dir) == 0.0 {
        return Err(Error::invalid("direction must be nonzero"));
    }
    let mut s = C64::new(0.0, 0.0);
    let mut residual = f64::INFINITY;
    for _ in 0..=MAX_NEWTON {
        let z: Vec<C64> = base.iter().zip(dir).map(|(b, d)| b + s * d).collect();
        let local = theta_local(&z, p, DEFAULT_ABS_TOL)?;
        residual = local.value.norm() / local.scale;
        if residual <= ROOT_TOL {
            return Ok(z);
        }
        let slope: C64 = local.gradient.iter().zip(dir).map(|(a, b)| a * b).sum();
        if slope == C64::new(0.0, 0.0) || !slope.is_finite() {
            break;
        }
        s -= local.value / slope;
        if !s.is_finite() {
            break;
        }
    }
    Err(Error::RootNotFound {
        iterations: MAX_NEWTON,
        residual,
    })
}

/// Newton iteration for `theta(z) = 0`, `sum_i theta_i(z) u_i = 0` from `start`
/// (minimal-norm steps when `g > 2`).
pub fn tangency_point(p: &PeriodMatrix, start: &[C64], u: &[C64]) -> Result<Vec<C64>> {
    let g = p.g();
    if start.len() != g || u.len() != g {
        return Err(Error::invalid("start and direction must have dimension g"));
    }
    let mut z = start.to_vec();
    let mut residual = f64::INFINITY;
    for _ in 0..=MAX_NEWTON {
        let local = theta_local(&z, p, DEFAULT_ABS_TOL)?;
        let along: C64 = local.gradient.iter().zip(u).map(|(a, b)| a * b).sum();
        residual = local.value.norm().max(along.norm() / norm(u)) / local.scale;
        if residual <= ROOT_TOL {
            return Ok(z);
        }
        let mut jac = ComplexMatrix::zeros(2, g);
        for j in 0..g {
            jac[(0, j)] = local.gradient[j];
            jac[(1, j)] = (0..g).map(|i| local.hess(j, i) * u[i]).sum();
        }
        let step = lstsq(&jac, &[-local.value, -along], 1e-14)?;
        for (zi, si) in z.iter_mut().zip(&step) {
            *zi += si;
        }
        if z.iter().any(|w| !w.is_finite()) {
            break;
        }
    }
    Err(Error::RootNotFound {
        iterations: MAX_NEWTON,
        residual,
    })
}

/// Tangency data at a point of a genus-2 theta divisor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangencyData {
    pub z0: Vec<C64>,
    /// Tangent direction with `tau[slot] = 1`.
    pub tau: Vec<C64>,
    pub sigma: Vec<C64>,
    pub lambda_t: C64,
    pub branch: i8,
    /// Coordinate normalized to 1 in `tau` (and zero in `sigma`).
    pub slot: usize,
    /// Minimal-norm `V` with `sum theta_i V_i = -branch sum theta_ij tau_i tau_j`.
    pub v: Vec<C64>,
    /// `sum theta_ij tau_i tau_j`.
    pub curvature: C64,
    pub gradient: Vec<C64>,
    pub theta: C64,
    /// Summand mass of `theta` at `z0`.
    pub scale: f64,
    /// `|sum theta_i tau_i|`.
    pub residual_i: f64,
    /// `|sum theta_ij tau_i tau_j + sum theta_i sigma_i|`.
    pub residual_ii: f64,
}

impl TangencyData {
    /// Index of the coordinate that serves as the parameter `tau2`.
    pub fn other(&self) -> usize {
        1 - self.slot
    }

    /// The parameter value `tau2`.
    pub fn tau2(&self) -> C64 {
        self.tau[self.other()]
    }
}

pub fn tangent_flex(
    p: &PeriodMatrix,
    z0: &[C64],
    branch: i8,
    prev: Option<&TangencyData>,
) -> Result<TangencyData> {
    if p.g() != 2 {
        return Err(Error::invalid("tangency data is implemented for genus 2 only"));
    }
    if z0.len() != 2 {
        return Err(Error::invalid("point must have dimension 2"));
    }
    if branch != 1 && branch != -1 {
        return Err(Error::invalid("branch must be +1 or -1"));
    }
    let local = theta_local(z0, p, DEFAULT_ABS_TOL)?;
    let grad = &local.gradient;
    let gnorm = norm(grad);
    if gnorm <= 1e-10 * local.scale {
        return Err(Error::SingularDivisor(gnorm));
    }
    let u = [grad[1], -grad[0]];
    if u[0].norm() < 1e-10 && u[1].norm() < 1e-10 {
        return Err(Error::DegenerateTangent);
    }
    let largest = if u[1].norm() > u[0].norm() { 1 } else { 0 };
    let slot = match prev {
        Some(pr) if u[pr.slot].norm() >= 1e-3 * u[largest].norm() => pr.slot,
        _ => largest,
    };
    let tau: Vec<C64> = u.iter().map(|x| x / u[slot]).collect();
    let curvature: C64 = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| local.hess(i, j) * tau[i] * tau[j])
        .sum();
    let g2 = gnorm * gnorm;
    // V for branch +1; branch -1 negates it.
    let v_plus: Vec<C64> = grad.iter().map(|gi| -curvature * gi.conj() / g2).collect();
    let branch = match prev {
        Some(pr) if hdot(&v_plus, &pr.v).re != 0.0 => {
            if hdot(&v_plus, &pr.v).re > 0.0 {
                1
            } else {
                -1
            }
        }
        _ => branch,
    };
    let b = f64::from(branch);
    let v: Vec<C64> = v_plus.iter().map(|x| x * b).collect();
    let mu = -b * v[slot];
    let mut sigma: Vec<C64> = (0..2).map(|i| b * v[i] + mu * tau[i]).collect();
    sigma[slot] = C64::new(0.0, 0.0);
    let lambda_t = sigma[1 - slot];

    let first: C64 = grad.iter().zip(&tau).map(|(a, b)| a * b).sum();
    let second: C64 = curvature + grad.iter().zip(&sigma).map(|(a, b)| a * b).sum::<C64>();
    Ok(TangencyData {
        z0: z0.to_vec(),
        tau,
        sigma,
        lambda_t,
        branch,
        slot,
        v,
        curvature,
        gradient: grad.clone(),
        theta: local.value,
        scale: local.scale,
        residual_i: first.norm(),
        residual_ii: second.norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theta::{theta_eval, DerivativeSpec};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn period() -> PeriodMatrix {
        PeriodMatrix::from_rows(&[vec![c(0.1, 1.2), c(0.2, 0.4)], vec![c(0.2, 0.4), c(-0.3, 1.0)]])
            .unwrap()
    }

    #[test]
    fn elliptic_zero_is_half_period_sum() {
        let p = PeriodMatrix::elliptic(c(0.0, 1.0)).unwrap();
        let z = divisor_point(&p, &[c(0.45, 0.55)], &[c(1.0, 0.0)]).unwrap();
        assert!((z[0] - c(0.5, 0.5)).norm() < 1e-10);
    }

    #[test]
    fn divisor_point_meets_tolerance() {
        let p = period();
        let z = divisor_point(&p, &[c(0.5, 0.3), c(0.4, 0.5)], &[c(1.0, 0.0), c(0.3, 0.0)]).unwrap();
        let (v, s) = crate::theta::theta_with_scale(&z, &p, DEFAULT_ABS_TOL).unwrap();
        assert!(v.norm() <= ROOT_TOL * s);
    }

    #[test]
    fn zero_direction_rejected() {
        let p = period();
        assert!(divisor_point(&p, &[c(0.0, 0.0); 2], &[c(0.0, 0.0); 2]).is_err());
    }

    #[test]
    fn tangency_data_satisfies_both_conditions() {
        let p = period();
        let z = divisor_point(&p, &[c(0.5, 0.3), c(0.4, 0.5)], &[c(1.0, 0.0), c(0.3, 0.0)]).unwrap();
        for branch in [1, -1] {
            let t = tangent_flex(&p, &z, branch, None).unwrap();
            assert_eq!(t.tau[t.slot], c(1.0, 0.0));
            assert_eq!(t.sigma[t.slot], c(0.0, 0.0));
            assert!(t.residual_i <= 1e-9 * t.scale);
            assert!(t.residual_ii <= 1e-9 * t.scale);
            let vsum: C64 = t.gradient.iter().zip(&t.v).map(|(a, b)| a * b).sum();
            assert!((vsum + f64::from(branch) * t.curvature).norm() < 1e-9 * t.scale);
        }
    }

    #[test]
    fn branches_flip_v_and_share_sigma() {
        let p = period();
        let z = divisor_point(&p, &[c(0.5, 0.3), c(0.4, 0.5)], &[c(1.0, 0.0), c(0.3, 0.0)]).unwrap();
        let a = tangent_flex(&p, &z, 1, None).unwrap();
        let b = tangent_flex(&p, &z, -1, None).unwrap();
        for i in 0..2 {
            assert!((a.v[i] + b.v[i]).norm() < 1e-14);
            assert!((a.sigma[i] - b.sigma[i]).norm() < 1e-14);
        }
        let prev = tangent_flex(&p, &z, -1, Some(&a)).unwrap();
        assert_eq!(prev.branch, 1);
    }

    #[test]
    fn singular_divisor_point_rejected() {
        // Odd two-torsion points of a decomposable surface are singular on the divisor.
        let p = PeriodMatrix::from_rows(&[vec![c(0.0, 1.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 1.2)]])
            .unwrap();
        let z = [c(0.5, 0.5), c(0.5, 0.6)];
        assert!(theta_eval(&z, &p, &DerivativeSpec::none(), 1e-12).unwrap().norm() < 1e-12);
        assert!(matches!(tangent_flex(&p, &z, 1, None), Err(Error::SingularDivisor(_))));
    }

    #[test]
    fn tangency_point_kills_directional_derivative() {
        let p = period();
        let u = [c(1.0, 0.0), c(0.4, 0.2)];
        let z = tangency_point(&p, &[c(0.5, 0.4), c(0.45, 0.5)], &u).unwrap();
        let local = theta_local(&z, &p, DEFAULT_ABS_TOL).unwrap();
        let along: C64 = local.gradient.iter().zip(&u).map(|(a, b)| a * b).sum();
        assert!(local.value.norm() <= 1e-10 * local.scale);
        assert!(along.norm() <= 1e-9 * local.scale);
    }
}
