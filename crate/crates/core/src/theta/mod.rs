//! Riemann theta functions and second-order theta functions with exact
//! term-wise directional derivatives.
//!
//! All sums are evaluated at a reduced point (see [`reduce`]) over an ellipsoid
//! whose radius comes from a Gaussian tail bound. Lattice points are visited in a
//! fixed order and accumulated in symmetric pairs `(k, -k)`, so results are
//! bitwise reproducible and exactly even in `z`.

mod jet;
mod period;
mod plan;

pub use jet::TaylorJet;
pub use period::{PeriodMatrix, MIN_LAMBDA};
pub use plan::{truncation_radius, SummationPlan, MAX_RADIUS};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::norm;
use crate::C64;

pub const DEFAULT_ABS_TOL: f64 = 1e-12;
pub const MAX_DERIVATIVE_ORDER: usize = 6;

/// Ordered directions of a directional derivative `d_{U_1} ... d_{U_k}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DerivativeSpec {
    directions: Vec<Vec<C64>>,
}

impl DerivativeSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(directions: Vec<Vec<C64>>) -> Result<Self> {
        if directions.len() > MAX_DERIVATIVE_ORDER {
            return Err(Error::invalid(format!(
                "at most {MAX_DERIVATIVE_ORDER} derivative directions supported"
            )));
        }
        if directions
            .iter()
            .flatten()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::invalid("derivative direction is not finite"));
        }
        Ok(Self { directions })
    }

    /// Derivative along the coordinate axes with the given indices.
    pub fn axes(g: usize, axes: &[usize]) -> Result<Self> {
        let dirs = axes
            .iter()
            .map(|&i| {
                let mut e = vec![C64::new(0.0, 0.0); g];
                e[i] = C64::new(1.0, 0.0);
                e
            })
            .collect();
        Self::new(dirs)
    }

    pub fn order(&self) -> usize {
        self.directions.len()
    }

    pub fn directions(&self) -> &[Vec<C64>] {
        &self.directions
    }
}

/// Quasi-periodicity reduction `z = z_red + a + Omega b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedPoint {
    pub z_red: Vec<C64>,
    pub b: Vec<i64>,
    pub a: Vec<i64>,
    /// `theta(z) = exp(log_factor) theta(z_red)`.
    pub log_factor: C64,
}

/// Reduces `z` so that `Y^{-1} Im z_red` and `Re z_red` lie in `[-1/2, 1/2)^g`.
pub fn reduce(z: &[C64], p: &PeriodMatrix) -> ReducedPoint {
    let g = p.g();
    let im: Vec<f64> = z.iter().map(|w| w.im).collect();
    let v = p.solve_im(&im);
    let b: Vec<i64> = v.iter().map(|x| (x + 0.5).floor() as i64).collect();
    let bf: Vec<f64> = b.iter().map(|&x| x as f64).collect();
    let shift = p.mul_real(&bf);
    let z1: Vec<C64> = (0..g).map(|i| z[i] - shift[i]).collect();
    let a: Vec<i64> = z1.iter().map(|w| (w.re + 0.5).floor() as i64).collect();
    let z_red: Vec<C64> = (0..g).map(|i| z1[i] - a[i] as f64).collect();
    let log_factor = if b.iter().all(|&x| x == 0) {
        C64::new(0.0, 0.0)
    } else {
        let bz: C64 = bf.iter().zip(&z_red).map(|(x, w)| w * x).sum();
        -C64::i() * PI * p.quad_real(&bf) - C64::i() * 2.0 * PI * bz
    };
    ReducedPoint {
        z_red,
        b,
        a,
        log_factor,
    }
}

/// Which of the two series is being summed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Series<'a> {
    /// `theta(z, Omega)`.
    Riemann,
    /// `theta[eps; 0](2z, 2 Omega)`.
    SecondOrder(&'a [u8]),
}

impl Series<'_> {
    fn scale(self) -> f64 {
        match self {
            Series::Riemann => 1.0,
            Series::SecondOrder(_) => 2.0,
        }
    }
}

/// Result of a lattice sum, before the quasi-periodicity factor is applied.
#[derive(Debug, Clone)]
pub(crate) struct LatticeSum {
    pub values: Vec<C64>,
    pub log_factor: C64,
    /// `sum |term|` of the undifferentiated summands.
    pub mass: f64,
    pub plan: SummationPlan,
}

impl LatticeSum {
    pub fn factor(&self) -> C64 {
        self.log_factor.exp()
    }

    pub fn scaled(&self, i: usize) -> C64 {
        self.values[i] * self.factor()
    }

    /// Modulus of the summand mass at the original point.
    pub fn scale(&self) -> f64 {
        self.mass * self.log_factor.re.exp()
    }
}

/// Sums `sum_k w_l(k - b) exp(pi i s k^T Omega k + 2 pi i s k^T z_red)` for each output
/// `l`, where `weights(m, out)` writes the weights for the lattice vector `m`
/// (already shifted by `eps/2` and expressed at the unreduced point).
///
/// `deriv_order` and `dir_norm` describe the largest weight envelope
/// `prod |2 pi s <m, U_j>|` so the truncation accounts for it.
pub(crate) fn lattice_sum<W>(
    p: &PeriodMatrix,
    series: Series<'_>,
    z: &[C64],
    abs_tol: f64,
    deriv_order: usize,
    dir_norm: f64,
    n_out: usize,
    mut weights: W,
) -> Result<LatticeSum>
where
    W: FnMut(&[f64], &mut [C64]),
{
    let g = p.g();
    if z.len() != g {
        return Err(Error::invalid(format!(
            "point has dimension {}, expected {g}",
            z.len()
        )));
    }
    if z.iter().any(|w| !w.re.is_finite() || !w.im.is_finite()) {
        return Err(Error::invalid("point is not finite"));
    }
    let zero = vec![0u8; g];
    let eps = match series {
        Series::Riemann => &zero[..],
        Series::SecondOrder(eps) => {
            if eps.len() != g || eps.iter().any(|&e| e > 1) {
                return Err(Error::invalid("characteristic must be a 0/1 vector of length g"));
            }
            eps
        }
    };
    let s = series.scale();
    let red = reduce(z, p);
    let b: Vec<f64> = red.b.iter().map(|&x| x as f64).collect();
    let z_bound = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let radius = plan::plan_radius(p, s, abs_tol, deriv_order, z_bound, dir_norm.max(1e-300))?;
    let points = plan::ellipsoid_points(p, radius, eps);

    let mut acc = vec![C64::new(0.0, 0.0); n_out];
    let mut w_plus = vec![C64::new(0.0, 0.0); n_out];
    let mut w_minus = vec![C64::new(0.0, 0.0); n_out];
    let mut m = vec![0.0; g];
    let mut mass = 0.0;
    for k in &points {
        let first = k.iter().find(|&&x| x != 0.0).copied();
        let self_paired = first.is_none();
        if !self_paired && first < Some(0.0) {
            continue;
        }
        let quad = C64::i() * (PI * s) * p.quad_real(k);
        let lin: C64 = k.iter().zip(&red.z_red).map(|(x, w)| w * *x).sum::<C64>()
            * C64::i()
            * (2.0 * PI * s);
        let t_plus = (quad + lin).exp();
        for i in 0..g {
            m[i] = k[i] - b[i];
        }
        weights(&m, &mut w_plus);
        if self_paired {
            mass += t_plus.norm();
            for (a, w) in acc.iter_mut().zip(&w_plus) {
                *a += w * t_plus;
            }
        } else {
            let t_minus = (quad - lin).exp();
            for i in 0..g {
                m[i] = -k[i] - b[i];
            }
            weights(&m, &mut w_minus);
            mass += t_plus.norm() + t_minus.norm();
            for l in 0..n_out {
                acc[l] += w_plus[l] * t_plus + w_minus[l] * t_minus;
            }
        }
    }
    let term_count = points.len();
    let log_factor = red.log_factor * s;
    Ok(LatticeSum {
        values: acc,
        log_factor,
        mass,
        plan: SummationPlan {
            radius,
            lattice_radius: radius / p.lambda_min().sqrt(),
            center: red.b.iter().map(|x| -x).collect(),
            abs_tol,
            term_count,
            deriv_order,
            z_bound,
        },
    })
}

fn check_order(spec: &DerivativeSpec) -> Result<()> {
    if spec.order() > MAX_DERIVATIVE_ORDER {
        return Err(Error::invalid("derivative order exceeds 6"));
    }
    Ok(())
}

fn directional_sum(
    p: &PeriodMatrix,
    series: Series<'_>,
    z: &[C64],
    spec: &DerivativeSpec,
    abs_tol: f64,
) -> Result<LatticeSum> {
    check_order(spec)?;
    let g = p.g();
    if spec.directions().iter().any(|d| d.len() != g) {
        return Err(Error::invalid("derivative direction has wrong dimension"));
    }
    let factor = C64::i() * (2.0 * PI * series.scale());
    let dir_norm = spec
        .directions()
        .iter()
        .map(|d| norm(d))
        .fold(0.0, f64::max);
    lattice_sum(
        p,
        series,
        z,
        abs_tol,
        spec.order(),
        dir_norm,
        1,
        |m, out| {
            out[0] = spec
                .directions()
                .iter()
                .map(|u| factor * u.iter().zip(m).map(|(x, y)| x * *y).sum::<C64>())
                .product();
        },
    )
}

/// `d_{U_1} ... d_{U_k} theta(z, Omega)` by term-wise differentiation.
pub fn theta_eval(z: &[C64], p: &PeriodMatrix, spec: &DerivativeSpec, abs_tol: f64) -> Result<C64> {
    Ok(directional_sum(p, Series::Riemann, z, spec, abs_tol)?.scaled(0))
}

/// Like [`theta_eval`] but with the plan used, for convergence studies.
pub fn theta_eval_with_plan(
    z: &[C64],
    p: &PeriodMatrix,
    spec: &DerivativeSpec,
    abs_tol: f64,
) -> Result<(C64, SummationPlan)> {
    let sum = directional_sum(p, Series::Riemann, z, spec, abs_tol)?;
    Ok((sum.scaled(0), sum.plan))
}

/// Value of `theta` together with the summand mass `sum |term|` at `z`, the natural
/// scale against which near-zero values are judged.
pub fn theta_with_scale(z: &[C64], p: &PeriodMatrix, abs_tol: f64) -> Result<(C64, f64)> {
    let sum = directional_sum(p, Series::Riemann, z, &DerivativeSpec::none(), abs_tol)?;
    Ok((sum.scaled(0), sum.scale()))
}

/// `d_{U_1} ... d_{U_k}` of `theta[eps; 0](2z, 2 Omega)` with respect to `z`.
pub fn theta2_eval(
    eps: &[u8],
    z: &[C64],
    p: &PeriodMatrix,
    spec: &DerivativeSpec,
    abs_tol: f64,
) -> Result<C64> {
    Ok(directional_sum(p, Series::SecondOrder(eps), z, spec, abs_tol)?.scaled(0))
}

/// Value, gradient and Hessian of `theta` at `z`, from one lattice pass.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTheta {
    pub value: C64,
    pub gradient: Vec<C64>,
    /// Row-major `g x g`.
    pub hessian: Vec<C64>,
    /// Summand mass at `z`.
    pub scale: f64,
}

impl LocalTheta {
    pub fn hess(&self, i: usize, j: usize) -> C64 {
        self.hessian[i * self.gradient.len() + j]
    }
}

pub fn theta_local(z: &[C64], p: &PeriodMatrix, abs_tol: f64) -> Result<LocalTheta> {
    let g = p.g();
    let n_out = 1 + g + g * g;
    let c = C64::i() * (2.0 * PI);
    let sum = lattice_sum(p, Series::Riemann, z, abs_tol, 2, 1.0, n_out, |m, out| {
        out[0] = C64::new(1.0, 0.0);
        for i in 0..g {
            out[1 + i] = c * m[i];
        }
        for i in 0..g {
            for j in 0..g {
                out[1 + g + i * g + j] = c * c * (m[i] * m[j]);
            }
        }
    })?;
    let f = sum.factor();
    Ok(LocalTheta {
        value: sum.values[0] * f,
        gradient: sum.values[1..1 + g].iter().map(|v| v * f).collect(),
        hessian: sum.values[1 + g..].iter().map(|v| v * f).collect(),
        scale: sum.scale(),
    })
}

/// Taylor jet of `theta` at a point, with the quasi-periodicity factor split off.
#[derive(Debug, Clone)]
pub struct ThetaJet {
    /// Coefficients of `theta(z + sum_d s_d dirs[d]) / exp(log_factor)`.
    pub jet: TaylorJet,
    pub log_factor: C64,
    /// `sum |term|` of the undifferentiated summands, without the factor.
    pub mass: f64,
}

/// Taylor jet of `s -> theta(z + sum_d s_d dirs[d])` up to total degree `order`.
///
/// Dividing out the factor keeps magnitudes moderate and leaves logarithmic
/// derivatives of positive order unchanged.
pub fn theta_jet(
    z: &[C64],
    p: &PeriodMatrix,
    dirs: &[Vec<C64>],
    order: usize,
    abs_tol: f64,
) -> Result<ThetaJet> {
    if order > MAX_DERIVATIVE_ORDER {
        return Err(Error::invalid("jet order exceeds 6"));
    }
    let g = p.g();
    if dirs.iter().any(|d| d.len() != g) {
        return Err(Error::invalid("jet direction has wrong dimension"));
    }
    let template = TaylorJet::zero(dirs.len(), order);
    let monomials = template.monomials().to_vec();
    let n_out = monomials.len();
    let dir_norm = dirs.iter().map(|d| norm(d)).fold(0.0, f64::max);
    let c = C64::i() * (2.0 * PI);
    let mut powers = vec![vec![C64::new(0.0, 0.0); order + 1]; dirs.len()];
    let sum = lattice_sum(
        p,
        Series::Riemann,
        z,
        abs_tol,
        order,
        dir_norm,
        n_out,
        |m, out| {
            for (d, dir) in dirs.iter().enumerate() {
                let a = c * dir.iter().zip(m).map(|(x, y)| x * *y).sum::<C64>();
                let mut pw = C64::new(1.0, 0.0);
                for e in 0..=order {
                    powers[d][e] = pw / jet::factorial(e);
                    pw *= a;
                }
            }
            for (o, mono) in out.iter_mut().zip(&monomials) {
                *o = mono
                    .iter()
                    .enumerate()
                    .map(|(d, &e)| powers[d][e as usize])
                    .product();
            }
        },
    )?;
    let mut jet = template;
    jet.coeffs_mut().copy_from_slice(&sum.values);
    Ok(ThetaJet {
        jet,
        log_factor: sum.log_factor,
        mass: sum.mass,
    })
}
