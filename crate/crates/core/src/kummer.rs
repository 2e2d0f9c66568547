//! The second-order theta vector, the Kummer map and the rank tests built on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{svd_rank, ComplexMatrix};
use crate::theta::{self, DerivativeSpec, PeriodMatrix, DEFAULT_ABS_TOL};
use crate::C64;

/// Below this modulus every Kummer coordinate counts as zero.
pub const DEGENERATE_THRESHOLD: f64 = 1e-12;

/// The characteristic with index `i`: bit `j` of `i` is `eps_{j+1}`.
pub fn characteristic(index: usize, g: usize) -> Vec<u8> {
    (0..g).map(|j| ((index >> j) & 1) as u8).collect()
}

pub fn characteristic_index(eps: &[u8]) -> usize {
    eps.iter()
        .enumerate()
        .map(|(j, &e)| (e as usize) << j)
        .sum()
}

/// `(theta[eps; 0](2z, 2 Omega))_eps`, indexed by [`characteristic_index`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theta2Vector {
    pub g: usize,
    pub values: Vec<C64>,
}

impl Theta2Vector {
    pub fn get(&self, eps: &[u8]) -> C64 {
        self.values[characteristic_index(eps)]
    }

    pub fn norm(&self) -> f64 {
        crate::numerics::norm(&self.values)
    }
}

pub fn theta2_vector(z: &[C64], p: &PeriodMatrix, spec: &DerivativeSpec) -> Result<Theta2Vector> {
    theta2_vector_tol(z, p, spec, DEFAULT_ABS_TOL)
}

/// [`theta2_vector`] with an explicit truncation tolerance. The truncation radius
/// does not depend on the characteristic, so all components share one plan.
pub fn theta2_vector_tol(
    z: &[C64],
    p: &PeriodMatrix,
    spec: &DerivativeSpec,
    abs_tol: f64,
) -> Result<Theta2Vector> {
    let g = p.g();
    let values = (0..1usize << g)
        .map(|i| theta::theta2_eval(&characteristic(i, g), z, p, spec, abs_tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(Theta2Vector { g, values })
}

/// A point of projective space, scaled so that its largest coordinate is exactly 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KummerPoint {
    pub coords: Vec<C64>,
    /// Index of the coordinate that was scaled to 1.
    pub normalization: usize,
}

impl KummerPoint {
    pub fn from_vector(v: &[C64]) -> Result<Self> {
        let (idx, max) = v
            .iter()
            .enumerate()
            .fold((0, 0.0), |(bi, bm), (i, z)| {
                if z.norm() > bm {
                    (i, z.norm())
                } else {
                    (bi, bm)
                }
            });
        if !(max >= DEGENERATE_THRESHOLD) {
            return Err(Error::DegeneratePoint(DEGENERATE_THRESHOLD));
        }
        let pivot = v[idx];
        let mut coords: Vec<C64> = v.iter().map(|z| z / pivot).collect();
        coords[idx] = C64::new(1.0, 0.0);
        Ok(Self {
            coords,
            normalization: idx,
        })
    }

    /// Largest coordinate difference after rescaling `other` to this point's chart.
    pub fn distance(&self, other: &KummerPoint) -> f64 {
        let pivot = other.coords[self.normalization];
        if pivot.norm() == 0.0 {
            return f64::INFINITY;
        }
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b / pivot).norm())
            .fold(0.0, f64::max)
    }
}

pub fn kummer_map(z: &[C64], p: &PeriodMatrix) -> Result<KummerPoint> {
    let v = theta2_vector(z, p, &DerivativeSpec::none())?;
    KummerPoint::from_vector(&v.values)
}

/// Columns `theta2(0)` and `d_i d_j theta2(0)` for `i <= j` in lexicographic order.
pub fn prop1_matrix(p: &PeriodMatrix) -> Result<ComplexMatrix> {
    let g = p.g();
    let zero = vec![C64::new(0.0, 0.0); g];
    let mut columns = vec![theta2_vector(&zero, p, &DerivativeSpec::none())?.values];
    for i in 0..g {
        for j in i..g {
            let spec = DerivativeSpec::axes(g, &[i, j])?;
            columns.push(theta2_vector(&zero, p, &spec)?.values);
        }
    }
    ComplexMatrix::from_columns(&columns)
}

pub fn is_indecomposable(p: &PeriodMatrix, rtol: f64) -> Result<bool> {
    let g = p.g();
    let rank = svd_rank(&prop1_matrix(p)?, rtol)?.rank;
    Ok(rank == g * (g + 1) / 2 + 1)
}

/// Vector fields `D1`, `D2`; the jet operators are `Delta1 = D1` and
/// `Delta2 = D2 + D1^2 / 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetOperators {
    pub d1: Vec<C64>,
    pub d2: Vec<C64>,
}

impl JetOperators {
    pub fn new(d1: Vec<C64>, d2: Vec<C64>) -> Result<Self> {
        if d1.len() != d2.len() {
            return Err(Error::invalid("D1 and D2 must have the same dimension"));
        }
        if d1.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            return Err(Error::invalid("D1 must be nonzero"));
        }
        Ok(Self { d1, d2 })
    }
}

/// The `2^g x 3` matrix `(theta2, Delta1 theta2, Delta2 theta2)` at `z`.
pub fn gw_matrix(z: &[C64], p: &PeriodMatrix, jet: &JetOperators) -> Result<ComplexMatrix> {
    let value = theta2_vector(z, p, &DerivativeSpec::none())?.values;
    let first = theta2_vector(z, p, &DerivativeSpec::new(vec![jet.d1.clone()])?)?.values;
    let d2 = theta2_vector(z, p, &DerivativeSpec::new(vec![jet.d2.clone()])?)?.values;
    let d11 = theta2_vector(
        z,
        p,
        &DerivativeSpec::new(vec![jet.d1.clone(), jet.d1.clone()])?,
    )?
    .values;
    let second: Vec<C64> = d2.iter().zip(&d11).map(|(a, b)| a + 0.5 * b).collect();
    ComplexMatrix::from_columns(&[value, first, second])
}

pub fn gw_rank(z: &[C64], p: &PeriodMatrix, jet: &JetOperators, rtol: f64) -> Result<usize> {
    Ok(svd_rank(&gw_matrix(z, p, jet)?, rtol)?.rank)
}

/// `theta(z+w) theta(z-w) / sum_eps theta2_eps(z) theta2_eps(w)`, or `None` when
/// the denominator is below `1e-8`.
pub fn riemann_ratio(z: &[C64], w: &[C64], p: &PeriodMatrix) -> Result<Option<C64>> {
    if z.len() != w.len() {
        return Err(Error::invalid("points have different dimensions"));
    }
    let none = DerivativeSpec::none();
    let plus: Vec<C64> = z.iter().zip(w).map(|(a, b)| a + b).collect();
    let minus: Vec<C64> = z.iter().zip(w).map(|(a, b)| a - b).collect();
    let num = theta::theta_eval(&plus, p, &none, DEFAULT_ABS_TOL)?
        * theta::theta_eval(&minus, p, &none, DEFAULT_ABS_TOL)?;
    let tz = theta2_vector(z, p, &none)?;
    let tw = theta2_vector(w, p, &none)?;
    let den: C64 = tz.values.iter().zip(&tw.values).map(|(a, b)| a * b).sum();
    if den.norm() <= 1e-8 {
        return Ok(None);
    }
    Ok(Some(num / den))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn brute_theta2(eps: u8, tau_im: f64) -> f64 {
        (-40..=40)
            .map(|n| {
                let m = n as f64 + 0.5 * eps as f64;
                (-2.0 * std::f64::consts::PI * tau_im * m * m).exp()
            })
            .sum()
    }

    #[test]
    fn characteristic_enumeration() {
        assert_eq!(characteristic(0, 2), vec![0, 0]);
        assert_eq!(characteristic(1, 2), vec![1, 0]);
        assert_eq!(characteristic(2, 2), vec![0, 1]);
        for i in 0..8 {
            assert_eq!(characteristic_index(&characteristic(i, 3)), i);
        }
    }

    #[test]
    fn elliptic_theta2_vector_matches_partial_sums() {
        let p = PeriodMatrix::elliptic(c(0.0, 1.0)).unwrap();
        let v = theta2_vector(&[c(0.0, 0.0)], &p, &DerivativeSpec::none()).unwrap();
        assert_eq!(v.values.len(), 2);
        assert!((v.values[0] - brute_theta2(0, 1.0)).norm() < 1e-14);
        assert!((v.values[1] - brute_theta2(1, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn first_derivative_vector_vanishes_at_origin() {
        let p = PeriodMatrix::elliptic(c(0.1, 0.9)).unwrap();
        let spec = DerivativeSpec::axes(1, &[0]).unwrap();
        let v = theta2_vector(&[c(0.0, 0.0)], &p, &spec).unwrap();
        assert!(v.values.iter().all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn prop1_shapes() {
        let p1 = PeriodMatrix::elliptic(c(0.0, 1.0)).unwrap();
        let m = prop1_matrix(&p1).unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 2));
        let p2 = PeriodMatrix::from_rows(&[vec![c(0.0, 1.0), c(0.0, 0.1)], vec![c(0.0, 0.1), c(0.0, 1.2)]])
            .unwrap();
        let m = prop1_matrix(&p2).unwrap();
        assert_eq!((m.rows(), m.cols()), (4, 4));
    }

    #[test]
    fn indecomposability_of_standard_examples() {
        let rtol = crate::numerics::DEFAULT_RTOL;
        let ell = PeriodMatrix::elliptic(c(0.3, 0.8)).unwrap();
        assert!(is_indecomposable(&ell, rtol).unwrap());
        let diag = PeriodMatrix::from_rows(&[vec![c(0.1, 1.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-0.2, 1.3)]])
            .unwrap();
        assert!(!is_indecomposable(&diag, rtol).unwrap());
        let coupled = PeriodMatrix::from_rows(&[vec![c(0.0, 1.0), c(0.0, 0.1)], vec![c(0.0, 0.1), c(0.0, 1.0)]])
            .unwrap();
        assert!(is_indecomposable(&coupled, rtol).unwrap());
    }

    #[test]
    fn gw_rank_at_origin_with_zero_d2() {
        let p = PeriodMatrix::from_rows(&[vec![c(0.0, 1.0), c(0.0, 0.3)], vec![c(0.0, 0.3), c(0.0, 1.1)]])
            .unwrap();
        let jet = JetOperators::new(vec![c(1.0, 0.0), c(0.4, 0.2)], vec![c(0.0, 0.0); 2]).unwrap();
        assert!(gw_rank(&[c(0.0, 0.0); 2], &p, &jet, 1e-8).unwrap() <= 2);
    }

    #[test]
    fn jet_operators_reject_zero_d1() {
        assert!(JetOperators::new(vec![c(0.0, 0.0)], vec![c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn kummer_point_is_even_and_normalized() {
        let p = PeriodMatrix::from_rows(&[vec![c(0.2, 1.0), c(0.1, 0.3)], vec![c(0.1, 0.3), c(0.0, 1.1)]])
            .unwrap();
        let z = [c(0.3, -0.2), c(0.1, 0.5)];
        let k = kummer_map(&z, &p).unwrap();
        assert_eq!(k.coords[k.normalization], c(1.0, 0.0));
        assert!(k.coords.iter().all(|w| w.norm() <= 1.0));
        let neg = kummer_map(&[-z[0], -z[1]], &p).unwrap();
        assert!(k.distance(&neg) < 1e-12);
    }

    #[test]
    fn degenerate_vector_rejected() {
        let out = KummerPoint::from_vector(&[c(1e-13, 0.0), c(0.0, 0.0)]);
        assert!(matches!(out, Err(Error::DegeneratePoint(_))));
    }
}
