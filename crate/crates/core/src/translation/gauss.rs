//! Rank of the second fundamental form (the differential of the Gauss map).

use super::HypersurfaceOracle;
use crate::error::{Error, Result};
use crate::numerics::{norm, singular_values, ComplexMatrix};
use crate::C64;

/// Hessian of `f` restricted to the tangent hyperplane, in the basis
/// `e_j - (f_j / f_k) e_k` (`j != k`) where `f_k` is the largest gradient entry.
pub fn second_fundamental_form<H: HypersurfaceOracle + ?Sized>(
    oracle: &H,
    z: &[C64],
) -> Result<(ComplexMatrix, f64)> {
    let g = oracle.dim();
    let grad = oracle.gradient(z)?;
    let gnorm = norm(&grad);
    if gnorm <= 1e-10 * oracle.scale(z)? {
        return Err(Error::SingularPoint(gnorm));
    }
    let hess = oracle.hessian(z)?;
    let k = (0..g)
        .fold(0, |best, i| if grad[i].norm() > grad[best].norm() { i } else { best });
    let basis: Vec<Vec<C64>> = (0..g)
        .filter(|&j| j != k)
        .map(|j| {
            let mut v = vec![C64::new(0.0, 0.0); g];
            v[j] = C64::new(1.0, 0.0);
            v[k] = -grad[j] / grad[k];
            v
        })
        .collect();
    let n = basis.len();
    let mut form = ComplexMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..g {
                for j in 0..g {
                    acc += basis[a][i] * hess[i * g + j] * basis[b][j];
                }
            }
            form[(a, b)] = acc;
        }
    }
    // Magnitude the form would have if the Hessian were generic: the rank threshold
    // is taken relative to it, so a vanishing form has rank 0.
    let hnorm = hess.iter().map(|h| h.norm_sqr()).sum::<f64>().sqrt();
    let vmax = basis.iter().map(|v| norm(v)).fold(0.0, f64::max);
    Ok((form, hnorm * vmax * vmax))
}

/// Rank of the second fundamental form at `z`: `g - 1` for a nondegenerate Gauss
/// map, at most `g - 2` on developable hypersurfaces.
pub fn gauss_rank<H: HypersurfaceOracle + ?Sized>(oracle: &H, z: &[C64], rtol: f64) -> Result<usize> {
    if !(rtol > 0.0 && rtol < 1.0) {
        return Err(Error::invalid("rtol must lie in (0, 1)"));
    }
    let (form, reference) = second_fundamental_form(oracle, z)?;
    let sv = singular_values(&form);
    let top = sv.first().copied().unwrap_or(0.0).max(reference);
    Ok(sv.iter().filter(|&&s| s > 0.0 && s >= rtol * top).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::translation::{Cylinder, Hyperplane, Quadric};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn classical_ranks() {
        let plane = Hyperplane {
            normal: vec![c(1.0, 0.0), c(0.3, 0.2), c(-1.0, 0.0)],
            offset: c(0.0, 0.0),
        };
        assert_eq!(gauss_rank(&plane, &[c(0.1, 0.0), c(0.0, 0.0), c(0.1, 0.0)], 1e-8).unwrap(), 0);

        // (0.6, 0.8 cos w, 0.8 sin w) lies on the unit sphere for complex w.
        let w = c(0.3, 0.2);
        let z = [c(0.6, 0.0), 0.8 * w.cos(), 0.8 * w.sin()];
        assert!(Quadric { g: 3 }.value(&z).unwrap().norm() < 1e-15);
        assert_eq!(gauss_rank(&Quadric { g: 3 }, &z, 1e-8).unwrap(), 2);

        let zc = [w.cos(), w.sin(), c(0.7, -0.1)];
        assert_eq!(gauss_rank(&Cylinder { g: 3 }, &zc, 1e-8).unwrap(), 1);
    }

    #[test]
    fn singular_point_rejected() {
        let plane = Hyperplane {
            normal: vec![c(0.0, 0.0), c(0.0, 0.0)],
            offset: c(0.0, 0.0),
        };
        assert!(matches!(gauss_rank(&plane, &[c(0.0, 0.0); 2], 1e-8), Err(Error::SingularPoint(_))));
    }
}
