//! Multi-start least-squares fit of the operator relation.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{apply_gauge, op_residual, FlexData, GaugeTransform};
use crate::error::{Error, Result};
use crate::kummer::{characteristic, is_indecomposable};
use crate::numerics::{hdot, lm_fit, lstsq, norm, ComplexMatrix, LmOptions, DEFAULT_RTOL};
use crate::theta::{lattice_sum, PeriodMatrix, Series, DEFAULT_ABS_TOL};
use crate::C64;

/// Derivative tensors of the second-order theta vector at the origin, so that the
/// operator relation becomes a polynomial in `(U, V, W, d)`.
#[derive(Debug, Clone)]
pub struct FlexSystem {
    g: usize,
    t0: Vec<C64>,
    /// Per characteristic, `d_i d_j theta2` at `g * i + j`.
    t2: Vec<Vec<C64>>,
    /// Per characteristic, `d_i d_j d_k d_l theta2` at `((i g + j) g + k) g + l`.
    t4: Vec<Vec<C64>>,
}

impl FlexSystem {
    pub fn new(p: &PeriodMatrix) -> Result<Self> {
        let g = p.g();
        let zero = vec![C64::new(0.0, 0.0); g];
        let c = C64::i() * (4.0 * PI);
        let (g2, g4) = (g * g, g * g * g * g);
        let mut t0 = Vec::new();
        let mut t2 = Vec::new();
        let mut t4 = Vec::new();
        for idx in 0..1usize << g {
            let eps = characteristic(idx, g);
            let sum = lattice_sum(
                p,
                Series::SecondOrder(&eps),
                &zero,
                DEFAULT_ABS_TOL,
                4,
                1.0,
                1 + g2 + g4,
                |m, out| {
                    out[0] = C64::new(1.0, 0.0);
                    for i in 0..g {
                        for j in 0..g {
                            let mij = m[i] * m[j];
                            out[1 + i * g + j] = c * c * mij;
                            for k in 0..g {
                                for l in 0..g {
                                    out[1 + g2 + ((i * g + j) * g + k) * g + l] =
                                        c * c * c * c * (mij * m[k] * m[l]);
                                }
                            }
                        }
                    }
                },
            )?;
            t0.push(sum.values[0]);
            t2.push(sum.values[1..1 + g2].to_vec());
            t4.push(sum.values[1 + g2..].to_vec());
        }
        Ok(Self { g, t0, t2, t4 })
    }

    pub fn g(&self) -> usize {
        self.g
    }

    /// `theta2(0)`.
    pub fn theta2(&self) -> &[C64] {
        &self.t0
    }

    fn quadratic(&self, e: usize, a: &[C64], b: &[C64]) -> C64 {
        let g = self.g;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..g {
            for j in 0..g {
                acc += self.t2[e][i * g + j] * a[i] * b[j];
            }
        }
        acc
    }

    fn quartic(&self, e: usize, u: &[C64]) -> C64 {
        let g = self.g;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..g {
            for j in 0..g {
                let uij = u[i] * u[j];
                for k in 0..g {
                    for l in 0..g {
                        acc += self.t4[e][((i * g + j) * g + k) * g + l] * (uij * u[k] * u[l]);
                    }
                }
            }
        }
        acc
    }

    /// The operator residual from the precomputed tensors.
    pub fn residual(&self, u: &[C64], v: &[C64], w: &[C64], d: C64) -> Vec<C64> {
        (0..self.t0.len())
            .map(|e| {
                self.quartic(e, u) - self.quadratic(e, u, w)
                    + 0.75 * self.quadratic(e, v, v)
                    + d * self.t0[e]
            })
            .collect()
    }

    /// Least-squares `(W, d)` for fixed `(U, V)`; the relation is linear in them.
    fn solve_linear(&self, u: &[C64], v: &[C64]) -> Result<(Vec<C64>, C64)> {
        let g = self.g;
        let n = self.t0.len();
        let mut a = ComplexMatrix::zeros(n, g + 1);
        let mut b = vec![C64::new(0.0, 0.0); n];
        for e in 0..n {
            for j in 0..g {
                let mut col = C64::new(0.0, 0.0);
                for i in 0..g {
                    col += self.t2[e][i * g + j] * u[i];
                }
                a[(e, j)] = -col;
            }
            a[(e, g)] = self.t0[e];
            b[e] = -(self.quartic(e, u) + 0.75 * self.quadratic(e, v, v));
        }
        let x = lstsq(&a, &b, 1e-13)?;
        Ok((x[..g].to_vec(), x[g]))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlexFitOptions {
    pub starts: usize,
    pub seed: u64,
    /// Target for `|op_residual| / |theta2(0)|`.
    pub rel_tol: f64,
    pub lm: LmOptions,
}

impl Default for FlexFitOptions {
    fn default() -> Self {
        Self {
            starts: 8,
            seed: 0,
            rel_tol: 1e-7,
            lm: LmOptions {
                max_iterations: 300,
                abs_tol: 1e-14,
                ..LmOptions::default()
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlexFit {
    /// Gauge-fixed best solution.
    pub flex: FlexData,
    /// `|op_residual|` re-evaluated from the theta series.
    pub residual_norm: f64,
    pub theta2_norm: f64,
    pub relative_residual: f64,
    pub converged: bool,
    pub best_start: usize,
    pub start_residuals: Vec<f64>,
    pub indecomposable: bool,
}

pub fn flex_fit(p: &PeriodMatrix, starts: usize, seed: u64) -> Result<FlexFit> {
    flex_fit_with(
        p,
        &FlexFitOptions {
            starts,
            seed,
            ..FlexFitOptions::default()
        },
    )
}

fn complex_normal(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        })
        .collect()
}

fn max_index(v: &[C64]) -> usize {
    let mut best = 0;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > v[best].norm() {
            best = i;
        }
    }
    best
}

/// Brings `f` to the fixed gauge: `|U| = 1`, the first largest coordinate of `U`
/// real positive, `<V, U> = 0` (Hermitian) and the first nonzero coordinate of `V`
/// with nonnegative real part.
pub fn gauge_fix(f: &FlexData) -> Result<FlexData> {
    let k = max_index(&f.u);
    let phase = C64::from_polar(1.0, -f.u[k].arg());
    let lambda = phase / norm(&f.u);
    let u1: Vec<C64> = f.u.iter().map(|z| z * lambda).collect();
    let alpha = -lambda * lambda * hdot(&f.v, &u1) / 2.0;
    let mut fixed = apply_gauge(f, &GaugeTransform::new(lambda, alpha, 1)?)?;
    fixed.u[k] = C64::new(fixed.u[k].norm(), 0.0);
    let vmax = norm(&fixed.v);
    if let Some(first) = fixed.v.iter().find(|z| z.norm() > 1e-12 * vmax) {
        if first.re < 0.0 {
            fixed = apply_gauge(&fixed, &GaugeTransform::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), -1)?)?;
        }
    }
    Ok(fixed)
}

pub fn flex_fit_with(p: &PeriodMatrix, opts: &FlexFitOptions) -> Result<FlexFit> {
    if opts.starts == 0 {
        return Err(Error::invalid("at least one start is required"));
    }
    let g = p.g();
    let system = FlexSystem::new(p)?;
    let scale = norm(system.theta2());
    let indecomposable = is_indecomposable(p, DEFAULT_RTOL)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut best: Option<(usize, FlexData, f64)> = None;
    let mut start_residuals = Vec::with_capacity(opts.starts);
    for start in 0..opts.starts {
        let raw_u = complex_normal(&mut rng, g);
        let raw_v = complex_normal(&mut rng, g);
        let k = max_index(&raw_u);
        let phase = C64::from_polar(1.0 / norm(&raw_u), -raw_u[k].arg());
        let u: Vec<C64> = raw_u.iter().map(|z| z * phase).collect();
        let proj = hdot(&raw_v, &u);
        let v: Vec<C64> = raw_v.iter().zip(&u).map(|(a, b)| a - proj * b).collect();
        let (w, d) = system.solve_linear(&u, &v)?;

        let mut x0 = Vec::with_capacity(3 * g + 1);
        x0.extend_from_slice(&u);
        x0.extend_from_slice(&v);
        x0.extend_from_slice(&w);
        x0.push(d);
        let fit = lm_fit(
            |x| {
                let (u, rest) = x.split_at(g);
                let (v, rest) = rest.split_at(g);
                let (w, d) = rest.split_at(g);
                let mut r: Vec<C64> = system
                    .residual(u, v, w, d[0])
                    .into_iter()
                    .map(|z| z / scale)
                    .collect();
                r.push(C64::new(norm(u).powi(2) - 1.0, 0.0));
                r.push(hdot(v, u));
                r.push(C64::new(u[k].im, 0.0));
                Ok(r)
            },
            &x0,
            &opts.lm,
        )?;
        let x = &fit.solution;
        let candidate = FlexData::new(
            x[..g].to_vec(),
            x[g..2 * g].to_vec(),
            x[2 * g..3 * g].to_vec(),
            x[3 * g],
        );
        let Ok(candidate) = candidate.and_then(|f| gauge_fix(&f)) else {
            start_residuals.push(f64::INFINITY);
            continue;
        };
        let res = norm(&system.residual(&candidate.u, &candidate.v, &candidate.w, candidate.d)) / scale;
        start_residuals.push(res);
        if best.as_ref().is_none_or(|b| res < b.2) {
            best = Some((start, candidate, res));
        }
    }
    let (best_start, flex, _) =
        best.ok_or_else(|| Error::Evaluation("no start produced valid flex data".into()))?;
    let residual_norm = norm(&op_residual(p, &flex)?);
    let relative_residual = residual_norm / scale;
    Ok(FlexFit {
        flex,
        residual_norm,
        theta2_norm: scale,
        relative_residual,
        converged: relative_residual <= opts.rel_tol,
        best_start,
        start_residuals,
        indecomposable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn tensors_match_series_residual() {
        let p = PeriodMatrix::from_rows(&[vec![c(0.1, 1.2), c(0.2, 0.4)], vec![c(0.2, 0.4), c(-0.3, 1.0)]])
            .unwrap();
        let f = FlexData::new(
            vec![c(0.8, 0.1), c(-0.3, 0.4)],
            vec![c(0.2, -0.5), c(1.1, 0.0)],
            vec![c(-0.7, 0.3), c(0.05, 0.9)],
            c(2.0, -1.0),
        )
        .unwrap();
        let sys = FlexSystem::new(&p).unwrap();
        let a = sys.residual(&f.u, &f.v, &f.w, f.d);
        let b = op_residual(&p, &f).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-9 * y.norm().max(1.0));
        }
    }

    #[test]
    fn gauge_fix_conditions() {
        let f = FlexData::new(
            vec![c(0.3, 0.4), c(-0.9, 0.2)],
            vec![c(-0.2, -0.5), c(1.1, 0.3)],
            vec![c(0.0, 0.0); 2],
            c(1.0, 0.0),
        )
        .unwrap();
        let h = gauge_fix(&f).unwrap();
        assert!((norm(&h.u) - 1.0).abs() < 1e-14);
        assert_eq!(h.u[1].im, 0.0);
        assert!(h.u[1].re > 0.0);
        assert!(hdot(&h.v, &h.u).norm() < 1e-14);
        assert!(h.v[0].re >= 0.0);
    }

    #[test]
    fn elliptic_fit_is_exact() {
        let p = PeriodMatrix::elliptic(c(0.0, 1.0)).unwrap();
        let fit = flex_fit(&p, 2, 7).unwrap();
        assert!(fit.converged, "{fit:?}");
        assert!(fit.residual_norm <= 1e-8);
        assert!(fit.indecomposable);
        assert_eq!(fit.flex.u, vec![c(1.0, 0.0)]);
    }
}
