//! Integration of `dz/dtau2 = tau / lambda` from several base points.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use super::{FrameField, HypersurfaceOracle};
use crate::error::{Error, Result};
use crate::numerics::{integrate_path, norm, IntegrateOptions, Path};
use crate::C64;

/// Curve traced from one base point, sampled on a shared `tau2` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledCurve {
    pub base: Vec<C64>,
    pub tau2: Vec<C64>,
    pub points: Vec<Vec<C64>>,
}

impl SampledCurve {
    /// `z(tau2) - z(tau2_0)`: the curve summand of the chart.
    pub fn displacements(&self) -> Vec<Vec<C64>> {
        self.points
            .iter()
            .map(|z| z.iter().zip(&self.base).map(|(a, b)| a - b).collect())
            .collect()
    }
}

/// Sampled chart `z = alpha(tau2) + A`: one curve per base point `A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    pub curves: Vec<SampledCurve>,
    /// Largest `|f| / scale` over all samples.
    pub max_residual: f64,
    /// Largest distance between displacement curves of two base points.
    pub max_deviation: f64,
    pub min_lambda: f64,
}

/// Largest `|(z_a - z_a(0)) - (z_b - z_b(0))|` over sample index and curve pairs.
pub fn parallel_deviation(curves: &[SampledCurve]) -> f64 {
    let disp: Vec<Vec<Vec<C64>>> = curves.iter().map(SampledCurve::displacements).collect();
    let mut worst: f64 = 0.0;
    for a in 0..disp.len() {
        for b in (a + 1)..disp.len() {
            for (x, y) in disp[a].iter().zip(&disp[b]) {
                let d: Vec<C64> = x.iter().zip(y).map(|(p, q)| p - q).collect();
                worst = worst.max(norm(&d));
            }
        }
    }
    worst
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReconstructOptions {
    /// Step in `|tau2|`.
    pub step: f64,
    /// Abort when `|lambda|` drops below this; default `1e-6` times the median
    /// `|lambda|` over the span.
    pub min_lambda: Option<f64>,
    /// Base points must satisfy `|f| <= surface_tol * scale`.
    pub surface_tol: f64,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self {
            step: 1e-3,
            min_lambda: None,
            surface_tol: 1e-8,
        }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn reconstruct<H, F>(
    oracle: &H,
    field: &F,
    base_points: &[Vec<C64>],
    span: (C64, C64),
    opts: &ReconstructOptions,
) -> Result<Chart>
where
    H: HypersurfaceOracle + ?Sized,
    F: FrameField + ?Sized,
{
    let (t0, t1) = span;
    let length = (t1 - t0).norm();
    if base_points.is_empty() {
        return Err(Error::invalid("at least one base point is required"));
    }
    if !(opts.step > 0.0) {
        return Err(Error::invalid("step must be positive"));
    }
    for z in base_points {
        let value = oracle.value(z)?.norm();
        let bound = opts.surface_tol * oracle.scale(z)?;
        if value > bound {
            return Err(Error::OffSurface { value, bound });
        }
    }
    let min_lambda = match opts.min_lambda {
        Some(m) => m,
        None => {
            let samples = (0..=32)
                .map(|k| Ok(field.frame_at(t0 + (t1 - t0) * (k as f64 / 32.0))?.1.norm()))
                .collect::<Result<Vec<f64>>>()?;
            1e-6 * median(samples)
        }
    };

    let ode = IntegrateOptions {
        step: if length > 0.0 { opts.step / length } else { 1.0 },
        ..IntegrateOptions::default()
    };
    let mut curves = Vec::with_capacity(base_points.len());
    let mut finished: Vec<Path> = Vec::new();
    for base in base_points {
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let result = integrate_path(
            |s, _z| {
                let tau2 = t0 + (t1 - t0) * s;
                let nan = vec![C64::new(f64::NAN, f64::NAN); base.len()];
                match field.frame_at(tau2) {
                    Ok((tau, lambda)) if lambda.norm() >= min_lambda => {
                        tau.iter().map(|x| x / lambda * (t1 - t0)).collect()
                    }
                    Ok((_, lambda)) => {
                        failure.replace(Some(Error::NearSingularFrame {
                            lambda: lambda.norm(),
                            min_lambda,
                            tau2,
                            partial: Vec::new(),
                        }));
                        nan
                    }
                    Err(e) => {
                        failure.replace(Some(e));
                        nan
                    }
                }
            },
            base,
            0.0,
            1.0,
            &ode,
        );
        let path = match result {
            Ok(path) => path,
            Err(Error::Integration(aborted)) => {
                return Err(match failure.into_inner() {
                    Some(Error::NearSingularFrame {
                        lambda,
                        min_lambda,
                        tau2,
                        ..
                    }) => {
                        finished.push(aborted.partial);
                        Error::NearSingularFrame {
                            lambda,
                            min_lambda,
                            tau2,
                            partial: finished,
                        }
                    }
                    Some(other) => other,
                    None => Error::Integration(aborted),
                });
            }
            Err(e) => return Err(e),
        };
        finished.push(path.clone());
        curves.push(SampledCurve {
            base: base.clone(),
            tau2: path.samples.iter().map(|(s, _)| t0 + (t1 - t0) * *s).collect(),
            points: path.samples.into_iter().map(|(_, z)| z).collect(),
        });
    }

    let mut max_residual: f64 = 0.0;
    for curve in &curves {
        for z in &curve.points {
            max_residual = max_residual.max(oracle.value(z)?.norm() / oracle.scale(z)?);
        }
    }
    Ok(Chart {
        max_deviation: parallel_deviation(&curves),
        curves,
        max_residual,
        min_lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::translation::{ChartFrameField, ConstantFrameField, Hyperplane, TranslationSurface};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn constant_field_gives_straight_parallel_lines() {
        let plane = Hyperplane {
            normal: vec![c(1.0, 0.0), c(-1.0, 0.0)],
            offset: c(0.0, 0.0),
        };
        let field = ConstantFrameField {
            tau: vec![c(1.0, 0.0), c(1.0, 0.0)],
            lambda: c(2.0, 0.0),
        };
        let bases = vec![vec![c(0.0, 0.0); 2], vec![c(0.5, 0.1), c(0.5, 0.1)]];
        let chart = reconstruct(&plane, &field, &bases, (c(0.0, 0.0), c(1.0, 0.0)), &ReconstructOptions::default())
            .unwrap();
        assert!(chart.max_deviation < 1e-12);
        let last = chart.curves[0].points.last().unwrap();
        assert!((last[0] - 0.5).norm() < 1e-14);
    }

    #[test]
    fn cubic_surface_reconstruction() {
        let s = TranslationSurface::cubic();
        let curve = s.curve();
        let field = ChartFrameField::new(&curve, c(0.0, 0.0)).unwrap();
        let bases = vec![s.chart_point(c(0.0, 0.0), c(0.0, 0.0)), s.chart_point(c(0.0, 0.0), c(0.4, -0.2))];
        let chart = reconstruct(&s, &field, &bases, (c(0.0, 0.0), c(0.5, 0.0)), &ReconstructOptions::default())
            .unwrap();
        assert!(chart.max_residual < 1e-8, "{}", chart.max_residual);
        assert!(chart.max_deviation < 1e-8, "{}", chart.max_deviation);
        // z(tau2) - z(0) = alpha(tau2 / 2) - alpha(0).
        let curve0 = &chart.curves[0];
        for (tau2, z) in curve0.tau2.iter().zip(&curve0.points) {
            let t = tau2 / 2.0;
            let exact = [t, t * t, t * t * t];
            for i in 0..3 {
                assert!((z[i] - exact[i]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn vanishing_lambda_aborts_with_partial_paths() {
        struct Shrinking;
        impl FrameField for Shrinking {
            fn frame_at(&self, tau2: C64) -> Result<(Vec<C64>, C64)> {
                Ok((vec![c(1.0, 0.0), c(1.0, 0.0)], c(1.0, 0.0) - tau2))
            }
        }
        let plane = Hyperplane {
            normal: vec![c(1.0, 0.0), c(-1.0, 0.0)],
            offset: c(0.0, 0.0),
        };
        let opts = ReconstructOptions {
            min_lambda: Some(0.1),
            ..ReconstructOptions::default()
        };
        let out = reconstruct(&plane, &Shrinking, &[vec![c(0.0, 0.0); 2]], (c(0.0, 0.0), c(1.0, 0.0)), &opts);
        match out {
            Err(Error::NearSingularFrame { partial, lambda, .. }) => {
                assert!(lambda < 0.1);
                assert_eq!(partial.len(), 1);
                assert!(partial[0].samples.len() > 100);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
