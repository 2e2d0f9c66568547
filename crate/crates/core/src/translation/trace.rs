//! Predictor-corrector tracing of the translation curves of a genus-2 theta divisor.

use serde::{Deserialize, Serialize};

use super::{gauss_rank, FrameField, SampledCurve, ThetaDivisor};
use crate::error::{Error, Result};
use crate::kp::{tangent_flex, TangencyData};
use crate::kummer::is_indecomposable;
use crate::numerics::{norm, DEFAULT_RTOL};
use crate::theta::{theta_local, PeriodMatrix, DEFAULT_ABS_TOL};
use crate::C64;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceOptions {
    /// Step in `tau2`.
    pub step: f64,
    /// Largest Newton correction accepted per step.
    pub correction_cap: f64,
    /// The start point must satisfy `|theta| <= start_tol * scale`.
    pub start_tol: f64,
    pub max_newton: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            step: 1e-3,
            correction_cap: 1e-5,
            start_tol: 1e-9,
            max_newton: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    /// Offset of `tau2` from its starting value along the real segment.
    pub s: f64,
    pub z: Vec<C64>,
    pub frame: TangencyData,
    /// `|theta|` at the predicted point, before correction.
    pub theta_abs: f64,
    /// Summand mass of `theta` at the predicted point.
    pub scale: f64,
    /// Total length of the Newton corrections.
    pub correction: f64,
}

impl TraceSample {
    pub fn theta_rel(&self) -> f64 {
        self.theta_abs / self.scale
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub samples: Vec<TraceSample>,
    pub branch: i8,
    pub step: f64,
    pub start_tau2: C64,
}

impl Trace {
    pub fn curve(&self) -> SampledCurve {
        SampledCurve {
            base: self.samples[0].z.clone(),
            tau2: self
                .samples
                .iter()
                .map(|s| self.start_tau2 + s.s)
                .collect(),
            points: self.samples.iter().map(|s| s.z.clone()).collect(),
        }
    }

    pub fn max_theta_rel(&self) -> f64 {
        self.samples.iter().map(TraceSample::theta_rel).fold(0.0, f64::max)
    }

    pub fn max_correction(&self) -> f64 {
        self.samples.iter().map(|s| s.correction).fold(0.0, f64::max)
    }

    pub fn csv_header(&self) -> Vec<String> {
        let g = self.samples.first().map_or(2, |s| s.z.len());
        let mut h = vec!["tau2".to_string()];
        for i in 1..=g {
            h.push(format!("z_{i}_re"));
            h.push(format!("z_{i}_im"));
        }
        h.push("theta_abs".into());
        h.push("correction".into());
        h
    }

    pub fn csv_rows(&self) -> Vec<Vec<f64>> {
        self.samples
            .iter()
            .map(|s| {
                let mut row = vec![s.s];
                for z in &s.z {
                    row.push(z.re);
                    row.push(z.im);
                }
                row.push(s.theta_abs);
                row.push(s.correction);
                row
            })
            .collect()
    }

    /// Largest deviation from `sigma_i = lambda d tau_i / d tau2`, with the derivative
    /// taken by central differences of consecutive samples against the nominal
    /// parameter `s`. In genus 2 this measures how far the trace's own `tau2` drifts
    /// from unit speed.
    pub fn frame_consistency(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for w in self.samples.windows(3) {
            let (a, b, c) = (&w[0].frame, &w[1].frame, &w[2].frame);
            let dt = w[2].s - w[0].s;
            for i in 0..b.tau.len() {
                let rate = (c.tau[i] - a.tau[i]) / dt;
                worst = worst.max((b.sigma[i] - b.lambda_t * rate).norm());
            }
        }
        worst
    }

    /// `tau(tau2)`, `lambda(tau2)` by cubic interpolation of the samples.
    pub fn frame_field(&self) -> TraceFrameField<'_> {
        TraceFrameField { trace: self }
    }
}

pub struct TraceFrameField<'a> {
    trace: &'a Trace,
}

impl FrameField for TraceFrameField<'_> {
    fn frame_at(&self, tau2: C64) -> Result<(Vec<C64>, C64)> {
        let samples = &self.trace.samples;
        let n = samples.len();
        if n < 4 {
            return Err(Error::invalid("interpolation needs at least four samples"));
        }
        let h = samples[1].s - samples[0].s;
        let x = (tau2 - self.trace.start_tau2).re / h;
        let i0 = (x.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
        let mut tau = vec![C64::new(0.0, 0.0); samples[0].z.len()];
        let mut lambda = C64::new(0.0, 0.0);
        for a in i0..i0 + 4 {
            let mut w = 1.0;
            for b in i0..i0 + 4 {
                if a != b {
                    w *= (x - b as f64) / (a as f64 - b as f64);
                }
            }
            for (t, s) in tau.iter_mut().zip(&samples[a].frame.tau) {
                *t += s * w;
            }
            lambda += samples[a].frame.lambda_t * w;
        }
        Ok((tau, lambda))
    }
}

fn direction(p: &PeriodMatrix, z: &[C64], branch: i8, prev: &TangencyData) -> Result<Vec<C64>> {
    let t = tangent_flex(p, z, branch, Some(prev))?;
    Ok(t.tau.iter().map(|x| x / t.lambda_t).collect())
}

fn shifted(z: &[C64], a: f64, k: &[C64]) -> Vec<C64> {
    z.iter().zip(k).map(|(x, y)| x + y * a).collect()
}

/// Traces the curve through `z_start` along which `tau2` advances by `span`.
///
/// Each step takes a fourth-order Runge-Kutta step of `dz/dtau2 = tau / lambda`
/// and projects back onto the divisor by Newton steps along the gradient.
pub fn trace_theta_translation(
    p: &PeriodMatrix,
    z_start: &[C64],
    branch: i8,
    span: f64,
    opts: &TraceOptions,
) -> Result<Trace> {
    if p.g() != 2 {
        return Err(Error::invalid("tracing is implemented for genus 2 only"));
    }
    if !(opts.step > 0.0) || !span.is_finite() {
        return Err(Error::invalid("step must be positive and span finite"));
    }
    if !is_indecomposable(p, DEFAULT_RTOL)? {
        return Err(Error::invalid("period matrix is decomposable"));
    }
    let start = theta_local(z_start, p, DEFAULT_ABS_TOL)?;
    if start.value.norm() > opts.start_tol * start.scale {
        return Err(Error::OffSurface {
            value: start.value.norm(),
            bound: opts.start_tol * start.scale,
        });
    }
    let divisor = ThetaDivisor { period: p.clone() };
    if gauss_rank(&divisor, z_start, DEFAULT_RTOL)? != 1 {
        return Err(Error::invalid("theta divisor is developable at the start point"));
    }

    let n = (span.abs() / opts.step).round().max(1.0) as usize;
    let h = span / n as f64;
    let mut z = z_start.to_vec();
    let mut frame = tangent_flex(p, &z, branch, None)?;
    let branch = frame.branch;
    let start_tau2 = frame.tau2();
    let mut samples = vec![TraceSample {
        s: 0.0,
        z: z.clone(),
        frame: frame.clone(),
        theta_abs: start.value.norm(),
        scale: start.scale,
        correction: 0.0,
    }];
    for k in 1..=n {
        let k1 = direction(p, &z, branch, &frame)?;
        let k2 = direction(p, &shifted(&z, 0.5 * h, &k1), branch, &frame)?;
        let k3 = direction(p, &shifted(&z, 0.5 * h, &k2), branch, &frame)?;
        let k4 = direction(p, &shifted(&z, h, &k3), branch, &frame)?;
        z = (0..z.len())
            .map(|i| z[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0))
            .collect();

        let predicted = theta_local(&z, p, DEFAULT_ABS_TOL)?;
        let (theta_abs, scale) = (predicted.value.norm(), predicted.scale);
        let mut correction = 0.0;
        let mut local = predicted;
        for _ in 0..opts.max_newton {
            if local.value.norm() <= 1e-15 * local.scale {
                break;
            }
            let g2 = norm(&local.gradient).powi(2);
            let dz: Vec<C64> = local
                .gradient
                .iter()
                .map(|gi| -local.value * gi.conj() / g2)
                .collect();
            let len = norm(&dz);
            correction += len;
            for (zi, d) in z.iter_mut().zip(&dz) {
                *zi += d;
            }
            if len <= 1e-16 * norm(&z).max(1.0) {
                break;
            }
            local = theta_local(&z, p, DEFAULT_ABS_TOL)?;
        }
        if correction > opts.correction_cap {
            return Err(Error::TraceDivergence {
                step: k,
                correction,
                cap: opts.correction_cap,
            });
        }
        frame = tangent_flex(p, &z, branch, Some(&frame))?;
        samples.push(TraceSample {
            s: k as f64 * h,
            z: z.clone(),
            frame: frame.clone(),
            theta_abs,
            scale,
            correction,
        });
    }
    Ok(Trace {
        samples,
        branch,
        step: h.abs(),
        start_tau2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kp::divisor_point;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn period() -> PeriodMatrix {
        PeriodMatrix::from_rows(&[vec![c(0.3, 1.2), c(-0.2, 0.35)], vec![c(-0.2, 0.35), c(0.1, 0.9)]]).unwrap()
    }

    fn start(p: &PeriodMatrix) -> Vec<C64> {
        divisor_point(p, &[c(0.2, 0.1), c(0.1, -0.05)], &[c(1.0, 0.0), c(0.3, 0.2)]).unwrap()
    }

    fn short() -> TraceOptions {
        TraceOptions {
            step: 1e-2,
            correction_cap: 1e-4,
            ..TraceOptions::default()
        }
    }

    #[test]
    fn stays_on_divisor_and_advances_tau2() {
        let p = period();
        let tr = trace_theta_translation(&p, &start(&p), 1, 0.2, &short()).unwrap();
        assert_eq!(tr.samples.len(), 21);
        assert!(tr.max_theta_rel() < 1e-8);
        assert!(tr.max_correction() < 1e-6);
        for s in &tr.samples {
            assert!((s.frame.tau2() - tr.start_tau2 - s.s).norm() < 1e-8);
        }
        assert!(tr.frame_consistency() < 1e-4);
    }

    #[test]
    fn negative_span_runs_backwards() {
        let p = period();
        let tr = trace_theta_translation(&p, &start(&p), 1, -0.1, &short()).unwrap();
        let last = tr.samples.last().unwrap();
        assert!((last.s + 0.1).abs() < 1e-15);
        assert!((last.frame.tau2() - tr.start_tau2 + 0.1).norm() < 1e-8);
    }

    #[test]
    fn branches_trace_the_same_curve() {
        let p = period();
        let z = start(&p);
        let a = trace_theta_translation(&p, &z, 1, 0.1, &short()).unwrap();
        let b = trace_theta_translation(&p, &z, -1, 0.1, &short()).unwrap();
        assert!(parallel_deviation_zero(&a, &b, false) < 1e-12);
    }

    #[test]
    fn negated_start_gives_negated_trace() {
        let p = period();
        let z = start(&p);
        let minus: Vec<C64> = z.iter().map(|x| -x).collect();
        let a = trace_theta_translation(&p, &z, 1, 0.1, &short()).unwrap();
        let b = trace_theta_translation(&p, &minus, 1, 0.1, &short()).unwrap();
        assert!(parallel_deviation_zero(&a, &b, true) < 1e-12);
    }

    fn parallel_deviation_zero(a: &Trace, b: &Trace, negate: bool) -> f64 {
        let sign = if negate { -1.0 } else { 1.0 };
        a.samples
            .iter()
            .zip(&b.samples)
            .flat_map(|(x, y)| x.z.iter().zip(&y.z).map(move |(u, v)| (u - v * sign).norm()))
            .fold(0.0, f64::max)
    }

    #[test]
    fn frame_field_interpolates_samples() {
        let p = period();
        let tr = trace_theta_translation(&p, &start(&p), 1, 0.1, &short()).unwrap();
        let field = tr.frame_field();
        let s = &tr.samples[4];
        let (tau, lambda) = field.frame_at(tr.start_tau2 + s.s).unwrap();
        assert!((lambda - s.frame.lambda_t).norm() < 1e-12);
        assert!((tau[1] - s.frame.tau[1]).norm() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let p = period();
        let tr = trace_theta_translation(&p, &start(&p), 1, 0.05, &short()).unwrap();
        assert_eq!(
            tr.csv_header(),
            ["tau2", "z_1_re", "z_1_im", "z_2_re", "z_2_im", "theta_abs", "correction"]
        );
        let rows = tr.csv_rows();
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| r.len() == 7));
        assert_eq!(rows[0][1], tr.samples[0].z[0].re);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = period();
        let off = vec![c(0.0, 0.0); 2];
        assert!(matches!(
            trace_theta_translation(&p, &off, 1, 0.1, &short()),
            Err(Error::OffSurface { .. })
        ));
        let diag = PeriodMatrix::from_rows(&[vec![c(0.0, 1.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 1.2)]]).unwrap();
        assert!(matches!(
            trace_theta_translation(&diag, &off, 1, 0.1, &short()),
            Err(Error::InvalidInput(_))
        ));
        let e = PeriodMatrix::elliptic(c(0.0, 1.0)).unwrap();
        assert!(trace_theta_translation(&e, &[c(0.5, 0.5)], 1, 0.1, &short()).is_err());
    }

    #[test]
    fn tight_cap_reports_divergence() {
        let p = period();
        let opts = TraceOptions {
            step: 0.1,
            correction_cap: 1e-12,
            ..TraceOptions::default()
        };
        match trace_theta_translation(&p, &start(&p), 1, 0.3, &opts) {
            Err(Error::TraceDivergence { step, correction, cap }) => {
                assert_eq!(step, 1);
                assert!(correction > cap);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
