use serde::{Deserialize, Serialize};

use crate::error::{Error, PathError, Result};
use crate::C64;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub samples: Vec<(f64, Vec<C64>)>,
}

impl Path {
    pub fn last(&self) -> Option<&(f64, Vec<C64>)> {
        self.samples.last()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegrateOptions {
    /// Fixed step, or the initial step when `adaptive_tol` is set.
    pub step: f64,
    /// Local error tolerance for step-doubling control; `None` means fixed steps.
    pub adaptive_tol: Option<f64>,
    pub min_step: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            step: 1e-3,
            adaptive_tol: None,
            min_step: 1e-12,
        }
    }
}

fn axpy(y: &[C64], a: f64, k: &[C64]) -> Vec<C64> {
    y.iter().zip(k).map(|(u, v)| u + v * a).collect()
}

fn finite(v: &[C64]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn rk4_step<F>(field: &mut F, s: f64, y: &[C64], h: f64) -> Option<Vec<C64>>
where
    F: FnMut(f64, &[C64]) -> Vec<C64>,
{
    let k1 = field(s, y);
    if !finite(&k1) {
        return None;
    }
    let k2 = field(s + 0.5 * h, &axpy(y, 0.5 * h, &k1));
    if !finite(&k2) {
        return None;
    }
    let k3 = field(s + 0.5 * h, &axpy(y, 0.5 * h, &k2));
    if !finite(&k3) {
        return None;
    }
    let k4 = field(s + h, &axpy(y, h, &k3));
    if !finite(&k4) {
        return None;
    }
    Some(
        (0..y.len())
            .map(|i| y[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0))
            .collect(),
    )
}

fn abort(s: f64, samples: Vec<(f64, Vec<C64>)>) -> Error {
    Error::Integration(Box::new(PathError {
        aborted_at: s,
        partial: Path { samples },
    }))
}

/// Classical fourth-order Runge-Kutta along the real parameter interval `[s0, s1]`.
///
/// The returned path contains both endpoints. A non-finite field value aborts the
/// integration; the error carries the samples computed so far.
pub fn integrate_path<F>(
    mut field: F,
    y0: &[C64],
    s0: f64,
    s1: f64,
    opts: &IntegrateOptions,
) -> Result<Path>
where
    F: FnMut(f64, &[C64]) -> Vec<C64>,
{
    if !(opts.step > 0.0) {
        return Err(Error::invalid("integration step must be positive"));
    }
    let mut samples = vec![(s0, y0.to_vec())];
    if s1 == s0 {
        return Ok(Path { samples });
    }
    let dir = (s1 - s0).signum();
    let span = (s1 - s0).abs();

    match opts.adaptive_tol {
        None => {
            // A span that is a whole number of steps up to roundoff gets exactly
            // that many, so grids built from the same step line up.
            let n = (span / opts.step * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            let h = (s1 - s0) / n as f64;
            let mut y = y0.to_vec();
            for k in 0..n {
                let s = s0 + k as f64 * h;
                match rk4_step(&mut field, s, &y, h) {
                    Some(next) => y = next,
                    None => return Err(abort(s, samples)),
                }
                let s_next = if k + 1 == n { s1 } else { s0 + (k + 1) as f64 * h };
                samples.push((s_next, y.clone()));
            }
        }
        Some(tol) => {
            let mut s = s0;
            let mut y = y0.to_vec();
            let mut h = opts.step.min(span);
            while (s1 - s) * dir > 0.0 {
                h = h.min((s1 - s).abs());
                let signed = dir * h;
                let full = rk4_step(&mut field, s, &y, signed);
                let half = rk4_step(&mut field, s, &y, 0.5 * signed)
                    .and_then(|mid| rk4_step(&mut field, s + 0.5 * signed, &mid, 0.5 * signed));
                let (full, half) = match (full, half) {
                    (Some(a), Some(b)) => (a, b),
                    _ => return Err(abort(s, samples)),
                };
                let err = full
                    .iter()
                    .zip(&half)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max)
                    / 15.0;
                if err <= tol || h <= opts.min_step {
                    s = if (s1 - s).abs() <= h { s1 } else { s + signed };
                    // Local extrapolation of the two half steps.
                    y = half
                        .iter()
                        .zip(&full)
                        .map(|(b, a)| b + (b - a) / 15.0)
                        .collect();
                    samples.push((s, y.clone()));
                }
                let factor = if err > 0.0 {
                    (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0)
                } else {
                    5.0
                };
                h = (h * factor).max(opts.min_step);
            }
        }
    }
    Ok(Path { samples })
}
