//! Small dense kernels shared by the geometric modules.

mod diff;
mod lm;
mod matrix;
mod ode;

pub use diff::central_diff;
pub use lm::{lm_fit, FitResult, LmOptions};
pub use matrix::{lstsq, singular_values, svd_rank, ComplexMatrix, RankResult, DEFAULT_RTOL};
pub use ode::{integrate_path, IntegrateOptions, Path};

use crate::C64;

pub(crate) fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian inner product `sum a_i conj(b_i)`.
pub(crate) fn hdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

#[cfg(test)]
pub(crate) fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
