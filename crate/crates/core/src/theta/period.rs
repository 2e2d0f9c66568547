use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;
use crate::C64;

/// Period matrices whose imaginary part has a smaller eigenvalue are rejected.
pub const MIN_LAMBDA: f64 = 1e-3;
const SYMMETRY_TOL: f64 = 1e-12;

/// A point of the Siegel upper half space: symmetric `g x g` complex matrix with
/// positive definite imaginary part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPeriodMatrix", into = "RawPeriodMatrix")]
pub struct PeriodMatrix {
    g: usize,
    omega: Vec<C64>,
    im_inv: Vec<f64>,
    lambda_min: f64,
    lambda_max: f64,
    im_det: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPeriodMatrix {
    g: usize,
    omega: Vec<C64>,
}

impl TryFrom<RawPeriodMatrix> for PeriodMatrix {
    type Error = Error;

    fn try_from(raw: RawPeriodMatrix) -> Result<Self> {
        PeriodMatrix::new(raw.g, raw.omega)
    }
}

impl From<PeriodMatrix> for RawPeriodMatrix {
    fn from(p: PeriodMatrix) -> Self {
        RawPeriodMatrix {
            g: p.g,
            omega: p.omega,
        }
    }
}

impl PeriodMatrix {
    /// Validates symmetry (relative `1e-12`) and `lambda_min(Im Omega) >= 1e-3`.
    /// Entries are given row-major.
    pub fn new(g: usize, omega: Vec<C64>) -> Result<Self> {
        if g == 0 {
            return Err(Error::invalid("genus must be at least 1"));
        }
        if omega.len() != g * g {
            return Err(Error::invalid(format!(
                "period matrix of genus {g} needs {} entries, got {}",
                g * g,
                omega.len()
            )));
        }
        if omega.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("period matrix has non-finite entries"));
        }
        let max_abs = omega.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let asym = asymmetry(g, &omega);
        if asym > SYMMETRY_TOL * max_abs {
            return Err(Error::invalid(format!(
                "period matrix is not symmetric: max |Omega - Omega^T| = {asym:e}"
            )));
        }
        let mut sym = omega;
        for i in 0..g {
            for j in (i + 1)..g {
                let avg = 0.5 * (sym[i * g + j] + sym[j * g + i]);
                sym[i * g + j] = avg;
                sym[j * g + i] = avg;
            }
        }

        let im = DMatrix::from_fn(g, g, |i, j| sym[i * g + j].im);
        let eig = SymmetricEigen::new(im.clone());
        let lambda_min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let lambda_max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(lambda_min >= MIN_LAMBDA) {
            return Err(Error::invalid(format!(
                "Im Omega is not sufficiently positive definite: lambda_min = {lambda_min:e}"
            )));
        }
        let im_inv = im
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::invalid("Im Omega is singular"))?;
        Ok(Self {
            g,
            omega: sym,
            im_inv: im_inv.iter().copied().collect(),
            lambda_min,
            lambda_max,
            im_det: im.determinant(),
        })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let g = rows.len();
        if rows.iter().any(|r| r.len() != g) {
            return Err(Error::invalid("period matrix must be square"));
        }
        Self::new(g, rows.concat())
    }

    /// Genus-1 period matrix `[tau]`.
    pub fn elliptic(tau: C64) -> Result<Self> {
        Self::new(1, vec![tau])
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.omega[i * self.g + j]
    }

    pub fn entries(&self) -> &[C64] {
        &self.omega
    }

    pub fn as_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_row_major(self.g, self.g, self.omega.clone())
            .expect("shape checked on construction")
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub(crate) fn im_det(&self) -> f64 {
        self.im_det
    }

    pub(crate) fn im_inv(&self, i: usize, j: usize) -> f64 {
        self.im_inv[i * self.g + j]
    }

    /// `Y^{-1} y` for the imaginary part `Y` of Omega.
    pub(crate) fn solve_im(&self, y: &[f64]) -> Vec<f64> {
        (0..self.g)
            .map(|i| (0..self.g).map(|j| self.im_inv(i, j) * y[j]).sum())
            .collect()
    }

    /// `Omega v` for a real vector `v`.
    pub(crate) fn mul_real(&self, v: &[f64]) -> Vec<C64> {
        (0..self.g)
            .map(|i| (0..self.g).map(|j| self.entry(i, j) * v[j]).sum())
            .collect()
    }

    /// `v^T Omega v` for a real vector `v`.
    pub(crate) fn quad_real(&self, v: &[f64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.g {
            for j in 0..self.g {
                acc += self.omega[i * self.g + j] * (v[i] * v[j]);
            }
        }
        acc
    }

    /// `v^T (Im Omega) v`.
    pub(crate) fn im_quad(&self, v: &[f64]) -> f64 {
        self.quad_real(v).im
    }

    /// Symmetric perturbation `Omega + h (E_ij + E_ji)`; for `i == j` only `Omega_ii` moves by `h`.
    pub fn perturbed(&self, i: usize, j: usize, h: C64) -> Result<Self> {
        let mut omega = self.omega.clone();
        omega[i * self.g + j] += h;
        if i != j {
            omega[j * self.g + i] += h;
        }
        Self::new(self.g, omega)
    }
}

pub(crate) fn asymmetry(g: usize, omega: &[C64]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..g {
        for j in 0..g {
            worst = worst.max((omega[i * g + j] - omega[j * g + i]).norm());
        }
    }
    worst
}
