use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::PeriodMatrixDocument;
use crate::error::{Error, Result};
use crate::theta::PeriodMatrix;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExampleKind {
    Elliptic,
    Genus2Indecomposable,
    Genus2Decomposable,
    RandomSiegel,
}

impl ExampleKind {
    pub const ALL: [ExampleKind; 4] = [
        ExampleKind::Elliptic,
        ExampleKind::Genus2Indecomposable,
        ExampleKind::Genus2Decomposable,
        ExampleKind::RandomSiegel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExampleKind::Elliptic => "elliptic",
            ExampleKind::Genus2Indecomposable => "genus2-indecomposable",
            ExampleKind::Genus2Decomposable => "genus2-decomposable",
            ExampleKind::RandomSiegel => "random-siegel",
        }
    }
}

impl fmt::Display for ExampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExampleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExampleKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown example kind `{s}`")))
    }
}

fn tau(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-0.5..0.5), rng.random_range(0.8..1.6))
}

/// `Omega = S + i (B B^T + c I)` with `S` symmetric, entries of `S` uniform in
/// `[-1/2, 1/2)` and of `B` standard normal scaled by `1/sqrt(g)`.
pub fn random_siegel(g: usize, c: f64, seed: u64) -> Result<PeriodMatrix> {
    if g == 0 || !(c > 0.0) {
        return Err(Error::invalid("random-siegel needs g >= 1 and c > 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b: Vec<f64> = (0..g * g)
        .map(|_| rng.sample::<f64, _>(StandardNormal) / (g as f64).sqrt())
        .collect();
    let mut omega = vec![C64::new(0.0, 0.0); g * g];
    for i in 0..g {
        for j in i..g {
            let s = rng.random_range(-0.5..0.5);
            let y: f64 = (0..g).map(|k| b[i * g + k] * b[j * g + k]).sum::<f64>() + if i == j { c } else { 0.0 };
            omega[i * g + j] = C64::new(s, y);
            omega[j * g + i] = omega[i * g + j];
        }
    }
    PeriodMatrix::new(g, omega)
}

/// Deterministic example for `(kind, seed)`. `random-siegel` has genus 3 and `c = 0.3`.
pub fn generate_example(kind: ExampleKind, seed: u64) -> Result<PeriodMatrixDocument> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = match kind {
        ExampleKind::Elliptic => PeriodMatrix::elliptic(tau(&mut rng))?,
        ExampleKind::Genus2Indecomposable => {
            // Off-diagonal imaginary part bounded away from 0 keeps the example far
            // from the product locus; |b| <= 0.45 keeps lambda_min >= 0.45.
            let a = rng.random_range(0.9..1.4);
            let d = rng.random_range(0.9..1.4);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let b = sign * rng.random_range(0.25..0.45);
            let re: Vec<f64> = (0..3).map(|_| rng.random_range(-0.5..0.5)).collect();
            let off = C64::new(re[1], b);
            PeriodMatrix::from_rows(&[vec![C64::new(re[0], a), off], vec![off, C64::new(re[2], d)]])?
        }
        ExampleKind::Genus2Decomposable => {
            let zero = C64::new(0.0, 0.0);
            PeriodMatrix::from_rows(&[vec![tau(&mut rng), zero], vec![zero, tau(&mut rng)]])?
        }
        ExampleKind::RandomSiegel => random_siegel(3, 0.3, seed)?,
    };
    Ok(PeriodMatrixDocument::from_period(&p)
        .with_label(kind.name())
        .with_provenance(format!("generated: kind={kind}, seed={seed}")))
}
