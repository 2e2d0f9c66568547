//! Numerical laboratory for principally polarized abelian varieties.
//!
//! The crate evaluates Riemann theta functions and second-order theta functions
//! with derivatives, tests Kummer-variety flex conditions, fits and checks the
//! KP-type theta relations, and reconstructs translation structures on
//! hypersurfaces, in particular genus-2 theta divisors.
//!
//! Module map:
//! - [`numerics`]: rank, least squares, ODE integration, finite differences.
//! - [`theta`]: period matrices and exact term-wise theta derivatives.
//! - [`kummer`]: the second-order theta vector, Kummer map and rank tests.
//! - [`kp`]: flex data, gauge group, operator/bilinear/PDE residuals, tangency data.
//! - [`translation`]: hypersurface oracles, translation frames, reconstruction, tracing.
//! - [`io`]: period-matrix documents, example generators and job reports.

pub mod error;
pub mod io;
pub mod kp;
pub mod kummer;
pub mod numerics;
pub mod theta;
pub mod translation;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};
pub use kp::{FlexData, GaugeTransform, KpFrame, TangencyData};
pub use kummer::{JetOperators, KummerPoint, Theta2Vector};
pub use numerics::{ComplexMatrix, FitResult, RankResult};
pub use theta::{DerivativeSpec, PeriodMatrix, ReducedPoint, SummationPlan};
pub use translation::{Chart, HypersurfaceOracle, TranslationFrame};
pub use io::{JobReport, PeriodMatrixDocument};
