use thiserror::Error;

use crate::numerics::Path;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("tolerance {abs_tol:e} unachievable: truncation radius {radius:.2} exceeds cap {cap}")]
    ToleranceUnachievable { abs_tol: f64, radius: f64, cap: f64 },

    #[error("evaluation failed: {0}")]
    Evaluation(String),

    #[error("degenerate Kummer point: all second-order theta values below {0:e}")]
    DegeneratePoint(f64),

    #[error("invalid gauge transform: lambda must be nonzero")]
    InvalidGauge,

    #[error("theta vanishes at grid point (x, y, t) = ({x}, {y}, {t})")]
    Pole { x: f64, y: f64, t: f64 },

    #[error("singular point of the theta divisor: |grad theta| = {0:e}")]
    SingularDivisor(f64),

    #[error("degenerate tangent direction: |U_1| and |U_2| both below 1e-10")]
    DegenerateTangent,

    #[error("root not found after {iterations} Newton iterations (|theta| = {residual:e})")]
    RootNotFound { iterations: usize, residual: f64 },

    #[error("point is off the surface: |f| = {value:e} > {bound:e}")]
    OffSurface { value: f64, bound: f64 },

    #[error("singular point of the hypersurface: |grad f| = {0:e}")]
    SingularPoint(f64),

    #[error("degenerate chart: all first derivatives of alpha vanish")]
    DegenerateChart,

    #[error("near-singular frame: |lambda| = {lambda:e} below {min_lambda:e} at tau2 = {tau2}")]
    NearSingularFrame {
        lambda: f64,
        min_lambda: f64,
        tau2: num_complex::Complex64,
        /// Samples integrated before the frame degenerated, one path per base point.
        partial: Vec<Path>,
    },

    #[error("trace diverged at step {step}: correction {correction:e} exceeds cap {cap:e}")]
    TraceDivergence {
        step: usize,
        correction: f64,
        cap: f64,
    },

    #[error("integration aborted at s = {}: non-finite field value", .0.aborted_at)]
    Integration(Box<PathError>),

    #[error("parse error: {0}")]
    Parse(String),
}

/// Integration failure carrying the samples produced before the abort.
#[derive(Debug, Clone)]
pub struct PathError {
    pub aborted_at: f64,
    pub partial: Path,
}

impl Error {
    /// Short stable identifier used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::ToleranceUnachievable { .. } => "tolerance-unachievable",
            Error::Evaluation(_) => "evaluation",
            Error::DegeneratePoint(_) => "degenerate-point",
            Error::InvalidGauge => "invalid-gauge",
            Error::Pole { .. } => "pole",
            Error::SingularDivisor(_) => "singular-divisor",
            Error::DegenerateTangent => "degenerate-tangent",
            Error::RootNotFound { .. } => "root-not-found",
            Error::OffSurface { .. } => "off-surface",
            Error::SingularPoint(_) => "singular-point",
            Error::DegenerateChart => "degenerate-chart",
            Error::NearSingularFrame { .. } => "near-singular-frame",
            Error::TraceDivergence { .. } => "trace-divergence",
            Error::Integration(_) => "integration",
            Error::Parse(_) => "parse",
        }
    }

    /// Errors caused by the caller's input rather than by a failed computation.
    pub fn is_invalid_input(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::Parse(_)
                | Error::ToleranceUnachievable { .. }
                | Error::InvalidGauge
                | Error::OffSurface { .. }
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
