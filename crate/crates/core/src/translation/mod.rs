//! Hypersurfaces of translation type: frames, Gauss map rank, chart reconstruction,
//! and tracing on theta divisors.

mod frame;
mod gauss;
mod oracle;
mod reconstruct;
mod trace;

pub use frame::{
    frame_from_chart, verify_frame, ChartCurve, ChartFrameField, ConstantFrameField, FnCurve, FrameCheck,
    FrameField, PolynomialCurve, TranslationFrame,
};
pub use gauss::{gauss_rank, second_fundamental_form};
pub use oracle::{
    fd_consistency, Cylinder, Hyperplane, HypersurfaceOracle, Poly, Quadric, ThetaDivisor, TranslationSurface,
};
pub use reconstruct::{parallel_deviation, reconstruct, Chart, ReconstructOptions, SampledCurve};
pub use trace::{trace_theta_translation, Trace, TraceFrameField, TraceOptions, TraceSample};
