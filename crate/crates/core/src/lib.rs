//! Area-preserving curve shortening flow of open curves whose endpoints slide
//! perpendicularly along a fixed convex support curve, together with the
//! diagnostics and rescaling tools used to study it.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! bottom of this file fix the width for callers that do not care.

// `!(x > 0.0)` is how NaN is made to fail a check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve;
pub mod diagnostics;
pub mod error;
pub mod flow;
pub mod initial;
pub mod point;
pub mod rescaling;
pub mod scalar;
pub mod spline;
pub mod support;

pub use curve::{ArclengthTable, CurvatureSamples, DiscreteCurve, End, EndpointFrame};
pub use diagnostics::{
    check_admissibility, enclosed_area, gaussian_density, AdmissibilityReport, DensityProbe,
    DiagnosticsRecord, IndexReport, RecordContext, RecordFlags,
};
pub use error::{FlowError, Result};
pub use flow::{
    run, run_observed, Boundary, FlowConfig, FlowMode, FlowState, Measure, ProbeSpec, RunOptions,
    StepOutcome, Termination, Trajectory,
};
pub use initial::{InitialSpec, OrthogonalArc, RadialBump};
pub use point::PlanarPoint;
pub use rescaling::{
    classify_singularity, estimate_blowup_time, fit_circular_arc, grim_reaper, hamilton_rescale,
    parabolic_rescale, self_shrinker_residual, CircleFit, Classification, HamiltonFrame,
    RescaledFrame, ShrinkerResidual, SingularityType,
};
pub use scalar::Scalar;
pub use support::{
    BoundaryLift, SupportCurve, SupportFrame, SupportMetrics, SupportShape, SupportSpec,
};

pub type Point64 = PlanarPoint<f64>;
pub type Point32 = PlanarPoint<f32>;
pub type Curve64 = DiscreteCurve<f64>;
pub type Curve32 = DiscreteCurve<f32>;
pub type Support64 = SupportCurve<f64>;
pub type Support32 = SupportCurve<f32>;
pub type Lift64 = BoundaryLift<f64>;
pub type State64 = FlowState<f64>;
pub type State32 = FlowState<f32>;
pub type Trajectory64 = Trajectory<f64>;
pub type Trajectory32 = Trajectory<f32>;
