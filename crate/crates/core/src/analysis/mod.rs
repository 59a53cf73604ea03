//! Exact solutions, error norms and convergence orders.

pub mod eoc;
pub mod exact;
pub mod interp;
pub mod norms;
pub mod quadrature;

pub use eoc::{estimate_eoc, fit_order, EocReport, NormEoc, OrderFit, StudyRecord};
pub use exact::{
    ExactSolution, FnSolution, PointSolution, SegmentLevelDomain, SegmentSolution2d,
    SegmentSolution3d,
};
pub use interp::{near_vertices, truncated_interpolant};
pub use norms::{weighted_error, weighted_errors, NormKind, WeightedNormSpec};
