//! P1 finite elements for `-Δu = γ` where `γ` is a point Dirac mass or a
//! measure carried by a straight segment, on graded isotropic and
//! anisotropic simplicial meshes.
//!
//! The crate is organised bottom-up:
//! [`geometry`] (distances, domains), [`mesh`] (generators, validation,
//! grading audit, file formats), [`assembly`] (stiffness and measure loads),
//! [`solver`] (preconditioned CG and a dense Cholesky cross-check),
//! [`analysis`] (exact solutions, weighted errors, convergence orders),
//! [`theory`] (admissible grading exponents) and [`study`] (the pipeline
//! gluing everything into convergence tables).

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod assembly;
pub mod error;
pub mod geometry;
pub mod mesh;
pub mod solver;
pub mod sparse;
pub mod study;
pub mod theory;

pub use error::{Error, Result, Stage};
pub use geometry::{Density, Domain, Point, SingularSource};
pub use mesh::{GradingSpec, GradingStrategy, Mesh};
pub use solver::{SolveConfig, SolveReport};
pub use study::{ProblemKind, StudyConfig};
pub use theory::{MeshKind, ProblemClass, TargetNorm};
