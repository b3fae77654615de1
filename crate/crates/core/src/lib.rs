//! Boundary-inversion metrics on sampled domains in model Ptolemaic spaces,
//! and exhaustive four-point certification of Ptolemaic, Gromov-hyperbolic
//! and strongly hyperbolic behaviour of finite metric spaces.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the `*F64`
//! aliases below name the double-precision instantiations used by the CLI.

// `!(x > 0)` style checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod boundary;
pub mod error;
pub mod four_point;
pub mod lemma;
pub mod metric;
pub mod model;
pub mod sampling;
pub mod scalar;
pub mod sharpness;

pub use boundary::{
    lambda_sup, read_points, rho, rho_matrix, rho_matrix_subset, sp_metric, write_points, zx_prior_bound,
    DomainSample, LabeledPoint, RhoMatrix,
};
pub use error::{Error, Result};
pub use four_point::{
    gromov_delta, gromov_delta_with, max_strong_epsilon, max_strong_epsilon_auto, ptolemaic_defect,
    ptolemaic_defect_with, strong_defect, strong_defect_with, strong_to_gromov, EpsilonMax, Exec, GromovResult,
    QuadrupleWitness, StrongResult,
};
pub use lemma::{equality_case, rearrangement_sides, EqualityFlags};
pub use metric::{build_matrix, validate_entries, DistanceMatrix, RawMatrix, ValidationReport};
pub use model::{geodesic_between, parallel_normal, GeodesicFrame, ModelSpace, Point};
pub use scalar::Scalar;
pub use sharpness::{
    build_configuration, sweep, verify_bounds, verify_maximizer_claim, Configuration, SharpnessConfig, SweepRow,
};

pub type DistanceMatrixF64 = DistanceMatrix<f64>;
pub type DistanceMatrixF32 = DistanceMatrix<f32>;
pub type ModelSpaceF64 = ModelSpace<f64>;
pub type ModelSpaceF32 = ModelSpace<f32>;
pub type PointF64 = Point<f64>;
pub type DomainSampleF64 = DomainSample<f64>;
pub type RhoMatrixF64 = RhoMatrix<f64>;
pub type SharpnessConfigF64 = SharpnessConfig<f64>;
pub type SweepRowF64 = SweepRow<f64>;
