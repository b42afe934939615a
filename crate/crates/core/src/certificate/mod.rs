//! Discretized certificate problems: direct least squares and the Fourier/Neumann construction.

mod assemble;
mod constructive;
mod fourier;
mod grid;
mod solve;

pub use assemble::{
    assemble_dc_operator, assemble_kernel, assemble_with, ArcOperator, KernelMatrix, SkeletonEval, DEFAULT_BAND,
    TABLE_DEPTH,
};
pub use constructive::{ConstructiveSolver, DcOutcome, NeumannOutcome};
pub use fourier::{
    fourier_subspace, invariant_operator_eigs, local_radius, min_depth_for_scale, subspace_exponent, FourierMode,
    FourierSubspace, ModeKind, SubspaceSpec,
};
pub use grid::{arc_norm, discretize, weighted_norm, DiscretizedManifold, Weighting};
pub use solve::{solve_certificate_pinv, Certificate, Measure};
