//! Numerical core: adjacency eigenvalue extremes, Laplacian solves,
//! effective resistances and exact total-variation profiles.

mod eigen;
pub(crate) mod linalg;
mod mixing;
mod resistance;

pub use eigen::{
    eigen_extremes, EigenMethod, EigenOptions, SpectralSummary, DEFAULT_DENSE_THRESHOLD,
    DEFAULT_EIGEN_TOL,
};
pub use mixing::{
    empirical_mixing_time, tv_distance_profile, worst_start_tv_profile,
    EXACT_DISTRIBUTION_THRESHOLD, MAX_MIXING_STEPS,
};
pub use resistance::{
    effective_resistance, effective_resistance_with_tol, resistance_matrix,
    resistance_matrix_with_tol, Provenance, ResistanceHittingTable, DEFAULT_SOLVE_TOL,
};
