//! Dense prediction–correction machinery for the Gaussian back-substitution variants.
//!
//! Everything here materializes the full constraint system and is meant for
//! toy and desk-scale instances only; the solvers never build these matrices.

mod constraints;
mod gb;
mod history;
mod reference;
mod suite;

pub use constraints::{build_constraints, ConstraintSystem, GbIterate, Ordering};
pub use gb::{build_gb_matrices, gb_coupling, Definiteness, GbMatrices, IdentityCheck};
pub use history::{
    annotate_trace, h_norm_trace, limit_proxy, max_increase, ordering_of, record_run, HNormTrace, RecordedRun,
};
pub use reference::prediction_correction_step;
pub use suite::{
    coupling_layout_error, run_diagnostics, toy_dataset, Check, DiagnoseOptions, CONTRACTION_SLACK, EQUIVALENCE_TOL,
    IDENTITY_TOL, RESIDUAL_SLACK,
};

/// Largest row count or iterate dimension accepted by the dense diagnostics.
pub const MAX_DENSE_DIM: usize = 2_500;
