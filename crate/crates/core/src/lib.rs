//! Parallel ADMM solvers for penalized quantile regression and quantile-loss
//! SVM classification.
//!
//! Data is split row-wise into `M` blocks that update local copies of the
//! coefficient vector in parallel; a central step averages and applies the
//! penalty's proximal map. Four schemes are provided (see [`Variant`]), along
//! with an LLA driver for SCAD/MCP, HBIC model selection, data generators and
//! parsers, evaluation metrics and dense diagnostics for the Gaussian back
//! substitution convergence theory.
//!
//! ```
//! use qpadm_core::{data, solvers, PenaltyKind, PenaltySpec, SolverConfig};
//!
//! let ds = data::synth_generate(&data::SynthSpec::new(200, 20, 1)).unwrap().dataset;
//! let pen = PenaltySpec::uniform(PenaltyKind::WeightedL1, ds.p(), 5.0, false);
//! let cfg = SolverConfig { blocks: 2, ..SolverConfig::default() };
//! let fit = solvers::solve(&ds, &pen, &cfg).unwrap();
//! assert_eq!(fit.beta.len(), 20);
//! ```

pub mod data;
pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod loss;
pub mod matrix;
pub mod metrics;
pub mod model;
pub mod nonconvex;
pub mod scalar;
pub mod select;
pub mod solvers;

pub use error::{Error, Result};
pub use linalg::{RidgeFactor, RidgeMode};
pub use loss::{check_loss, prox_check_loss, prox_weighted_l1, slack_decompose};
pub use matrix::DenseMatrix;
pub use model::{Dataset, PenaltyKind, PenaltySpec, QuantileParam, SolverConfig, Task, Variant};
pub use scalar::Real;
pub use solvers::{FitResult, Outcome};

/// Numeric zero threshold used for support counting.
pub const ZERO_THRESHOLD: f64 = 1e-6;

pub type Matrix64 = DenseMatrix<f64>;
pub type Dataset64 = Dataset<f64>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type PenaltySpec64 = PenaltySpec<f64>;
pub type FitResult64 = FitResult<f64>;

pub type Matrix32 = DenseMatrix<f32>;
pub type Dataset32 = Dataset<f32>;
pub type SolverConfig32 = SolverConfig<f32>;
pub type PenaltySpec32 = PenaltySpec<f32>;
pub type FitResult32 = FitResult<f32>;
