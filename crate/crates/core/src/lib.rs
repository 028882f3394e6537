//! Robust weak recovery for node-corrupted stochastic block models and
//! row/column-corrupted Z₂ synchronization.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`, which every pipeline uses.

pub mod adversary;
pub mod calibration;
pub mod dense;
pub mod error;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod model;
pub mod program;
pub mod rounding;
pub mod scalar;
pub mod sdp;
pub mod seed;
pub mod sparse;
pub mod spectral;
pub mod z2;

pub use adversary::{corrupt_nodes, corrupt_z2, erasure_adversary, CorruptionRecord, NodeStrategy, Z2Strategy};
pub use dense::{recover_dense, DenseProgramParams};
pub use error::{Error, Result};
pub use harness::{evaluate_overlap, phase_sweep, run_experiment, ExperimentConfig, Report};
pub use linalg::{Factor, SymOperator};
pub use model::{balanced_labels, center_adjacency, sample_sbm, sample_z2, Graph, LabelVector, SbmParams};
pub use rounding::{gaussian_sign_rounding, select_estimate, Estimate};
pub use scalar::Scalar;
pub use sdp::{solve_basic_sdp, SdpOptions, SdpSolution};
pub use sparse::{recover_sparse, SparseParams};
pub use z2::{recover_z2, Z2ProgramParams};

pub type Matrix = linalg::DenseMatrix<f64>;
pub type Matrix32 = linalg::DenseMatrix<f32>;
pub type Centered = model::CenteredMatrix<f64>;
pub type Solution = sdp::SdpSolution<f64>;
pub type Point = program::ProgramPoint<f64>;
pub type Z2Obs = model::Z2Instance<f64>;
