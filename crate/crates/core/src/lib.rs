//! Overlapping community recovery for the mixed-membership stochastic
//! blockmodel (MMSB).
//!
//! The pipeline has two stages. Successive projection picks `k` almost-pure
//! nodes from the (observed or exact) weighted adjacency matrix, then one small
//! linear program per community recovers that community's characteristic
//! vector, i.e. a column of the node-community distribution matrix.
//!
//! Modules:
//! - [`linalg`]: dense kernels (top-k symmetric eigensolver, projections).
//! - [`mmsb`]: the generative model and the synthetic sampling protocol.
//! - [`spa`]: successive projection.
//! - [`lp`]: the anchored LP per community and the dense revised simplex.
//! - [`evaluation`]: permutation-matched error, binarization, complex merging.
//! - [`theory`]: bound calculator, incomplete beta, concentration checks.
//! - [`harness`]: sweeps, edge-list ingestion, CSV output and the CLI.

pub mod error;
pub mod evaluation;
pub mod harness;
pub mod linalg;
pub mod lp;
pub mod mmsb;
pub mod rng;
pub mod spa;
pub mod theory;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, SpectralEmbedding};
pub use lp::{recover_all, LpSolution, LpStatus, RecoveryMode, RecoveryResult};
pub use mmsb::{GraphKind, InteractionKind, MmsbParams, ThetaMatrix, WeightedGraph};
