//! Correlation measures for two-qubit states.
//!
//! The crate computes entanglement of formation, quantum discord and
//! entropic accord (the minimax classical mutual information of local
//! projective measurements), together with the state families and the
//! experiment harness used to compare them.

pub mod error;
pub mod experiments;
pub mod linalg;
pub mod measurement;
pub mod measures;
pub mod minimax;
pub mod statefile;
pub mod states;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, EigenDecomposition, Subsystem};
pub use measurement::{JointDistribution, Outcome, ProjectiveBasis};
pub use measures::{MeasureEngine, MeasureReport};
pub use minimax::{GridOracle, OptimizerConfig, SphereGrid, SphereOptimizer};
pub use states::{BellDiagonalCoords, BellState, DensityMatrix, RandomMeasure};
