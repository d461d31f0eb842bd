//! Bond-dimension-capped matrix-product-state simulation of QAOA for
//! MaxCut and Exact Cover 3.
//!
//! Qubits and sites are indexed from 0 and bitstrings are big-endian: qubit 0
//! is the leftmost character and the most significant bit.

pub mod bits;
pub mod compiler;
pub mod engine;
pub mod error;
pub mod io;
pub mod linalg;
pub mod mps;
pub mod problems;
pub mod sampler;
pub mod scalar;
pub mod schedule;
pub mod seeds;
pub mod trainer;

pub use bits::Bitstring;
pub use compiler::{compile_qaoa, CompiledCircuit, GateLabel, GateOp};
pub use engine::{run_qaoa, sweep, RunDiagnostics, SimOptions, SweepResult, SweepSpec};
pub use error::{Error, Result};
pub use linalg::{truncated_svd, CMatrix, TruncatedSvd};
pub use mps::{MpsState, NormMode, SiteTensor, TruncationReport};
pub use problems::{Certificate, Ec3Instance, IsingModel, MaxCutInstance, Problem, ProblemInstance, ProblemKind};
pub use sampler::{deterministic_sample, SampleOutcome};
pub use scalar::Real;
pub use schedule::{AngleSchedule, Method, Provenance};
pub use trainer::{global_optimize, grid_search_p1, landscape_p1, shared_angle_set, Landscape, OptimizeResult};

pub type Mps = MpsState<f64>;
pub type Mps32 = MpsState<f32>;
pub type Matrix = CMatrix<f64>;
