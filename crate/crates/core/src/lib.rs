//! Bose-Hubbard lattices at unit filling.
//!
//! Builds the occupation-number basis, assembles the Hamiltonian in units of
//! the on-site repulsion `U`, finds ground states (dense, Lanczos or
//! strong-coupling perturbation theory) and evaluates one- and two-site
//! entanglement observables along sweeps of `λ = J/U`.

pub mod basis;
pub mod ccg;
pub mod entanglement;
mod error;
pub mod linalg;
pub mod operators;
pub mod solvers;
pub mod state;
pub mod sweep;

pub use basis::{FockBasis, Occupation, OccupationVector, Partition};
pub use ccg::SymmetricStateCoefficients;
pub use entanglement::{EntanglementReport, PairLabel, ReducedDensityMatrix};
pub use error::{Error, Result};
pub use operators::{Geometry, GeometryKind, HamiltonianParams, SparseHermitianOperator};
pub use solvers::{GroundStateResult, LanczosOptions, Method};
pub use state::{Excitation, QuantumState};
