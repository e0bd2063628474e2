//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use mottlab::operators::assemble_hamiltonian;
use mottlab::{FockBasis, Geometry, HamiltonianParams, SparseHermitianOperator};

/// `N = M = n` periodic chain Hamiltonian at hopping `lambda`.
pub fn chain_hamiltonian(n: usize, lambda: f64) -> SparseHermitianOperator {
    let basis = Arc::new(FockBasis::new(n, n).expect("basis fits"));
    let params = HamiltonianParams::new(lambda, Geometry::chain_periodic(n)).expect("valid lambda");
    assemble_hamiltonian(&basis, &params).expect("assembly")
}
