//! Exact-diagonalization kernel for the Nicolai supersymmetric fermion
//! lattice model.
//!
//! Everything here is pure computation over finite Fock spaces and needs only
//! `alloc`. File formats, the CLI and parallel drivers live in the `nicolai`
//! crate.
//!
//! Layers, bottom up:
//!
//! * [`lattice`]: chains, rings and tori with a fixed linear site order.
//! * [`fock`] and [`sparse`]: CAR action of monomials and sparse matrices.
//! * [`operator`]: formal sums of monomials with normal ordering.
//! * [`model`]: supercharge, Hamiltonian and symmetry maps.
//! * [`charges`] and [`transfer`]: conserved sequences, their operators and
//!   transfer-matrix counting.
//! * [`groundstates`]: classical supersymmetric ground configurations.
//! * [`dynamics`]: spectra, dephasing and Mazur gaps.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod charges;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod groundstates;
pub mod lattice;
pub mod model;
pub mod operator;
pub mod sparse;
pub mod transfer;

pub use error::{Error, Result};
pub use fock::{apply_monomial, enumerate_basis, monomial_to_sparse, Basis, BasisState, Factor, FermionMonomial, Kind, Parity, Scalar};
pub use lattice::{Boundary, Lattice, Site};
pub use model::{Model, ModelSpec, Variant};
pub use operator::OperatorSum;
pub use sparse::{anticommutator, commutator, graded_commutator, BasisShape, SparseOperator};
