//! Bipartite state sets: Bell and lattice states, generalized Bell states,
//! the Bell-basis dephasing map and the builtin examples.
//!
//! Lattice states on `t` qubit pairs are stored in canonical ordering
//! `A₁…A_t : B₁…B_t`, pair 1 most significant.

mod bell;
mod dephase;
mod examples;
mod instance;

use thiserror::Error;

use crate::hermlin::LinalgError;

pub use bell::{
    bell_density, bell_transpose_index, bell_vector, generalized_bell_vector,
    interleaved_to_canonical, is_maximally_entangled, lattice_density, lattice_ket,
    lattice_ket_support, lattice_operator, pauli, BellIndex, GeneralizedBellSpec, LatticeVector,
};
pub use dephase::{
    dephase_bell, lattice_coefficients, lattice_diagonal, lattice_sign, parity_set, qubit_pairs,
};
pub use examples::{
    example_set, pow2_vectors, ExampleSet, GBELL5, GBELL6, LATTICE8, LATTICE8_SHIFTED,
    LATTICE8_WRAPPED, POW2_MAX_N, YDE4,
};
pub use instance::{DiscriminationInstance, ORTHOGONALITY_TOL, PRIOR_SUM_TOL, TRACE_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("Bell index {0} out of range 0..4")]
    BellIndexOutOfRange(usize),
    #[error("Pauli index {0} out of range 0..4")]
    PauliIndexOutOfRange(usize),
    #[error("invalid generalized Bell label d={d}, a={a}, b={b}")]
    InvalidGeneralizedBell { d: usize, a: usize, b: usize },
    #[error("lattice vector must have at least one pair")]
    EmptyLatticeVector,
    #[error("expected 4^{t} lattice coefficients, got {len}")]
    LatticeCoefficients { t: usize, len: usize },
    #[error("local dimensions differ ({dim_a} vs {dim_b})")]
    UnequalDimensions { dim_a: usize, dim_b: usize },
    #[error("vector has length {got}, expected {expected}")]
    VectorLength { expected: usize, got: usize },
    #[error("local dimensions {dim_a}x{dim_b} are not equal powers of two")]
    NotPowerOfTwo { dim_a: usize, dim_b: usize },
    #[error("instance has no states")]
    EmptyInstance,
    #[error("state {index} has dimensions {dim_a}x{dim_b}")]
    StateDimensions {
        index: usize,
        dim_a: usize,
        dim_b: usize,
    },
    #[error("state {index} has trace (or norm) {value}, expected 1")]
    NotNormalized { index: usize, value: f64 },
    #[error("state {index} is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPositive { index: usize, min_eig: f64 },
    #[error("states {i} and {j} are not orthogonal (overlap {overlap:e})")]
    NotOrthogonal { i: usize, j: usize, overlap: f64 },
    #[error("lattice vectors have different lengths")]
    MixedLatticeLength,
    #[error("expected {expected} priors, got {got}")]
    PriorCount { expected: usize, got: usize },
    #[error("invalid priors: {0}")]
    InvalidPriors(String),
    #[error("expected {expected} labels, got {got}")]
    LabelCount { expected: usize, got: usize },
    #[error("unknown example set {0:?}")]
    UnknownExample(String),
    #[error("pow2(n) needs n >= 3, got {0}")]
    Pow2TooSmall(usize),
    #[error("pow2(n) supports n <= {max}, got {0}", max = POW2_MAX_N)]
    Pow2TooLarge(usize),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
