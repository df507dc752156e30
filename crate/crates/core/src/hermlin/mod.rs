//! Dense complex linear algebra for bipartite Hermitian operators.
//!
//! Bipartite indices are always ordered with Alice's factor outer and Bob's
//! inner: basis vector `|i⟩⊗|k⟩` sits at position `i·dim_b + k`.

mod eigen;
mod herm;
mod matrix;

use thiserror::Error;

pub use eigen::{
    herm_eigh, herm_eigvals, real_embedding, reconstruct, sym_eigen, sym_eigvals, SymEigen,
};
pub use herm::{
    eigvals_hermitian, hs_inner, is_psd, partial_trace, partial_trace_matrix, partial_transpose,
    partial_transpose_matrix, trace_inner, HermOp, Subsystem, HERMITICITY_TOL, PSD_TOL,
};
pub use matrix::{inner, kron, kron_vec, vec_norm, CMatrix, I, ONE, ZERO};

pub use num_complex::Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("dimension overflow: {0}")]
    Overflow(String),
    #[error("matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("inner product of Hermitian operators has imaginary residue {0:e}")]
    ImaginaryResidue(f64),
    #[error("eigensolver did not converge for order {order}")]
    NoConvergence { order: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
}
