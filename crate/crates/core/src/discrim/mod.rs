//! PPT discrimination programs: builders, the lattice linear program,
//! analytic bounds, certificate and measurement verification.
//!
//! Priors enter every program through the weights `k·p_j`, so for uniform
//! priors the dual constraints read `Y − ρ_j − T_A(Q_j) ⪰ 0` and all bounds
//! are `Tr(Y)/k`.

mod basis;
mod build;
mod exact;
mod face;
mod fixtures;
mod lattice;
mod report;
mod types;
mod verify;

use thiserror::Error;

use crate::conic::{ConicError, SolveStatus};
use crate::hermlin::LinalgError;
use crate::states::StateError;

pub use build::{build_eq3_bound, build_min_error, build_unambiguous, BuiltProblem};
pub use exact::{exact_is_psd, ExactError, MAX_DENOMINATOR_BITS};
pub use fixtures::{
    theorem1_certificate, theorem3_certificate, theorem4_measurement, theorem5_certificate,
    theorem6_certificate, theorem6_corrected, theorem6_with_labels, uniform_measurement,
    Theorem6Reading,
};
pub use lattice::{
    instance_coefficients, lattice_eq3_bound, lattice_reduce, repair_lattice_certificate,
    sign_matrix, transpose_coefficients, verify_lattice_certificate, verify_lattice_measurement,
    LatticeCertificate, LatticeMeasurement, LatticeProgram, LATTICE_TOL,
};
pub use report::{
    eq3_bound, solve_instance, Certificate, Method, Povm, SolveOptions, SolveReport,
    SolverDiagnostics, CHAIN_TOL,
};
pub use types::{CertificateForm, Cone, DualCertificate, Measurement, Mode};
pub use verify::{
    dual3_to_dual2, theorem1_bound, verify_certificate, verify_measurement, Backend,
    CertificateCheck, MeasurementCheck, CERTIFICATE_TOL, COMPLETENESS_TOL, UNAMBIGUOUS_TOL,
};

#[derive(Debug, Error)]
pub enum DiscrimError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Conic(#[from] ConicError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("instance is not made of lattice-diagonal states")]
    NotLattice,
    #[error("malformed certificate: {0}")]
    MalformedCertificate(String),
    #[error("malformed measurement: {0}")]
    MalformedMeasurement(String),
    #[error("solver returned status {status} for {program}")]
    NotOptimal {
        status: SolveStatus,
        program: String,
    },
    #[error("weak duality chain violated: {0}")]
    ChainViolation(String),
}
