//! End-to-end solve: program construction, interior-point solve, repair of
//! the returned points, independent verification and the duality chain.

use log::{debug, info};

use crate::conic::{solve, ConicProblem, ConicSolution, SolveStatus, SolverOptions};
use crate::hermlin::HermOp;
use crate::states::DiscriminationInstance;

use super::build::{build_eq3_bound, build_min_error, build_unambiguous};
use super::lattice::{
    lattice_eq3_bound, lattice_reduce, repair_lattice_certificate, verify_lattice_certificate,
    verify_lattice_measurement, LatticeCertificate, LatticeMeasurement, LATTICE_TOL,
};
use super::types::{CertificateForm, Cone, DualCertificate, Measurement, Mode};
use super::verify::{
    theorem1_bound, verify_certificate, verify_measurement, Backend, CertificateCheck,
    MeasurementCheck,
};
use super::DiscrimError;

/// Slack allowed in `α ≤ β ≤ β′`.
pub const CHAIN_TOL: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub solver: SolverOptions,
    /// Use the full semidefinite program even for lattice instances.
    pub force_sdp: bool,
    /// Also verify the certificate with exact rational arithmetic.
    pub exact: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            force_sdp: false,
            exact: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    LatticeLp,
    Sdp,
    ClosedForm,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::LatticeLp => "lattice_lp",
            Method::Sdp => "sdp",
            Method::ClosedForm => "closed_form",
        }
    }
}

/// A measurement in dense or lattice-coefficient representation.
#[derive(Debug, Clone, PartialEq)]
pub enum Povm {
    Dense(Measurement),
    Lattice(LatticeMeasurement),
}

/// A certificate in dense or lattice-coefficient representation.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    Dense(DualCertificate),
    Lattice(LatticeCertificate),
}

impl Povm {
    pub fn verify(
        &self,
        inst: &DiscriminationInstance,
        mode: Mode,
    ) -> Result<MeasurementCheck, DiscrimError> {
        match self {
            Povm::Dense(m) => verify_measurement(inst, m, mode),
            Povm::Lattice(m) => verify_lattice_measurement(inst, m, mode),
        }
    }
}

impl Certificate {
    pub fn form(&self) -> CertificateForm {
        match self {
            Certificate::Dense(c) => c.form,
            Certificate::Lattice(c) => c.form,
        }
    }

    pub fn verify(
        &self,
        inst: &DiscriminationInstance,
        backend: Backend,
    ) -> Result<CertificateCheck, DiscrimError> {
        match self {
            Certificate::Dense(c) => verify_certificate(inst, c, backend),
            Certificate::Lattice(c) => verify_lattice_certificate(inst, c, backend),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverDiagnostics {
    pub status: SolveStatus,
    pub iterations: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_min_eig: f64,
    pub rows: usize,
}

impl SolverDiagnostics {
    fn from_solution(p: &ConicProblem, s: &ConicSolution) -> Self {
        Self {
            status: s.status,
            iterations: s.iterations,
            primal_objective: s.primal_objective(),
            dual_objective: s.dual_objective(),
            gap: s.gap(),
            primal_residual: s.check.primal_residual,
            dual_min_eig: s.check.dual_min_eig,
            rows: p.num_rows(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub mode: Mode,
    pub cone: Cone,
    pub method: Method,
    pub status: SolveStatus,
    /// Verified success probability of the returned measurement.
    pub alpha: f64,
    /// Verified upper bound `Tr(Y)/k` of the returned certificate.
    pub beta: f64,
    /// Relaxed bound (PPT minimum-error only).
    pub beta_prime: Option<f64>,
    /// `d/k` for maximally entangled pure states.
    pub theorem1: Option<f64>,
    pub measurement: Povm,
    pub measurement_check: MeasurementCheck,
    pub certificate: Certificate,
    pub certificate_check: CertificateCheck,
    pub exact_check: Option<CertificateCheck>,
    pub eq3_certificate: Option<Certificate>,
    pub eq3_check: Option<CertificateCheck>,
    pub solver: SolverDiagnostics,
    pub eq3_solver: Option<SolverDiagnostics>,
}

impl SolveReport {
    /// Optimal status and every verification passing.
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
            && self.measurement_check.valid
            && self.certificate_check.valid
            && self.eq3_check.as_ref().map_or(true, |c| c.valid)
            && self.exact_check.as_ref().map_or(true, |c| c.valid)
    }

    /// `β − α`.
    pub fn gap(&self) -> f64 {
        self.beta - self.alpha
    }
}

fn run(
    p: &ConicProblem,
    opts: &SolverOptions,
    what: &str,
) -> Result<(ConicSolution, SolverDiagnostics), DiscrimError> {
    let mut sol = solve(p, opts)?;
    if matches!(
        sol.status,
        SolveStatus::Stalled | SolveStatus::NumericalError
    ) {
        // A trajectory that hugs the boundary can jam just short of the
        // target; shorter steps keep the iterates better centred.
        let retry = SolverOptions {
            step_fraction: opts.step_fraction.min(0.9),
            ..opts.clone()
        };
        debug!(
            "{what}: {} after {} iterations, retrying with shorter steps",
            sol.status, sol.iterations
        );
        let again = solve(p, &retry)?;
        if again.status == SolveStatus::Optimal {
            sol = again;
        }
    }
    let d = SolverDiagnostics::from_solution(p, &sol);
    info!(
        "{what}: {} after {} iterations, objective {:.12} / {:.12}",
        d.status, d.iterations, d.primal_objective, d.dual_objective
    );
    Ok((sol, d))
}

/// Adds `η_j·1` to each `Q_j` and then `δ·1` to `Y` so that the float
/// conditions hold.
fn repair_dense_certificate(
    inst: &DiscriminationInstance,
    cert: &mut DualCertificate,
) -> Result<(), DiscrimError> {
    let (da, db) = (inst.dim_a(), inst.dim_b());
    for q in cert.q.iter_mut() {
        let l = q.min_eigval()?;
        if l < 0.0 {
            *q = q.add(&HermOp::identity(da, db).scale(-l))?;
        }
    }
    let check = verify_certificate(inst, cert, Backend::Float)?;
    let worst = check
        .condition_min_eigs
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if worst < 0.0 {
        debug!("shifting Y by {:e}", -worst);
        cert.y = cert.y.add(&HermOp::identity(da, db).scale(-worst))?;
    }
    Ok(())
}

/// Hermitian part (already taken), completeness defect removed, then for
/// minimum-error measurements a convex mix with `1/k` large enough to
/// remove negative eigenvalues of every `P_j` and `T_A(P_j)`.
fn repair_dense_measurement(
    inst: &DiscriminationInstance,
    m: &mut Measurement,
    mode: Mode,
) -> Result<(), DiscrimError> {
    let (da, db) = (inst.dim_a(), inst.dim_b());
    let id = HermOp::identity(da, db);
    let mut sum = HermOp::zeros(da, db);
    for p in &m.operators {
        sum = sum.add(p)?;
    }
    let defect = sum.sub(&id)?;
    match mode {
        Mode::MinError => {
            let share = defect.scale(1.0 / m.operators.len() as f64);
            for p in m.operators.iter_mut() {
                *p = p.sub(&share)?;
            }
            let mut lambda = f64::INFINITY;
            for p in &m.operators {
                lambda = lambda.min(p.min_eigval()?);
                if m.ppt {
                    lambda = lambda.min(p.partial_transpose().min_eigval()?);
                }
            }
            if lambda < 0.0 {
                let inv_k = 1.0 / m.operators.len() as f64;
                let eps = -lambda / (inv_k - lambda);
                debug!("mixing measurement with 1/k, weight {eps:e}");
                for p in m.operators.iter_mut() {
                    *p = p.scale(1.0 - eps).add(&id.scale(eps * inv_k))?;
                }
            }
        }
        Mode::Unambiguous => {
            let last = m.operators.len() - 1;
            m.operators[last] = m.operators[last].sub(&defect)?;
        }
    }
    Ok(())
}

/// The relaxed bound: closed form for lattice instances, otherwise its
/// semidefinite program. The certificate is repaired and verified.
pub fn eq3_bound(
    inst: &DiscriminationInstance,
    opts: &SolveOptions,
) -> Result<(Certificate, CertificateCheck, Option<SolverDiagnostics>), DiscrimError> {
    if !opts.force_sdp && inst.lattice_coefficients(LATTICE_TOL).is_some() {
        let (_, cert) = lattice_eq3_bound(inst)?;
        let cert = Certificate::Lattice(cert);
        let check = cert.verify(inst, Backend::Float)?;
        return Ok((cert, check, None));
    }
    let built = build_eq3_bound(inst);
    let (sol, diag) = run(&built.problem, &opts.solver, "relaxed bound")?;
    let mut cert = built.certificate(&sol);
    repair_dense_certificate(inst, &mut cert)?;
    let cert = Certificate::Dense(cert);
    let check = cert.verify(inst, Backend::Float)?;
    Ok((cert, check, Some(diag)))
}

/// Solves the discrimination problem and verifies both sides.
pub fn solve_instance(
    inst: &DiscriminationInstance,
    mode: Mode,
    cone: Cone,
    opts: &SolveOptions,
) -> Result<SolveReport, DiscrimError> {
    let lattice = !opts.force_sdp && inst.lattice_coefficients(LATTICE_TOL).is_some();
    let (method, measurement, certificate, solver) = if lattice {
        let lp = lattice_reduce(inst, mode, cone)?;
        let (sol, diag) = run(&lp.problem, &opts.solver, "lattice program")?;
        let meas = lp.measurement(&sol);
        let mut cert = lp.certificate(&sol)?;
        repair_lattice_certificate(inst, &mut cert)?;
        (
            Method::LatticeLp,
            Povm::Lattice(meas),
            Certificate::Lattice(cert),
            diag,
        )
    } else {
        let built = match mode {
            Mode::MinError => build_min_error(inst, cone),
            Mode::Unambiguous => build_unambiguous(inst, cone),
        };
        let (sol, diag) = run(&built.problem, &opts.solver, "discrimination program")?;
        let mut meas = built.measurement(&sol)?;
        repair_dense_measurement(inst, &mut meas, mode)?;
        let mut cert = built.certificate(&sol);
        repair_dense_certificate(inst, &mut cert)?;
        (
            Method::Sdp,
            Povm::Dense(meas),
            Certificate::Dense(cert),
            diag,
        )
    };
    let measurement_check = measurement.verify(inst, mode)?;
    let certificate_check = certificate.verify(inst, Backend::Float)?;
    let exact_check = if opts.exact {
        Some(certificate.verify(inst, Backend::Exact)?)
    } else {
        None
    };
    let (eq3_certificate, eq3_check, eq3_solver) = if mode == Mode::MinError && cone == Cone::Ppt {
        let (c, chk, d) = eq3_bound(inst, opts)?;
        (Some(c), Some(chk), d)
    } else {
        (None, None, None)
    };
    let alpha = measurement_check.success;
    let beta = certificate_check.bound;
    let beta_prime = eq3_check.as_ref().map(|c| c.bound);
    let status = solver.status;
    let report = SolveReport {
        mode,
        cone,
        method,
        status,
        alpha,
        beta,
        beta_prime,
        theorem1: theorem1_bound(inst),
        measurement,
        measurement_check,
        certificate,
        certificate_check,
        exact_check,
        eq3_certificate,
        eq3_check,
        solver,
        eq3_solver,
    };
    if report.measurement_check.valid && report.certificate_check.valid {
        if alpha > beta + CHAIN_TOL {
            return Err(DiscrimError::ChainViolation(format!(
                "alpha {alpha} exceeds beta {beta}"
            )));
        }
        if let (Some(bp), Some(true)) = (beta_prime, report.eq3_check.as_ref().map(|c| c.valid)) {
            if beta > bp + CHAIN_TOL {
                return Err(DiscrimError::ChainViolation(format!(
                    "beta {beta} exceeds relaxed bound {bp}"
                )));
            }
        }
    }
    Ok(report)
}
