//! Independent checks of measurements and dual certificates.

use std::fmt;
use std::str::FromStr;

use crate::hermlin::{hs_inner, partial_trace, CMatrix, HermOp, Subsystem};
use crate::states::DiscriminationInstance;

use super::exact::{rat_int, to_rat, Rat, RatMatrix};
use super::types::{CertificateForm, DualCertificate, Measurement, Mode};
use super::DiscrimError;

/// Relative eigenvalue tolerance for certificate conditions.
pub const CERTIFICATE_TOL: f64 = 1e-9;
/// Largest accepted `‖Σ_a P_a − 1‖∞`.
pub const COMPLETENESS_TOL: f64 = 1e-9;
/// Largest accepted `⟨P_i, ρ_j⟩`, `i ≠ j`, for an unambiguous measurement.
pub const UNAMBIGUOUS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Float,
    Exact,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Float => "float",
            Backend::Exact => "exact",
        })
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "float" => Ok(Backend::Float),
            "exact" => Ok(Backend::Exact),
            _ => Err(format!("unknown backend {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateCheck {
    pub form: CertificateForm,
    pub backend: Backend,
    /// `Tr(Y)/k`.
    pub bound: f64,
    /// `Tr(Y)/k` as an exact fraction (exact backend).
    pub exact_bound: Option<String>,
    /// Smallest eigenvalue of each dual condition, in floating point.
    pub condition_min_eigs: Vec<f64>,
    /// Smallest eigenvalue of each `Q_j`.
    pub q_min_eigs: Vec<f64>,
    /// Names of the conditions that fail.
    pub failures: Vec<String>,
    pub valid: bool,
}

#[derive(Debug, Clone, Copy)]
enum Term {
    Y,
    Rho(usize),
    TaRho(usize),
    TaQ(usize),
}

struct Condition {
    label: String,
    terms: Vec<(Coef, Term)>,
}

/// A coefficient known both as a float and, where representable, exactly.
#[derive(Debug, Clone, Copy)]
enum Coef {
    One,
    MinusOne,
    Weight(usize, f64),
    Free(f64),
}

impl Coef {
    fn value(&self) -> f64 {
        match *self {
            Coef::One => 1.0,
            Coef::MinusOne => -1.0,
            Coef::Weight(_, w) => -w,
            Coef::Free(v) => v,
        }
    }
}

/// `k p_j`, exactly 1 for uniform priors.
fn weights(inst: &DiscriminationInstance) -> (bool, Vec<f64>) {
    let p = inst.priors();
    let uniform = p.iter().all(|&x| x == p[0]);
    let k = inst.k() as f64;
    (
        uniform,
        p.iter()
            .map(|&x| if uniform { 1.0 } else { k * x })
            .collect(),
    )
}

fn conditions(inst: &DiscriminationInstance, cert: &DualCertificate) -> Vec<Condition> {
    let (_, w) = weights(inst);
    let k = inst.k();
    match cert.form {
        CertificateForm::Dual3 => (0..k)
            .map(|j| Condition {
                label: format!("Y - w{0} T_A(rho{0})", j + 1),
                terms: vec![
                    (Coef::One, Term::Y),
                    (Coef::Weight(j, w[j]), Term::TaRho(j)),
                ],
            })
            .collect(),
        CertificateForm::Dual2 => (0..k)
            .map(|j| Condition {
                label: format!("Y - w{0} rho{0} - T_A(Q{0})", j + 1),
                terms: vec![
                    (Coef::One, Term::Y),
                    (Coef::Weight(j, w[j]), Term::Rho(j)),
                    (Coef::MinusOne, Term::TaQ(j)),
                ],
            })
            .collect(),
        CertificateForm::Dual5 => {
            let mut out: Vec<Condition> = (0..k)
                .map(|j| {
                    let mut terms = vec![
                        (Coef::One, Term::Y),
                        (Coef::Weight(j, w[j]), Term::Rho(j)),
                        (Coef::MinusOne, Term::TaQ(j)),
                    ];
                    for i in (0..k).filter(|&i| i != j) {
                        let y = cert.y_offdiag[i][j];
                        if y != 0.0 {
                            terms.push((Coef::Free(y), Term::Rho(i)));
                        }
                    }
                    Condition {
                        label: format!("Y - w{0} rho{0} + sum_i y_i{0} rho_i - T_A(Q{0})", j + 1),
                        terms,
                    }
                })
                .collect();
            out.push(Condition {
                label: format!("Y - T_A(Q{})", k + 1),
                terms: vec![(Coef::One, Term::Y), (Coef::MinusOne, Term::TaQ(k))],
            });
            out
        }
    }
}

fn check_shape(inst: &DiscriminationInstance, cert: &DualCertificate) -> Result<(), DiscrimError> {
    let k = inst.k();
    let bad = |msg: String| Err(DiscrimError::MalformedCertificate(msg));
    let fits = |h: &HermOp| h.dim_a() == inst.dim_a() && h.dim_b() == inst.dim_b();
    if !fits(&cert.y) {
        return bad(format!(
            "Y has dimensions {}x{}",
            cert.y.dim_a(),
            cert.y.dim_b()
        ));
    }
    let want_q = match cert.form {
        CertificateForm::Dual3 => 0,
        CertificateForm::Dual2 => k,
        CertificateForm::Dual5 => k + 1,
    };
    if cert.q.len() != want_q {
        return bad(format!(
            "{} certificate needs {want_q} Q operators, got {}",
            cert.form.as_str(),
            cert.q.len()
        ));
    }
    if let Some(j) = cert.q.iter().position(|q| !fits(q)) {
        return bad(format!("Q{} has the wrong dimensions", j + 1));
    }
    if cert.form == CertificateForm::Dual5 {
        if cert.y_offdiag.len() != k || cert.y_offdiag.iter().any(|r| r.len() != k) {
            return bad(format!("y_offdiag must be {k}x{k}"));
        }
        if cert.y_offdiag.iter().flatten().any(|v| !v.is_finite()) {
            return bad("y_offdiag has non-finite entries".into());
        }
    }
    let finite = |h: &HermOp| {
        h.matrix()
            .data()
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    };
    if !finite(&cert.y) || !cert.q.iter().all(finite) {
        return bad("non-finite operator entries".into());
    }
    Ok(())
}

fn float_term(inst: &DiscriminationInstance, cert: &DualCertificate, t: Term) -> HermOp {
    match t {
        Term::Y => cert.y.clone(),
        Term::Rho(i) => inst.states()[i].clone(),
        Term::TaRho(i) => inst.states()[i].partial_transpose(),
        Term::TaQ(j) => cert.q[j].partial_transpose(),
    }
}

fn float_condition(inst: &DiscriminationInstance, cert: &DualCertificate, c: &Condition) -> HermOp {
    let n = inst.order();
    let mut m = CMatrix::zeros(n, n);
    for &(coef, term) in &c.terms {
        let h = float_term(inst, cert, term);
        let a = coef.value();
        for (dst, src) in m.data_mut().iter_mut().zip(h.matrix().data()) {
            *dst += src * a;
        }
    }
    HermOp::from_hermitian_part(inst.dim_a(), inst.dim_b(), &m)
        .expect("combination of Hermitian operators")
}

fn relative_ok(h: &HermOp, lmin: f64) -> bool {
    lmin >= -CERTIFICATE_TOL * h.max_norm().max(1.0)
}

struct ExactTerms {
    y: RatMatrix,
    rho: Vec<RatMatrix>,
    ta_rho: Vec<RatMatrix>,
    ta_q: Vec<RatMatrix>,
    q: Vec<RatMatrix>,
}

fn exact_coef(inst: &DiscriminationInstance, uniform: bool, c: Coef) -> Result<Rat, DiscrimError> {
    Ok(match c {
        Coef::One => rat_int(1),
        Coef::MinusOne => rat_int(-1),
        Coef::Weight(j, _) => {
            if uniform {
                rat_int(-1)
            } else {
                -(to_rat(inst.priors()[j])? * rat_int(inst.k() as i64))
            }
        }
        Coef::Free(v) => to_rat(v)?,
    })
}

/// Checks `cert` against `inst`: every dual condition and every `Q_j` must
/// be PSD. The float backend accepts eigenvalues down to
/// `−CERTIFICATE_TOL·max(1, ‖M‖∞)`; the exact backend decides PSD-ness of
/// the rational matrices the float entries denote.
pub fn verify_certificate(
    inst: &DiscriminationInstance,
    cert: &DualCertificate,
    backend: Backend,
) -> Result<CertificateCheck, DiscrimError> {
    check_shape(inst, cert)?;
    let conds = conditions(inst, cert);
    let mut failures = Vec::new();
    let mut condition_min_eigs = Vec::with_capacity(conds.len());
    let mut q_min_eigs = Vec::with_capacity(cert.q.len());
    let mut float_ok = Vec::new();
    for c in &conds {
        let m = float_condition(inst, cert, c);
        let l = m.min_eigval()?;
        condition_min_eigs.push(l);
        float_ok.push(relative_ok(&m, l));
    }
    let mut q_ok = Vec::new();
    for q in &cert.q {
        let l = q.min_eigval()?;
        q_min_eigs.push(l);
        q_ok.push(relative_ok(q, l));
    }
    let k = inst.k();
    let bound = cert.y.trace() / k as f64;
    let mut exact_bound = None;
    if backend == Backend::Exact {
        let (da, db) = (inst.dim_a(), inst.dim_b());
        let (uniform, _) = weights(inst);
        let y = RatMatrix::from_herm(&cert.y)?;
        let q = cert
            .q
            .iter()
            .map(RatMatrix::from_herm)
            .collect::<Result<Vec<_>, _>>()?;
        let rho = inst
            .states()
            .iter()
            .map(RatMatrix::from_herm)
            .collect::<Result<Vec<_>, _>>()?;
        let terms = ExactTerms {
            ta_rho: if cert.form == CertificateForm::Dual3 {
                rho.iter().map(|r| r.partial_transpose(da, db)).collect()
            } else {
                Vec::new()
            },
            ta_q: q.iter().map(|m| m.partial_transpose(da, db)).collect(),
            y,
            rho,
            q,
        };
        for (slot, c) in float_ok.iter_mut().zip(&conds) {
            let mut m = RatMatrix::zeros(inst.order());
            for &(coef, term) in &c.terms {
                let a = exact_coef(inst, uniform, coef)?;
                let src = match term {
                    Term::Y => &terms.y,
                    Term::Rho(i) => &terms.rho[i],
                    Term::TaRho(i) => &terms.ta_rho[i],
                    Term::TaQ(j) => &terms.ta_q[j],
                };
                m.axpy(&a, src);
            }
            *slot = m.is_psd(da, db);
        }
        for (slot, qm) in q_ok.iter_mut().zip(&terms.q) {
            *slot = qm.is_psd(da, db);
        }
        let tr = terms.y.trace() / rat_int(k as i64);
        exact_bound = Some(tr.to_string());
    }
    for (c, ok) in conds.iter().zip(&float_ok) {
        if !ok {
            failures.push(c.label.clone());
        }
    }
    for (j, ok) in q_ok.iter().enumerate() {
        if !ok {
            failures.push(format!("Q{} >= 0", j + 1));
        }
    }
    Ok(CertificateCheck {
        form: cert.form,
        backend,
        bound,
        exact_bound,
        condition_min_eigs,
        q_min_eigs,
        valid: failures.is_empty(),
        failures,
    })
}

/// Rewrites a dual3 certificate as an equivalent dual2 one with the same
/// trace: `Y₂ = T_A(Y₃)` and `Q_j = Y₃ − w_j T_A(ρ_j)`, so that every dual2
/// condition is exactly zero.
pub fn dual3_to_dual2(
    inst: &DiscriminationInstance,
    cert: &DualCertificate,
) -> Result<DualCertificate, DiscrimError> {
    if cert.form != CertificateForm::Dual3 {
        return Err(DiscrimError::MalformedCertificate(format!(
            "expected a dual3 certificate, got {}",
            cert.form.as_str()
        )));
    }
    check_shape(inst, cert)?;
    let (_, w) = weights(inst);
    let q = inst
        .states()
        .iter()
        .zip(&w)
        .map(|(rho, &wj)| cert.y.sub(&rho.partial_transpose().scale(wj)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DualCertificate::dual2(cert.y.partial_transpose(), q))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementCheck {
    /// `Σ_j p_j ⟨P_j, ρ_j⟩`.
    pub success: f64,
    pub per_state: Vec<f64>,
    pub completeness_defect: f64,
    pub min_eig: f64,
    /// Smallest eigenvalue over all `T_A(P_a)`; `None` when PPT-ness is
    /// not claimed.
    pub min_pt_eig: Option<f64>,
    /// `max_{i≠j} ⟨P_i, ρ_j⟩` (unambiguous only).
    pub max_error_overlap: Option<f64>,
    /// `Σ_j p_j ⟨P_{k+1}, ρ_j⟩` (unambiguous only).
    pub inconclusive: Option<f64>,
    pub valid: bool,
}

/// Checks a POVM and evaluates its success probability.
pub fn verify_measurement(
    inst: &DiscriminationInstance,
    meas: &Measurement,
    mode: Mode,
) -> Result<MeasurementCheck, DiscrimError> {
    let k = inst.k();
    let want = if mode == Mode::Unambiguous { k + 1 } else { k };
    if meas.operators.len() != want {
        return Err(DiscrimError::MalformedMeasurement(format!(
            "{mode} measurement needs {want} operators, got {}",
            meas.operators.len()
        )));
    }
    if let Some(a) = meas
        .operators
        .iter()
        .position(|p| p.dim_a() != inst.dim_a() || p.dim_b() != inst.dim_b())
    {
        return Err(DiscrimError::MalformedMeasurement(format!(
            "operator {} has the wrong dimensions",
            a + 1
        )));
    }
    let mut sum = HermOp::zeros(inst.dim_a(), inst.dim_b());
    let mut min_eig = f64::INFINITY;
    let mut min_pt = f64::INFINITY;
    for p in &meas.operators {
        sum = sum.add(p)?;
        min_eig = min_eig.min(p.min_eigval()?);
        if meas.ppt {
            min_pt = min_pt.min(p.partial_transpose().min_eigval()?);
        }
    }
    let completeness_defect = sum.max_abs_diff(&HermOp::identity(inst.dim_a(), inst.dim_b()))?;
    let per_state = (0..k)
        .map(|j| hs_inner(&meas.operators[j], &inst.states()[j]))
        .collect::<Result<Vec<_>, _>>()?;
    let success = per_state
        .iter()
        .zip(inst.priors())
        .map(|(s, p)| s * p)
        .sum();
    let (max_error_overlap, inconclusive) = if mode == Mode::Unambiguous {
        let mut worst: f64 = 0.0;
        for i in 0..k {
            for j in (0..k).filter(|&j| j != i) {
                worst = worst.max(hs_inner(&meas.operators[i], &inst.states()[j])?);
            }
        }
        let inc = (0..k)
            .map(|j| Ok(inst.priors()[j] * hs_inner(&meas.operators[k], &inst.states()[j])?))
            .sum::<Result<f64, DiscrimError>>()?;
        (Some(worst), Some(inc))
    } else {
        (None, None)
    };
    let min_pt_eig = meas.ppt.then_some(min_pt);
    let valid = completeness_defect <= COMPLETENESS_TOL
        && min_eig >= -CERTIFICATE_TOL
        && min_pt_eig.map_or(true, |l| l >= -CERTIFICATE_TOL)
        && max_error_overlap.map_or(true, |o| o <= UNAMBIGUOUS_TOL);
    Ok(MeasurementCheck {
        success,
        per_state,
        completeness_defect,
        min_eig,
        min_pt_eig,
        max_error_overlap,
        inconclusive,
        valid,
    })
}

/// Tolerance for purity and maximal-entanglement tests.
const THEOREM1_TOL: f64 = 1e-9;

/// `d/k` when every state is a maximally entangled pure state on
/// `C^d ⊗ C^d`: no PPT measurement then succeeds with probability above
/// `d/k` for uniform priors. `None` when the hypothesis fails.
pub fn theorem1_bound(inst: &DiscriminationInstance) -> Option<f64> {
    let d = inst.dim_a();
    if d != inst.dim_b() {
        return None;
    }
    let p = inst.priors();
    if p.iter().any(|&x| (x - p[0]).abs() > 1e-12) {
        return None;
    }
    let target = CMatrix::identity(d).scale(1.0 / d as f64);
    for rho in inst.states() {
        let purity = hs_inner(rho, rho).ok()?;
        if (purity - 1.0).abs() > THEOREM1_TOL {
            return None;
        }
        for over in [Subsystem::A, Subsystem::B] {
            if partial_trace(rho, over).max_abs_diff(&target).ok()? > THEOREM1_TOL {
                return None;
            }
        }
    }
    Some(d as f64 / inst.k() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermlin::Complex64;
    use crate::states::{example_set, ExampleSet};

    fn ket(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn theorem1_applicability() {
        let bell = example_set(ExampleSet::BellBasis).unwrap();
        assert_eq!(theorem1_bound(&bell), Some(0.5));
        let yde4 = example_set(ExampleSet::Yde4).unwrap();
        assert_eq!(theorem1_bound(&yde4), Some(1.0));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mixed = DiscriminationInstance::from_kets(
            2,
            2,
            &[ket(&[1.0, 0.0, 0.0, 0.0]), ket(&[0.0, h, h, 0.0])],
            None,
            None,
        )
        .unwrap();
        assert_eq!(theorem1_bound(&mixed), None);
    }

    #[test]
    fn malformed_certificates_are_rejected() {
        let inst = example_set(ExampleSet::BellBasis).unwrap();
        let wrong_dims = DualCertificate::dual3(HermOp::identity(2, 1));
        assert!(matches!(
            verify_certificate(&inst, &wrong_dims, Backend::Float),
            Err(DiscrimError::MalformedCertificate(_))
        ));
        let missing_q = DualCertificate::dual2(HermOp::identity(2, 2), vec![]);
        assert!(verify_certificate(&inst, &missing_q, Backend::Float).is_err());
        let mut nan = HermOp::identity(2, 2).into_matrix();
        nan[(0, 0)] = Complex64::new(f64::NAN, 0.0);
        let nan = DualCertificate::dual3(HermOp::from_hermitian_part(2, 2, &nan).unwrap());
        assert!(verify_certificate(&inst, &nan, Backend::Float).is_err());
    }

    #[test]
    fn too_small_y_fails_with_named_condition() {
        let inst = example_set(ExampleSet::BellBasis).unwrap();
        let cert = DualCertificate::dual3(HermOp::identity(2, 2).scale(0.4));
        assert!(matches!(
            verify_certificate(&inst, &cert, Backend::Exact),
            Err(DiscrimError::Exact(_))
        ));
        let inst = example_set(ExampleSet::BellBasis).unwrap();
        let cert = DualCertificate::dual3(HermOp::identity(2, 2).scale(0.375));
        for backend in [Backend::Float, Backend::Exact] {
            let chk = verify_certificate(&inst, &cert, backend).unwrap();
            assert!(!chk.valid);
            assert_eq!(chk.failures.len(), 4);
            assert!(chk.failures[0].contains("T_A(rho1)"));
        }
    }

    #[test]
    fn measurement_checks() {
        let inst = example_set(ExampleSet::BellBasis).unwrap();
        // Projective Bell measurement: perfect but not PPT.
        let ops: Vec<HermOp> = inst.states().to_vec();
        let global = Measurement {
            operators: ops.clone(),
            ppt: false,
        };
        let chk = verify_measurement(&inst, &global, Mode::MinError).unwrap();
        assert!(chk.valid && (chk.success - 1.0).abs() < 1e-15);
        let claimed = Measurement {
            operators: ops,
            ppt: true,
        };
        let chk = verify_measurement(&inst, &claimed, Mode::MinError).unwrap();
        assert!(!chk.valid);
        assert!((chk.min_pt_eig.unwrap() + 0.5).abs() < 1e-12);
        let short = Measurement {
            operators: vec![HermOp::identity(2, 2)],
            ppt: false,
        };
        assert!(verify_measurement(&inst, &short, Mode::MinError).is_err());
        // An operator with support on another state breaks unambiguity.
        let mut ub = vec![HermOp::zeros(2, 2); 4];
        ub[0] = HermOp::identity(2, 2);
        ub.push(HermOp::zeros(2, 2));
        let chk = verify_measurement(
            &inst,
            &Measurement {
                operators: ub,
                ppt: true,
            },
            Mode::Unambiguous,
        )
        .unwrap();
        assert!(!chk.valid && (chk.max_error_overlap.unwrap() - 1.0).abs() < 1e-12);
    }
}
