//! Lattice-diagonal instances on `t` qubit pairs.
//!
//! When every state is diagonal in the lattice basis `{ψ_w}`, twirling
//! over local Pauli products maps any PPT measurement to one that is also
//! lattice diagonal with the same success probability, so the programs
//! collapse to linear programs over the coefficients `c_{a,w}` of
//! `P_a = Σ_w c_{a,w} ψ_w`. Partial transposition acts on coefficients by
//! the symmetric sign matrix `s(w, u)`.

use log::debug;
use num_complex::Complex64;

use crate::conic::{BlockKind, ConicProblem, ConicSolution, SparseHerm};
use crate::hermlin::HermOp;
use crate::states::{lattice_operator, DiscriminationInstance};

use super::exact::{rat_int, to_rat, Rat};
use super::face::{cone_face, dual_correction, Face};
use super::types::{CertificateForm, Cone, DualCertificate, Measurement, Mode};
use super::verify::{
    Backend, CertificateCheck, MeasurementCheck, CERTIFICATE_TOL, COMPLETENESS_TOL, UNAMBIGUOUS_TOL,
};
use super::DiscrimError;

/// Tolerance for reading lattice coefficients off dense states.
pub const LATTICE_TOL: f64 = 1e-12;

/// `s(w, u)` for all codes, row-major, so that `T_A(ψ_w) = Σ_u s(w,u) ψ_u`.
pub fn sign_matrix(t: usize) -> Vec<f64> {
    let n = 1usize << (2 * t);
    let mag = 1.0 / (1u64 << t) as f64;
    let mut out = vec![0.0; n * n];
    for w in 0..n {
        for u in 0..n {
            let (mut a, mut b, mut flips) = (w, u, 0);
            for _ in 0..t {
                if (b & 3) == TRANSPOSE_PARTNER[a & 3] {
                    flips += 1;
                }
                a >>= 2;
                b >>= 2;
            }
            out[w * n + u] = if flips % 2 == 0 { mag } else { -mag };
        }
    }
    out
}

const TRANSPOSE_PARTNER: [usize; 4] = [2, 3, 0, 1];

/// Coefficients of `T_A(Σ_w c_w ψ_w)`.
pub fn transpose_coefficients(t: usize, signs: &[f64], c: &[f64]) -> Vec<f64> {
    let n = 1usize << (2 * t);
    let mut out = vec![0.0; n];
    for (w, &cw) in c.iter().enumerate() {
        if cw != 0.0 {
            for (o, s) in out.iter_mut().zip(&signs[w * n..(w + 1) * n]) {
                *o += cw * s;
            }
        }
    }
    out
}

/// POVM `P_a = Σ_w coeffs[a][w] ψ_w`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeMeasurement {
    pub t: usize,
    pub coeffs: Vec<Vec<f64>>,
    pub ppt: bool,
}

/// Dual certificate with `Y = Σ_w y_w ψ_w` and `Q_j = Σ_u q[j][u] ψ_u`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeCertificate {
    pub form: CertificateForm,
    pub t: usize,
    pub y: Vec<f64>,
    pub q: Vec<Vec<f64>>,
    pub y_offdiag: Vec<Vec<f64>>,
}

impl LatticeMeasurement {
    pub fn to_dense(&self) -> Result<Measurement, DiscrimError> {
        let operators = self
            .coeffs
            .iter()
            .map(|c| lattice_operator(self.t, c))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Measurement {
            operators,
            ppt: self.ppt,
        })
    }
}

impl LatticeCertificate {
    pub fn to_dense(&self) -> Result<DualCertificate, DiscrimError> {
        let op = |c: &[f64]| -> Result<HermOp, DiscrimError> { Ok(lattice_operator(self.t, c)?) };
        let y = op(&self.y)?;
        let q = self
            .q
            .iter()
            .map(|c| op(c))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DualCertificate {
            form: self.form,
            y,
            q,
            y_offdiag: self.y_offdiag.clone(),
        })
    }

    pub fn bound(&self, k: usize) -> f64 {
        self.y.iter().sum::<f64>() / k as f64
    }
}

/// Lattice coefficients of the instance's states.
pub fn instance_coefficients(
    inst: &DiscriminationInstance,
) -> Result<(usize, Vec<Vec<f64>>), DiscrimError> {
    let (t, mut coeffs) = inst
        .lattice_coefficients(LATTICE_TOL)
        .ok_or(DiscrimError::NotLattice)?;
    for v in coeffs.iter_mut().flatten() {
        if v.abs() <= LATTICE_TOL {
            *v = 0.0;
        }
    }
    Ok((t, coeffs))
}

/// The linear program for a lattice instance plus the maps needed to read
/// the measurement and certificate back.
#[derive(Debug, Clone)]
pub struct LatticeProgram {
    pub problem: ConicProblem,
    pub mode: Mode,
    pub cone: Cone,
    pub t: usize,
    k: usize,
    weights: Vec<f64>,
    coeffs: Vec<Vec<f64>>,
    signs: Vec<f64>,
    /// Per outcome: the codes not ruled out by the zero-error conditions.
    allowed: Vec<Vec<usize>>,
    /// Per outcome: the face its coefficients were restricted to, if any
    /// coordinate was found to vanish identically.
    faces: Vec<Option<Face>>,
    /// Per conclusive outcome of a zero-error PPT program: the face of its
    /// cone, full or not, used to repair rounding in the extracted
    /// measurement.
    cones: Vec<Face>,
    /// Per outcome: block index (absent when every coefficient vanishes)
    /// and the codes its variables stand for.
    c_blocks: Vec<(Option<usize>, Vec<usize>)>,
    completeness: Vec<usize>,
    /// Per outcome and code `u`: the row tying `(S c)_u` to its slack.
    links: Vec<Vec<Option<usize>>>,
}

/// Builds the lattice linear program. For unambiguous discrimination the
/// variables `c_{i,w}` with `w` in the support of some `ρ_j`, `j ≠ i`, are
/// eliminated; the zero-error constraints then hold identically. Under the
/// PPT constraint, coordinates that vanish on the whole feasible cone of a
/// conclusive outcome are removed as well.
pub fn lattice_reduce(
    inst: &DiscriminationInstance,
    mode: Mode,
    cone: Cone,
) -> Result<LatticeProgram, DiscrimError> {
    let (t, coeffs) = instance_coefficients(inst)?;
    let n = 1usize << (2 * t);
    let k = inst.k();
    let signs = sign_matrix(t);
    let outcomes = if mode == Mode::Unambiguous { k + 1 } else { k };
    let allowed: Vec<Vec<usize>> = (0..outcomes)
        .map(|a| {
            (0..n)
                .filter(|&w| {
                    mode == Mode::MinError
                        || a == k
                        || (0..k).all(|j| j == a || coeffs[j][w] == 0.0)
                })
                .collect()
        })
        .collect();
    let mut faces = vec![None; outcomes];
    let mut cones = Vec::new();
    if mode == Mode::Unambiguous && cone == Cone::Ppt {
        for a in 0..k {
            let f = cone_face(n, &signs, &allowed[a])?;
            cones.push(f.clone());
            if !f.is_full(allowed[a].len()) {
                debug!(
                    "outcome {}: {} of {} coefficients and {} of {n} transposed coefficients vanish",
                    a + 1,
                    allowed[a].len() - f.codes.len(),
                    allowed[a].len(),
                    f.open.iter().filter(|&&o| !o).count()
                );
                faces[a] = Some(f);
            }
        }
    }
    let mut p = ConicProblem::new();
    let mut c_blocks = Vec::with_capacity(outcomes);
    for a in 0..outcomes {
        let codes = faces[a]
            .as_ref()
            .map_or_else(|| allowed[a].clone(), |f| f.codes.clone());
        let blk = (!codes.is_empty()).then(|| {
            let blk = p.add_block(BlockKind::Nonneg, codes.len(), format!("c{}", a + 1));
            if a < k {
                let mut obj = SparseHerm::new();
                for (pos, &w) in codes.iter().enumerate() {
                    obj.push(
                        pos,
                        pos,
                        Complex64::new(inst.priors()[a] * coeffs[a][w], 0.0),
                    );
                }
                p.set_objective(blk, obj);
            }
            blk
        });
        c_blocks.push((blk, codes));
    }
    let mut position = vec![vec![usize::MAX; n]; outcomes];
    for (a, (_, codes)) in c_blocks.iter().enumerate() {
        for (pos, &w) in codes.iter().enumerate() {
            position[a][w] = pos;
        }
    }
    let completeness = (0..n)
        .map(|w| {
            let terms = (0..outcomes)
                .filter(|&a| position[a][w] != usize::MAX)
                .map(|a| {
                    (
                        c_blocks[a].0.unwrap(),
                        SparseHerm::diagonal(position[a][w], 1.0),
                    )
                })
                .collect();
            p.add_row(terms, 1.0)
        })
        .collect();
    let mut links = Vec::new();
    if cone == Cone::Ppt {
        for a in 0..outcomes {
            let (cb, codes) = &c_blocks[a];
            let open: Vec<bool> = faces[a]
                .as_ref()
                .map_or_else(|| vec![true; n], |f| f.open.clone());
            let slacks: Vec<usize> = (0..n).filter(|&u| open[u]).collect();
            let z = (!slacks.is_empty())
                .then(|| p.add_block(BlockKind::Nonneg, slacks.len(), format!("z{}", a + 1)));
            // Rows whose transposed coefficient vanishes keep only the
            // equality `(S c)_u = 0`; dependent ones are dropped.
            let mut kept: Vec<Vec<f64>> = Vec::new();
            let mut rows = vec![None; n];
            for u in 0..n {
                let col: Vec<f64> = codes.iter().map(|&w| signs[w * n + u]).collect();
                let mut terms = Vec::new();
                if let Some(zb) = z.filter(|_| open[u]) {
                    let pos = slacks.binary_search(&u).unwrap();
                    terms.push((zb, SparseHerm::diagonal(pos, 1.0)));
                } else if cb.is_none() || !independent(&mut kept, col.clone()) {
                    continue;
                }
                if let Some(cb) = cb {
                    let mut sc = SparseHerm::new();
                    for (pos, &v) in col.iter().enumerate() {
                        sc.push(pos, pos, Complex64::new(-v, 0.0));
                    }
                    terms.push((*cb, sc));
                }
                rows[u] = Some(p.add_row(terms, 0.0));
            }
            links.push(rows);
        }
    }
    let kf = k as f64;
    let uniform = inst.priors().iter().all(|&x| x == inst.priors()[0]);
    let weights = inst
        .priors()
        .iter()
        .map(|&x| if uniform { 1.0 } else { kf * x })
        .collect();
    Ok(LatticeProgram {
        problem: p,
        mode,
        cone,
        t,
        k,
        weights,
        coeffs,
        signs,
        allowed,
        faces,
        cones,
        c_blocks,
        completeness,
        links,
    })
}

/// Gram–Schmidt step: appends `v` to `basis` if it is independent of it.
fn independent(basis: &mut Vec<Vec<f64>>, mut v: Vec<f64>) -> bool {
    let scale = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for b in basis.iter() {
        let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
        v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm <= 1e-9 * scale.max(f64::MIN_POSITIVE) {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    basis.push(v);
    true
}

impl LatticeProgram {
    fn n(&self) -> usize {
        1 << (2 * self.t)
    }

    /// Measurement coefficients, clipped at zero and renormalised so that
    /// `Σ_a c_{a,w} = 1` holds exactly.
    pub fn measurement(&self, sol: &ConicSolution) -> LatticeMeasurement {
        let n = self.n();
        let mut coeffs = vec![vec![0.0; n]; self.c_blocks.len()];
        for (a, (blk, codes)) in self.c_blocks.iter().enumerate() {
            let Some(blk) = blk else { continue };
            let x = sol.primal[*blk].as_diagonal().expect("nonnegative block");
            for (pos, &w) in codes.iter().enumerate() {
                coeffs[a][w] = x[pos].max(0.0);
            }
        }
        for w in 0..n {
            let total: f64 = coeffs.iter().map(|c| c[w]).sum();
            if total > 0.0 {
                for c in coeffs.iter_mut() {
                    c[w] /= total;
                }
            } else {
                let last = coeffs.len() - 1;
                coeffs[last][w] = 1.0;
            }
        }
        if self.cone == Cone::Ppt {
            self.repair(&mut coeffs);
        }
        LatticeMeasurement {
            t: self.t,
            coeffs,
            ppt: self.cone == Cone::Ppt,
        }
    }

    /// Clears the rounding left in `(S c)_u ≥ 0`. Minimum-error
    /// coefficients are mixed with the uniform measurement, whose transposed
    /// coefficients are all `1/k`. In the zero-error case each conclusive
    /// outcome is pushed towards the interior of its cone, and the outcomes
    /// are then mixed with the trivial measurement, which fixes the
    /// inconclusive one.
    fn repair(&self, coeffs: &mut [Vec<f64>]) {
        let n = self.n();
        let s_min = |c: &[f64]| {
            transpose_coefficients(self.t, &self.signs, c)
                .into_iter()
                .fold(f64::INFINITY, f64::min)
        };
        match self.mode {
            Mode::MinError => {
                let inv_k = 1.0 / coeffs.len() as f64;
                let lambda = coeffs.iter().map(|c| s_min(c)).fold(0.0, f64::min);
                if lambda < 0.0 {
                    let eps = -lambda / (inv_k - lambda);
                    debug!("mixing lattice measurement with 1/k, weight {eps:e}");
                    for x in coeffs.iter_mut().flatten() {
                        *x = (1.0 - eps) * *x + eps * inv_k;
                    }
                }
            }
            Mode::Unambiguous => {
                let k = self.k;
                for (c, face) in coeffs.iter_mut().zip(&self.cones) {
                    let on_face: Vec<bool> = (0..n).map(|w| face.codes.contains(&w)).collect();
                    // Back onto the span of the face: its codes, with the
                    // closed transposed coordinates at zero.
                    let mut basis = Vec::new();
                    for u in (0..n).filter(|&u| !face.open[u]) {
                        let row = (0..n)
                            .map(|w| {
                                if on_face[w] {
                                    self.signs[w * n + u]
                                } else {
                                    0.0
                                }
                            })
                            .collect();
                        independent(&mut basis, row);
                    }
                    let mut e = face.interior.clone();
                    for (w, x) in c.iter_mut().enumerate() {
                        if !on_face[w] {
                            *x = 0.0;
                        }
                    }
                    for v in [&mut *c, &mut e] {
                        for b in &basis {
                            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
                        }
                    }
                    // Then towards the interior until every open coordinate
                    // is nonnegative.
                    let tc = transpose_coefficients(self.t, &self.signs, c);
                    let te = transpose_coefficients(self.t, &self.signs, &e);
                    let delta = (0..n)
                        .filter(|&u| face.open[u])
                        .map(|u| -tc[u] / te[u])
                        .chain(face.codes.iter().map(|&w| -c[w] / e[w]))
                        .fold(0.0, f64::max);
                    if delta > 0.0 {
                        c.iter_mut().zip(&e).for_each(|(x, y)| *x += delta * y);
                    }
                }
                let rest = |coeffs: &[Vec<f64>]| -> Vec<f64> {
                    (0..n)
                        .map(|w| 1.0 - (0..k).map(|j| coeffs[j][w]).sum::<f64>())
                        .collect()
                };
                let last = rest(coeffs);
                let lambda = last.iter().copied().fold(s_min(&last), f64::min).min(0.0);
                if lambda < 0.0 {
                    let eps = -lambda / (1.0 - lambda);
                    debug!("mixing lattice measurement with the trivial one, weight {eps:e}");
                    for x in coeffs[..k].iter_mut().flatten() {
                        *x *= 1.0 - eps;
                    }
                }
                coeffs[k] = rest(coeffs);
            }
        }
    }

    /// Certificate from the multipliers, scaled by `k`, with `y_{i,j}`
    /// chosen (unambiguous case) to cover the conditions at eliminated
    /// codes. Outcomes restricted to a face get the correction of `Q` that
    /// restores the conditions of the removed coordinates. No repair
    /// beyond that.
    pub fn certificate(&self, sol: &ConicSolution) -> Result<LatticeCertificate, DiscrimError> {
        let n = self.n();
        let kf = self.k as f64;
        let y: Vec<f64> = self.completeness.iter().map(|&r| kf * sol.y[r]).collect();
        let outcomes = self.c_blocks.len();
        let mut q: Vec<Vec<f64>> = if self.cone == Cone::Ppt {
            self.links
                .iter()
                .map(|rows| {
                    rows.iter()
                        .map(|r| r.map_or(0.0, |r| kf * sol.y[r]))
                        .collect()
                })
                .collect()
        } else {
            vec![vec![0.0; n]; outcomes]
        };
        for (j, face) in self.faces.iter().enumerate() {
            let Some(face) = face else { continue };
            let tq = transpose_coefficients(self.t, &self.signs, &q[j]);
            let slack: Vec<f64> = (0..n)
                .map(|w| y[w] - self.weights[j] * self.coeffs[j][w] - tq[w])
                .collect();
            match dual_correction(n, &self.signs, &self.allowed[j], face, &q[j], &slack)? {
                Some(nu) => q[j].iter_mut().zip(&nu).for_each(|(a, b)| *a += b),
                None => debug!("outcome {}: no dual correction found", j + 1),
            }
        }
        Ok(match self.mode {
            Mode::MinError => LatticeCertificate {
                form: CertificateForm::Dual2,
                t: self.t,
                y,
                q,
                y_offdiag: Vec::new(),
            },
            Mode::Unambiguous => {
                let mut off = vec![vec![0.0; self.k]; self.k];
                for j in 0..self.k {
                    let tq = transpose_coefficients(self.t, &self.signs, &q[j]);
                    for i in (0..self.k).filter(|&i| i != j) {
                        let mut need: f64 = 0.0;
                        for w in 0..n {
                            let r = self.coeffs[i][w];
                            if r > 0.0 {
                                let cond = y[w] - self.weights[j] * self.coeffs[j][w] - tq[w];
                                need = need.max(-cond / r);
                            }
                        }
                        off[i][j] = need;
                    }
                }
                LatticeCertificate {
                    form: CertificateForm::Dual5,
                    t: self.t,
                    y,
                    q,
                    y_offdiag: off,
                }
            }
        })
    }
}

/// Closed form of the relaxed bound for lattice states: the constraints
/// `Y ⪰ w_j T_A(ρ_j)` are diagonal in the lattice basis, so
/// `Y = Σ_u max_j w_j (S r_j)_u ψ_u` is optimal.
pub fn lattice_eq3_bound(
    inst: &DiscriminationInstance,
) -> Result<(f64, LatticeCertificate), DiscrimError> {
    let (t, coeffs) = instance_coefficients(inst)?;
    let k = inst.k();
    let signs = sign_matrix(t);
    let uniform = inst.priors().iter().all(|&x| x == inst.priors()[0]);
    let n = 1usize << (2 * t);
    let mut y = vec![f64::NEG_INFINITY; n];
    for (j, r) in coeffs.iter().enumerate() {
        let w = if uniform {
            1.0
        } else {
            k as f64 * inst.priors()[j]
        };
        for (yu, tu) in y.iter_mut().zip(transpose_coefficients(t, &signs, r)) {
            *yu = yu.max(w * tu);
        }
    }
    let cert = LatticeCertificate {
        form: CertificateForm::Dual3,
        t,
        y,
        q: Vec::new(),
        y_offdiag: Vec::new(),
    };
    Ok((cert.bound(k), cert))
}

/// Adds `η·1` to every `Q_j` and then `δ·1` to `Y` so that all conditions
/// hold with a margin of zero in floating point.
pub fn repair_lattice_certificate(
    inst: &DiscriminationInstance,
    cert: &mut LatticeCertificate,
) -> Result<(), DiscrimError> {
    for q in cert.q.iter_mut() {
        let lo = q.iter().cloned().fold(f64::INFINITY, f64::min);
        if lo < 0.0 {
            q.iter_mut().for_each(|v| *v -= lo);
        }
    }
    let (worst, _) = lattice_conditions(inst, cert)?;
    if worst < 0.0 {
        cert.y.iter_mut().for_each(|v| *v -= worst);
    }
    Ok(())
}

/// Minimum over all condition coefficients and the per-condition minima.
fn lattice_conditions(
    inst: &DiscriminationInstance,
    cert: &LatticeCertificate,
) -> Result<(f64, Vec<f64>), DiscrimError> {
    let (t, coeffs) = instance_coefficients(inst)?;
    check_lattice_shape(inst, t, cert)?;
    let signs = sign_matrix(t);
    let k = inst.k();
    let w = weights(inst);
    let mut mins = Vec::new();
    match cert.form {
        CertificateForm::Dual3 => {
            for j in 0..k {
                let tr = transpose_coefficients(t, &signs, &coeffs[j]);
                mins.push(
                    cert.y
                        .iter()
                        .zip(&tr)
                        .map(|(y, r)| y - w[j] * r)
                        .fold(f64::INFINITY, f64::min),
                );
            }
        }
        CertificateForm::Dual2 | CertificateForm::Dual5 => {
            for j in 0..k {
                let tq = transpose_coefficients(t, &signs, &cert.q[j]);
                let mut cond: Vec<f64> = (0..cert.y.len())
                    .map(|u| cert.y[u] - w[j] * coeffs[j][u] - tq[u])
                    .collect();
                if cert.form == CertificateForm::Dual5 {
                    for i in (0..k).filter(|&i| i != j) {
                        let yij = cert.y_offdiag[i][j];
                        for (c, r) in cond.iter_mut().zip(&coeffs[i]) {
                            *c += yij * r;
                        }
                    }
                }
                mins.push(cond.into_iter().fold(f64::INFINITY, f64::min));
            }
            if cert.form == CertificateForm::Dual5 {
                let tq = transpose_coefficients(t, &signs, &cert.q[k]);
                mins.push(
                    cert.y
                        .iter()
                        .zip(&tq)
                        .map(|(y, q)| y - q)
                        .fold(f64::INFINITY, f64::min),
                );
            }
        }
    }
    Ok((mins.iter().cloned().fold(f64::INFINITY, f64::min), mins))
}

fn weights(inst: &DiscriminationInstance) -> Vec<f64> {
    let p = inst.priors();
    let uniform = p.iter().all(|&x| x == p[0]);
    p.iter()
        .map(|&x| if uniform { 1.0 } else { inst.k() as f64 * x })
        .collect()
}

fn check_lattice_shape(
    inst: &DiscriminationInstance,
    t: usize,
    cert: &LatticeCertificate,
) -> Result<(), DiscrimError> {
    let n = 1usize << (2 * t);
    let k = inst.k();
    let bad = |m: String| Err(DiscrimError::MalformedCertificate(m));
    if cert.t != t || cert.y.len() != n {
        return bad(format!(
            "lattice certificate for t={} does not fit t={t}",
            cert.t
        ));
    }
    let want_q = match cert.form {
        CertificateForm::Dual3 => 0,
        CertificateForm::Dual2 => k,
        CertificateForm::Dual5 => k + 1,
    };
    if cert.q.len() != want_q || cert.q.iter().any(|q| q.len() != n) {
        return bad(format!(
            "{} certificate needs {want_q} Q vectors of length {n}",
            cert.form.as_str()
        ));
    }
    if cert.form == CertificateForm::Dual5
        && (cert.y_offdiag.len() != k || cert.y_offdiag.iter().any(|r| r.len() != k))
    {
        return bad(format!("y_offdiag must be {k}x{k}"));
    }
    let finite = cert
        .y
        .iter()
        .chain(cert.q.iter().flatten())
        .chain(cert.y_offdiag.iter().flatten())
        .all(|v| v.is_finite());
    if !finite {
        return bad("non-finite certificate entries".into());
    }
    Ok(())
}

fn exact_lattice_valid(
    inst: &DiscriminationInstance,
    cert: &LatticeCertificate,
) -> Result<(bool, Vec<bool>, Rat), DiscrimError> {
    let (t, coeffs) = instance_coefficients(inst)?;
    let n = 1usize << (2 * t);
    let k = inst.k();
    let uniform = inst.priors().iter().all(|&x| x == inst.priors()[0]);
    let conv = |v: &[f64]| v.iter().map(|&x| to_rat(x)).collect::<Result<Vec<_>, _>>();
    let y = conv(&cert.y)?;
    let q = cert
        .q
        .iter()
        .map(|v| conv(v))
        .collect::<Result<Vec<_>, _>>()?;
    let r = coeffs
        .iter()
        .map(|v| conv(v))
        .collect::<Result<Vec<_>, _>>()?;
    let w: Vec<Rat> = inst
        .priors()
        .iter()
        .map(|&p| {
            if uniform {
                Ok(rat_int(1))
            } else {
                Ok(to_rat(p)? * rat_int(k as i64))
            }
        })
        .collect::<Result<_, DiscrimError>>()?;
    let denom = rat_int(1i64 << t);
    let signs = sign_matrix(t);
    let ta = |c: &[Rat]| -> Vec<Rat> {
        let mut out = vec![rat_int(0); n];
        for (wi, cw) in c.iter().enumerate() {
            if *cw != rat_int(0) {
                let scaled = cw / &denom;
                for (u, o) in out.iter_mut().enumerate() {
                    if signs[wi * n + u] > 0.0 {
                        *o += &scaled;
                    } else {
                        *o -= &scaled;
                    }
                }
            }
        }
        out
    };
    let zero = rat_int(0);
    let mut ok = Vec::new();
    match cert.form {
        CertificateForm::Dual3 => {
            for j in 0..k {
                let tr = ta(&r[j]);
                ok.push(y.iter().zip(&tr).all(|(a, b)| a - &w[j] * b >= zero));
            }
        }
        _ => {
            for j in 0..k {
                let tq = ta(&q[j]);
                let mut cond: Vec<Rat> =
                    (0..n).map(|u| &y[u] - &w[j] * &r[j][u] - &tq[u]).collect();
                if cert.form == CertificateForm::Dual5 {
                    for i in (0..k).filter(|&i| i != j) {
                        let yij = to_rat(cert.y_offdiag[i][j])?;
                        for (c, ri) in cond.iter_mut().zip(&r[i]) {
                            *c += &yij * ri;
                        }
                    }
                }
                ok.push(cond.iter().all(|c| *c >= zero));
            }
            if cert.form == CertificateForm::Dual5 {
                let tq = ta(&q[k]);
                ok.push(y.iter().zip(&tq).all(|(a, b)| a - b >= zero));
            }
        }
    }
    let q_ok: Vec<bool> = q.iter().map(|v| v.iter().all(|x| *x >= zero)).collect();
    let all = ok.iter().chain(&q_ok).all(|&b| b);
    let tr = y.iter().fold(rat_int(0), |acc, v| acc + v) / rat_int(k as i64);
    let mut flags = ok;
    flags.extend(q_ok);
    Ok((all, flags, tr))
}

/// Verifies a lattice certificate in coefficient space, where PSD-ness of a
/// lattice-diagonal operator is nonnegativity of its coefficients.
pub fn verify_lattice_certificate(
    inst: &DiscriminationInstance,
    cert: &LatticeCertificate,
    backend: Backend,
) -> Result<CertificateCheck, DiscrimError> {
    let (_, condition_min_eigs) = lattice_conditions(inst, cert)?;
    let q_min_eigs: Vec<f64> = cert
        .q
        .iter()
        .map(|q| q.iter().cloned().fold(f64::INFINITY, f64::min))
        .collect();
    let scale = cert
        .y
        .iter()
        .chain(cert.q.iter().flatten())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = -CERTIFICATE_TOL * scale;
    let labels = condition_labels(cert.form, inst.k());
    let mut flags: Vec<bool> = condition_min_eigs
        .iter()
        .chain(&q_min_eigs)
        .map(|&l| l >= tol)
        .collect();
    let mut exact_bound = None;
    if backend == Backend::Exact {
        let (_, exact_flags, tr) = exact_lattice_valid(inst, cert)?;
        flags = exact_flags;
        exact_bound = Some(tr.to_string());
    }
    let failures: Vec<String> = labels
        .into_iter()
        .zip(&flags)
        .filter(|(_, ok)| !**ok)
        .map(|(l, _)| l)
        .collect();
    Ok(CertificateCheck {
        form: cert.form,
        backend,
        bound: cert.bound(inst.k()),
        exact_bound,
        condition_min_eigs,
        q_min_eigs,
        valid: failures.is_empty(),
        failures,
    })
}

fn condition_labels(form: CertificateForm, k: usize) -> Vec<String> {
    let mut out: Vec<String> = match form {
        CertificateForm::Dual3 => (1..=k).map(|j| format!("Y - w{j} T_A(rho{j})")).collect(),
        CertificateForm::Dual2 => (1..=k)
            .map(|j| format!("Y - w{j} rho{j} - T_A(Q{j})"))
            .collect(),
        CertificateForm::Dual5 => {
            let mut v: Vec<String> = (1..=k)
                .map(|j| format!("Y - w{j} rho{j} + sum_i y_i{j} rho_i - T_A(Q{j})"))
                .collect();
            v.push(format!("Y - T_A(Q{})", k + 1));
            v
        }
    };
    let nq = match form {
        CertificateForm::Dual3 => 0,
        CertificateForm::Dual2 => k,
        CertificateForm::Dual5 => k + 1,
    };
    out.extend((1..=nq).map(|j| format!("Q{j} >= 0")));
    out
}

/// Verifies a lattice measurement in coefficient space.
pub fn verify_lattice_measurement(
    inst: &DiscriminationInstance,
    meas: &LatticeMeasurement,
    mode: Mode,
) -> Result<MeasurementCheck, DiscrimError> {
    let (t, coeffs) = instance_coefficients(inst)?;
    let n = 1usize << (2 * t);
    let k = inst.k();
    let want = if mode == Mode::Unambiguous { k + 1 } else { k };
    if meas.t != t || meas.coeffs.len() != want || meas.coeffs.iter().any(|c| c.len() != n) {
        return Err(DiscrimError::MalformedMeasurement(format!(
            "{mode} lattice measurement needs {want} coefficient vectors of length {n}"
        )));
    }
    let signs = sign_matrix(t);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let completeness_defect = (0..n)
        .map(|w| (meas.coeffs.iter().map(|c| c[w]).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    let min_eig = meas
        .coeffs
        .iter()
        .flatten()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let min_pt_eig = meas.ppt.then(|| {
        meas.coeffs
            .iter()
            .flat_map(|c| transpose_coefficients(t, &signs, c))
            .fold(f64::INFINITY, f64::min)
    });
    let per_state: Vec<f64> = (0..k).map(|j| dot(&meas.coeffs[j], &coeffs[j])).collect();
    let success = per_state
        .iter()
        .zip(inst.priors())
        .map(|(s, p)| s * p)
        .sum();
    let (max_error_overlap, inconclusive) = if mode == Mode::Unambiguous {
        let mut worst: f64 = 0.0;
        for i in 0..k {
            for j in (0..k).filter(|&j| j != i) {
                worst = worst.max(dot(&meas.coeffs[i], &coeffs[j]));
            }
        }
        let inc = (0..k)
            .map(|j| inst.priors()[j] * dot(&meas.coeffs[k], &coeffs[j]))
            .sum();
        (Some(worst), Some(inc))
    } else {
        (None, None)
    };
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{lattice_density, lattice_sign, LatticeVector};

    #[test]
    fn sign_matrix_matches_definition_and_transpose() {
        for t in 1..=2 {
            let s = sign_matrix(t);
            let n = 1 << (2 * t);
            for w in 0..n {
                for u in 0..n {
                    let want = lattice_sign(
                        &LatticeVector::from_code(t, w),
                        &LatticeVector::from_code(t, u),
                    );
                    assert_eq!(s[w * n + u], want);
                    assert_eq!(s[w * n + u], s[u * n + w]);
                }
            }
        }
        let w = LatticeVector::from_values(&[1, 3]).unwrap();
        let mut c = vec![0.0; 16];
        c[w.code()] = 1.0;
        let tc = transpose_coefficients(2, &sign_matrix(2), &c);
        let dense = lattice_operator(2, &tc).unwrap();
        let want = lattice_density(&w).partial_transpose();
        assert!(dense.max_abs_diff(&want).unwrap() < 1e-15);
    }

    #[test]
    fn identity_is_transpose_invariant() {
        let t = 2;
        let tc = transpose_coefficients(t, &sign_matrix(t), &vec![1.0; 16]);
        assert!(tc.iter().all(|&x| (x - 1.0).abs() < 1e-15));
    }
}
