//! Conic programs over full Hermitian operators.

use crate::conic::{BlockKind, ConicProblem, ConicSolution, SparseHerm};
use crate::hermlin::HermOp;
use crate::states::DiscriminationInstance;

use super::basis::{
    all_real, assemble, hermitian_basis, sparse_partial_transpose, BasisElem, Part,
};
use super::types::{Cone, DualCertificate, Measurement, Mode};
use super::DiscrimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Program {
    Discriminate(Mode, Cone),
    Eq3,
}

/// A conic program together with the bookkeeping needed to read a
/// measurement and a dual certificate off its solution.
#[derive(Debug, Clone)]
pub struct BuiltProblem {
    pub problem: ConicProblem,
    pub(crate) program: Program,
    dim_a: usize,
    dim_b: usize,
    k: usize,
    basis: Vec<BasisElem>,
    operators: Vec<usize>,
    completeness: Vec<usize>,
    links: Vec<Vec<usize>>,
    /// `(operator, state, row)` for `⟨P_operator, ρ_state⟩ = 0`.
    cross: Vec<(usize, usize, usize)>,
}

fn block_kind(inst: &DiscriminationInstance) -> (BlockKind, bool) {
    if all_real(inst.states()) {
        (BlockKind::Symmetric, false)
    } else {
        (BlockKind::Hermitian, true)
    }
}

fn identity_coordinate(e: &BasisElem) -> f64 {
    if e.part == Part::Diag {
        1.0
    } else {
        0.0
    }
}

fn build(inst: &DiscriminationInstance, mode: Mode, cone: Cone) -> BuiltProblem {
    let (kind, complex) = block_kind(inst);
    let (da, db, n, k) = (inst.dim_a(), inst.dim_b(), inst.order(), inst.k());
    let basis = hermitian_basis(n, complex);
    let outcomes = if mode == Mode::Unambiguous { k + 1 } else { k };
    let mut p = ConicProblem::new();
    let mut operators = Vec::with_capacity(outcomes);
    let mut transposes = Vec::new();
    for a in 0..outcomes {
        let blk = p.add_block(kind, n, format!("P{}", a + 1));
        if a < k {
            p.set_objective(
                blk,
                SparseHerm::from_herm(&inst.states()[a]).scaled(inst.priors()[a]),
            );
        }
        operators.push(blk);
        if cone == Cone::Ppt {
            transposes.push(p.add_block(kind, n, format!("Z{}", a + 1)));
        }
    }
    let completeness = basis
        .iter()
        .map(|e| {
            let m = e.matrix();
            p.add_row(
                operators.iter().map(|&b| (b, m.clone())).collect(),
                identity_coordinate(e),
            )
        })
        .collect();
    let mut links = Vec::new();
    if cone == Cone::Ppt {
        let ta: Vec<SparseHerm> = basis
            .iter()
            .map(|e| sparse_partial_transpose(&e.matrix(), db).scaled(-1.0))
            .collect();
        for (&pb, &zb) in operators.iter().zip(&transposes) {
            links.push(
                basis
                    .iter()
                    .zip(&ta)
                    .map(|(e, t)| p.add_row(vec![(zb, e.matrix()), (pb, t.clone())], 0.0))
                    .collect(),
            );
        }
    }
    let mut cross = Vec::new();
    if mode == Mode::Unambiguous {
        let rhos: Vec<SparseHerm> = inst.states().iter().map(SparseHerm::from_herm).collect();
        for i in 0..k {
            for (j, rho) in rhos.iter().enumerate() {
                if i != j {
                    cross.push((i, j, p.add_row(vec![(operators[i], rho.clone())], 0.0)));
                }
            }
        }
    }
    BuiltProblem {
        problem: p,
        program: Program::Discriminate(mode, cone),
        dim_a: da,
        dim_b: db,
        k,
        basis,
        operators,
        completeness,
        links,
        cross,
    }
}

/// `max Σ_j p_j ⟨P_j, ρ_j⟩` over POVMs `{P_j}` in the given cone.
pub fn build_min_error(inst: &DiscriminationInstance, cone: Cone) -> BuiltProblem {
    build(inst, Mode::MinError, cone)
}

/// Unambiguous discrimination: `k` conclusive outcomes with
/// `⟨P_i, ρ_j⟩ = 0` for `i ≠ j`, plus an inconclusive outcome.
pub fn build_unambiguous(inst: &DiscriminationInstance, cone: Cone) -> BuiltProblem {
    build(inst, Mode::Unambiguous, cone)
}

/// The relaxed bound `min Tr(Y)/k` s.t. `Y ⪰ k p_j T_A(ρ_j)`, posed as its
/// dual `max Σ_j ⟨k p_j T_A(ρ_j), X_j⟩` s.t. `Σ_j X_j = 1/k`, `X_j ⪰ 0`,
/// so that `Y` is the multiplier of the equality.
pub fn build_eq3_bound(inst: &DiscriminationInstance) -> BuiltProblem {
    let (kind, complex) = block_kind(inst);
    let (da, db, n, k) = (inst.dim_a(), inst.dim_b(), inst.order(), inst.k());
    let basis = hermitian_basis(n, complex);
    let mut p = ConicProblem::new();
    let kf = k as f64;
    let operators: Vec<usize> = (0..k)
        .map(|j| {
            let blk = p.add_block(kind, n, format!("X{}", j + 1));
            let c = SparseHerm::from_herm(&inst.states()[j].partial_transpose())
                .scaled(kf * inst.priors()[j]);
            p.set_objective(blk, c);
            blk
        })
        .collect();
    let completeness = basis
        .iter()
        .map(|e| {
            let m = e.matrix();
            p.add_row(
                operators.iter().map(|&b| (b, m.clone())).collect(),
                identity_coordinate(e) / kf,
            )
        })
        .collect();
    BuiltProblem {
        problem: p,
        program: Program::Eq3,
        dim_a: da,
        dim_b: db,
        k,
        basis,
        operators,
        completeness,
        links: Vec::new(),
        cross: Vec::new(),
    }
}

impl BuiltProblem {
    fn assemble_rows(&self, rows: &[usize], y: &[f64], scale: f64) -> HermOp {
        let vals: Vec<f64> = rows.iter().map(|&r| y[r]).collect();
        assemble(self.dim_a, self.dim_b, &self.basis, &vals, scale)
    }

    /// Raw measurement operators (no repair).
    pub fn measurement(&self, sol: &ConicSolution) -> Result<Measurement, DiscrimError> {
        let ppt = matches!(self.program, Program::Discriminate(_, Cone::Ppt));
        let operators = self
            .operators
            .iter()
            .map(|&b| {
                let m = sol.primal[b].as_matrix().expect("matrix block");
                Ok(HermOp::from_hermitian_part(self.dim_a, self.dim_b, m)?)
            })
            .collect::<Result<Vec<_>, DiscrimError>>()?;
        Ok(Measurement { operators, ppt })
    }

    /// Dual certificate read off the multipliers (no repair).
    pub fn certificate(&self, sol: &ConicSolution) -> DualCertificate {
        let kf = self.k as f64;
        match self.program {
            Program::Eq3 => {
                DualCertificate::dual3(self.assemble_rows(&self.completeness, &sol.y, 1.0))
            }
            Program::Discriminate(mode, _) => {
                let y = self.assemble_rows(&self.completeness, &sol.y, kf);
                let outcomes = self.operators.len();
                let q: Vec<HermOp> = if self.links.is_empty() {
                    vec![HermOp::zeros(self.dim_a, self.dim_b); outcomes]
                } else {
                    self.links
                        .iter()
                        .map(|rows| self.assemble_rows(rows, &sol.y, kf))
                        .collect()
                };
                match mode {
                    Mode::MinError => DualCertificate::dual2(y, q),
                    Mode::Unambiguous => {
                        let mut off = vec![vec![0.0; self.k]; self.k];
                        for &(op, state, row) in &self.cross {
                            off[state][op] = kf * sol.y[row];
                        }
                        DualCertificate::dual5(y, q, off)
                    }
                }
            }
        }
    }
}
