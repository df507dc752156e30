//! Independent verification of a primal-dual pair against the original
//! complex problem data.

use crate::hermlin::{herm_eigvals, CMatrix};

use super::problem::{BlockKind, ConicProblem};
use super::real::ProjectedBlock;
use super::ConicError;

/// Largest accepted `‖b − A(X)‖∞`.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Smallest accepted eigenvalue of `X` and of `S(y)`.
pub const DUAL_EIG_TOL: f64 = -1e-9;

#[derive(Debug, Clone)]
pub struct ConicCheck {
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `bᵀy − ⟨C, X⟩`.
    pub gap: f64,
    pub primal_residual: f64,
    pub primal_min_eig: f64,
    /// `S(y) = Σ_r y_r A_r − C`, per block.
    pub slack: Vec<ProjectedBlock>,
    pub dual_min_eig: f64,
}

impl ConicCheck {
    pub fn passes(&self, tol_gap: f64) -> bool {
        self.gap.abs() <= tol_gap * self.primal_objective.abs().max(1.0)
            && self.primal_residual <= RESIDUAL_TOL
            && self.primal_min_eig >= DUAL_EIG_TOL
            && self.dual_min_eig >= DUAL_EIG_TOL
    }
}

fn min_eig(b: &ProjectedBlock) -> Result<f64, ConicError> {
    match b {
        ProjectedBlock::Diagonal(d) => Ok(d.iter().cloned().fold(f64::INFINITY, f64::min)),
        ProjectedBlock::Matrix(m) => {
            Ok(herm_eigvals(m).map_err(|e| ConicError::Numerical(e.to_string()))?[0])
        }
    }
}

/// Recomputes objectives, residuals and cone membership of `(X, y)`.
pub fn check_solution(
    p: &ConicProblem,
    x: &[ProjectedBlock],
    y: &[f64],
) -> Result<ConicCheck, ConicError> {
    if x.len() != p.blocks().len() || y.len() != p.num_rows() {
        return Err(ConicError::InvalidProblem(
            "solution does not match problem shape".into(),
        ));
    }
    let primal_objective: f64 = p.objective().iter().zip(x).map(|(c, xb)| xb.inner(c)).sum();
    let dual_objective: f64 = p.rows().iter().zip(y).map(|(r, yr)| r.rhs * yr).sum();
    let mut primal_residual: f64 = 0.0;
    for row in p.rows() {
        let ax: f64 = row.terms.iter().map(|(b, a)| x[*b].inner(a)).sum();
        primal_residual = primal_residual.max((row.rhs - ax).abs());
    }
    let mut slack: Vec<ProjectedBlock> = p
        .blocks()
        .iter()
        .zip(p.objective())
        .map(|(b, c)| match b.kind {
            BlockKind::Nonneg => {
                let mut d = vec![0.0; b.order];
                for &(i, _, z) in c.entries() {
                    d[i] -= z.re;
                }
                ProjectedBlock::Diagonal(d)
            }
            _ => {
                let mut m = CMatrix::zeros(b.order, b.order);
                c.add_to(&mut m, -1.0);
                ProjectedBlock::Matrix(m)
            }
        })
        .collect();
    for (row, &yr) in p.rows().iter().zip(y) {
        for (b, a) in &row.terms {
            match &mut slack[*b] {
                ProjectedBlock::Diagonal(d) => {
                    for &(i, _, z) in a.entries() {
                        d[i] += yr * z.re;
                    }
                }
                ProjectedBlock::Matrix(m) => a.add_to(m, yr),
            }
        }
    }
    let mut primal_min_eig = f64::INFINITY;
    let mut dual_min_eig = f64::INFINITY;
    for (xb, sb) in x.iter().zip(&slack) {
        primal_min_eig = primal_min_eig.min(min_eig(xb)?);
        dual_min_eig = dual_min_eig.min(min_eig(sb)?);
    }
    Ok(ConicCheck {
        primal_objective,
        dual_objective,
        gap: dual_objective - primal_objective,
        primal_residual,
        primal_min_eig,
        slack,
        dual_min_eig,
    })
}
