//! Primal-dual interior-point solver for linear conic programs over
//! products of Hermitian PSD, real PSD and nonnegative cones.

mod check;
mod ipm;
mod problem;
mod real;
mod schur;

use thiserror::Error;

pub use check::{check_solution, ConicCheck, DUAL_EIG_TOL, RESIDUAL_TOL};
pub use ipm::{
    solve, solve_lp, ConicSolution, IterationRecord, LpSolution, SolveStatus, SolverOptions,
};
pub use problem::{Block, BlockKind, ConicProblem, Constraint, LinearProgram, SparseHerm};
pub use real::ProjectedBlock;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConicError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("constraint rows are linearly dependent")]
    DependentRows,
    #[error("numerical failure: {0}")]
    Numerical(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermlin::{
        herm_eigvals, real_embedding, sym_eigvals, CMatrix, Complex64, I, ONE, ZERO,
    };

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// `max ⟨C, X⟩` s.t. `Tr X = 1`, `X ⪰ 0` equals `λ_max(C)`.
    fn lambda_max_problem(cm: &CMatrix, kind: BlockKind) -> ConicProblem {
        let n = cm.rows();
        let mut p = ConicProblem::new();
        let b = p.add_block(kind, n, "X");
        p.set_objective(b, SparseHerm::from_matrix(cm));
        let mut tr = SparseHerm::new();
        for i in 0..n {
            tr.push(i, i, ONE);
        }
        p.add_row(vec![(b, tr)], 1.0);
        p
    }

    #[test]
    fn largest_eigenvalue_of_diagonal() {
        let cm = CMatrix::from_real_diag(&[1.0, 3.0, 2.0]);
        for kind in [BlockKind::Symmetric, BlockKind::Hermitian] {
            let sol = solve(&lambda_max_problem(&cm, kind), &SolverOptions::default()).unwrap();
            assert_eq!(sol.status, SolveStatus::Optimal);
            assert!((sol.primal_objective() - 3.0).abs() < 1e-8);
            assert!((sol.y[0] - 3.0).abs() < 1e-8);
        }
    }

    #[test]
    fn largest_eigenvalue_of_complex_matrix() {
        // σ_y has spectrum {−1, 1}; its embedding has each eigenvalue twice.
        let sy = CMatrix::from_vec(2, 2, vec![ZERO, -I, I, ZERO]).unwrap();
        let emb = sym_eigvals(4, &real_embedding(&sy)).unwrap();
        for (got, want) in emb.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        let mut h = CMatrix::identity(2);
        h[(0, 1)] = c(0.5, 2.0);
        h[(1, 0)] = c(0.5, -2.0);
        let want = herm_eigvals(&h).unwrap()[1];
        let sol = solve(
            &lambda_max_problem(&h, BlockKind::Hermitian),
            &SolverOptions::default(),
        )
        .unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.primal_objective() - want).abs() < 1e-8);
        let x = sol.primal[0].as_matrix().unwrap();
        assert!((x.trace().re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn psd_iff_embedding_psd() {
        let mut seed = 5u64;
        let mut next = || {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for _ in 0..20 {
            let g = CMatrix::from_fn(3, 3, |_, _| c(next(), next()));
            let h = (&g * &g.adjoint()).hermitian_part();
            let shift = next();
            let h = &h + &CMatrix::identity(3).scale(shift * 0.2);
            let lc = herm_eigvals(&h).unwrap()[0];
            let lr = sym_eigvals(6, &real_embedding(&h)).unwrap()[0];
            assert!((lc - lr).abs() < 1e-12);
            assert_eq!(lc >= 0.0, lr >= 0.0);
        }
    }

    #[test]
    fn small_lp() {
        // max x1 s.t. x1 + x2 = 1, x ≥ 0
        let lp = LinearProgram {
            c: vec![1.0, 0.0],
            rows: vec![vec![(0, 1.0), (1, 1.0)]],
            b: vec![1.0],
        };
        let sol = solve_lp(&lp, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.primal_objective - 1.0).abs() < 1e-8);
        assert!((sol.x[0] - 1.0).abs() < 1e-7 && sol.x[1].abs() < 1e-7);
        assert!((sol.y[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn lp_agrees_with_diagonal_sdp() {
        // max 2x1 + 3x2 + x3 s.t. x1 + x2 + x3 = 1, x1 − x2 = 0.2
        let lp = LinearProgram {
            c: vec![2.0, 3.0, 1.0],
            rows: vec![
                vec![(0, 1.0), (1, 1.0), (2, 1.0)],
                vec![(0, 1.0), (1, -1.0)],
            ],
            b: vec![1.0, 0.2],
        };
        let a = solve_lp(&lp, &SolverOptions::default()).unwrap();
        let mut p = ConicProblem::new();
        let b = p.add_block(BlockKind::Symmetric, 3, "X");
        p.set_objective(b, SparseHerm::from_matrix(&CMatrix::from_real_diag(&lp.c)));
        p.add_row(
            vec![(
                b,
                SparseHerm::from_matrix(&CMatrix::from_real_diag(&[1.0, 1.0, 1.0])),
            )],
            1.0,
        );
        p.add_row(
            vec![(
                b,
                SparseHerm::from_matrix(&CMatrix::from_real_diag(&[1.0, -1.0, 0.0])),
            )],
            0.2,
        );
        let s = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(a.status, SolveStatus::Optimal);
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((a.primal_objective - 2.4).abs() < 1e-8);
        assert!((a.primal_objective - s.primal_objective()).abs() < 1e-8);
    }

    #[test]
    fn solver_is_deterministic() {
        let mut h = CMatrix::from_real_diag(&[0.3, -0.2, 0.9]);
        h[(0, 2)] = c(0.1, 0.4);
        h[(2, 0)] = c(0.1, -0.4);
        let p = lambda_max_problem(&h, BlockKind::Hermitian);
        let a = solve(&p, &SolverOptions::default()).unwrap();
        let b = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(a.y, b.y);
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.primal, b.primal);
    }

    #[test]
    fn dependent_rows_are_rejected() {
        let mut p = ConicProblem::new();
        let b = p.add_block(BlockKind::Nonneg, 2, "x");
        p.add_row(vec![(b, SparseHerm::diagonal(0, 1.0))], 1.0);
        p.add_row(vec![(b, SparseHerm::diagonal(0, 2.0))], 2.0);
        assert_eq!(
            solve(&p, &SolverOptions::default()).unwrap_err(),
            ConicError::DependentRows
        );
    }

    #[test]
    fn infeasible_lp_is_not_optimal() {
        // x1 + x2 = −1 with x ≥ 0
        let lp = LinearProgram {
            c: vec![1.0, 1.0],
            rows: vec![vec![(0, 1.0), (1, 1.0)]],
            b: vec![-1.0],
        };
        let sol = solve_lp(&lp, &SolverOptions::default()).unwrap();
        assert_ne!(sol.status, SolveStatus::Optimal);
    }
}
