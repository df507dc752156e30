//! Infeasible-start primal-dual interior-point method with the HKM search
//! direction and Mehrotra predictor-corrector steps.

use log::debug;

use crate::hermlin::sym_eigvals;

use super::check::{check_solution, ConicCheck};
use super::problem::{ConicProblem, LinearProgram};
use super::real::{dense, ProjectedBlock, RealKind, RealProblem};
use super::schur::SchurLayout;
use super::ConicError;

/// Pivot ratio below which constraint rows are reported as dependent.
const DEPENDENT_ROW_RATIO: f64 = 1e-13;
/// Iterate norm beyond which a certificate of infeasibility is assumed.
const DIVERGENCE_NORM: f64 = 1e10;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Target duality gap `bᵀy − ⟨C, X⟩`, relative to `max(1, |⟨C, X⟩|)`.
    pub tol_gap: f64,
    /// Target for the scaled primal and dual residuals.
    pub tol_feas: f64,
    pub max_iter: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
    /// Factor `A Aᵀ` once before iterating to reject dependent rows.
    pub check_rank: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_gap: 1e-8,
            tol_feas: 1e-10,
            max_iter: 200,
            step_fraction: 0.98,
            check_rank: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// Converged by the solver's own criteria but failed the independent
    /// check.
    Inaccurate,
    MaxIterations,
    Stalled,
    NumericalError,
    PrimalInfeasible,
    DualInfeasible,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Inaccurate => "inaccurate",
            SolveStatus::MaxIterations => "max_iterations",
            SolveStatus::Stalled => "stalled",
            SolveStatus::NumericalError => "numerical_error",
            SolveStatus::PrimalInfeasible => "primal_infeasible",
            SolveStatus::DualInfeasible => "dual_infeasible",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub mu: f64,
    pub step_primal: f64,
    pub step_dual: f64,
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub primal: Vec<ProjectedBlock>,
    pub y: Vec<f64>,
    pub iterations: usize,
    /// Independent recomputation from the original problem data.
    pub check: ConicCheck,
    pub history: Vec<IterationRecord>,
}

impl ConicSolution {
    pub fn primal_objective(&self) -> f64 {
        self.check.primal_objective
    }

    pub fn dual_objective(&self) -> f64 {
        self.check.dual_objective
    }

    pub fn gap(&self) -> f64 {
        self.check.gap
    }

    pub fn slack(&self) -> &[ProjectedBlock] {
        &self.check.slack
    }
}

type Blocks = Vec<Vec<f64>>;

struct Iterate {
    x: Blocks,
    y: Vec<f64>,
    s: Blocks,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

fn blocks_max_abs(b: &Blocks) -> f64 {
    b.iter().map(|v| max_abs(v)).fold(0.0, f64::max)
}

fn blocks_dot(a: &Blocks, b: &Blocks) -> f64 {
    a.iter().zip(b).map(|(x, y)| dense::dot(x, y)).sum()
}

/// Largest `α` with `X + α ΔX` in the cone (infinite when unbounded).
fn max_step(rp: &RealProblem, x: &Blocks, dx: &Blocks) -> Result<f64, ConicError> {
    let mut alpha = f64::INFINITY;
    for (b, blk) in rp.blocks.iter().enumerate() {
        match blk.kind {
            RealKind::Diag => {
                for (xi, di) in x[b].iter().zip(&dx[b]) {
                    if *di < 0.0 {
                        alpha = alpha.min(-xi / di);
                    }
                }
            }
            RealKind::Psd => {
                let n = blk.n;
                let l = dense::cholesky(n, &x[b])
                    .ok_or_else(|| ConicError::Numerical("iterate left the cone".into()))?;
                let li = dense::lower_inverse(n, &l);
                let m = dense::congruence(n, &li, &dx[b]);
                let lmin = sym_eigvals(n, &m).map_err(|e| ConicError::Numerical(e.to_string()))?[0];
                if lmin < 0.0 {
                    alpha = alpha.min(-1.0 / lmin);
                }
            }
        }
    }
    Ok(alpha)
}

struct Direction {
    dx: Blocks,
    dy: Vec<f64>,
    ds: Blocks,
}

/// Solves the HKM Newton system for target `σμ` and second-order term
/// `corr` (blockwise `ΔX_a ΔS_a`).
#[allow(clippy::too_many_arguments)]
const REFINE_STEPS: usize = 3;
/// Iterations without a 10% improvement of the worst residual before giving up.
const STAGNATION_ITERS: usize = 15;

/// `A(X Aᵀ(v) S⁻¹)`, the action of the Schur complement without forming it.
fn schur_apply(rp: &RealProblem, x: &Blocks, sinv: &Blocks, v: &[f64]) -> Vec<f64> {
    let w = rp.adjoint(v);
    let h: Blocks = rp
        .blocks
        .iter()
        .enumerate()
        .map(|(b, blk)| match blk.kind {
            RealKind::Diag => (0..blk.n).map(|i| x[b][i] * w[b][i] * sinv[b][i]).collect(),
            RealKind::Psd => {
                let n = blk.n;
                let mut t = dense::matmul(n, &dense::matmul(n, &x[b], &w[b]), &sinv[b]);
                dense::symmetrize(n, &mut t);
                t
            }
        })
        .collect();
    rp.forward(&h)
}

fn direction(
    rp: &RealProblem,
    schur: &super::schur::SchurMatrix,
    it: &Iterate,
    sinv: &Blocks,
    rp_res: &[f64],
    rd: &Blocks,
    sigma_mu: f64,
    corr: Option<&Blocks>,
) -> Direction {
    let nb = rp.blocks.len();
    // H = σμ S⁻¹ − X − corr S⁻¹ + X R_d S⁻¹
    let mut h: Blocks = Vec::with_capacity(nb);
    for (b, blk) in rp.blocks.iter().enumerate() {
        let (x, si, r) = (&it.x[b], &sinv[b], &rd[b]);
        match blk.kind {
            RealKind::Diag => {
                let v = (0..blk.n)
                    .map(|i| {
                        let c = corr.map_or(0.0, |c| c[b][i]);
                        sigma_mu * si[i] - x[i] - c * si[i] + x[i] * r[i] * si[i]
                    })
                    .collect();
                h.push(v);
            }
            RealKind::Psd => {
                let n = blk.n;
                let mut inner = dense::matmul(n, x, r);
                if let Some(c) = corr {
                    inner.iter_mut().zip(&c[b]).for_each(|(a, cc)| *a -= cc);
                }
                let mut v = dense::matmul(n, &inner, si);
                for (idx, vi) in v.iter_mut().enumerate() {
                    *vi += sigma_mu * si[idx] - x[idx];
                }
                h.push(v);
            }
        }
    }
    let ah = rp.forward(&h);
    let rhs: Vec<f64> = ah.iter().zip(rp_res).map(|(a, r)| a - r).collect();
    let mut dy = schur.solve(&rhs);
    if schur.regularized() > 0 {
        // The shifted factor solves a nearby system; refine against the
        // exact operator while that keeps reducing the residual.
        let residual = |d: &[f64]| -> Vec<f64> {
            schur_apply(rp, &it.x, sinv, d)
                .iter()
                .zip(&rhs)
                .map(|(m, b)| b - m)
                .collect()
        };
        let mut r = residual(&dy);
        let mut norm = max_abs(&r);
        for _ in 0..REFINE_STEPS {
            if norm <= 1e-15 * (1.0 + max_abs(&rhs)) {
                break;
            }
            let c = schur.solve(&r);
            let trial: Vec<f64> = dy.iter().zip(&c).map(|(d, e)| d + e).collect();
            let rt = residual(&trial);
            let nt = max_abs(&rt);
            if !(nt < 0.5 * norm) {
                break;
            }
            (dy, r, norm) = (trial, rt, nt);
        }
    }
    let aty = rp.adjoint(&dy);
    let ds: Blocks = aty
        .iter()
        .zip(rd)
        .map(|(a, r)| a.iter().zip(r).map(|(p, q)| p - q).collect())
        .collect();
    let mut dx: Blocks = Vec::with_capacity(nb);
    for (b, blk) in rp.blocks.iter().enumerate() {
        let (x, si) = (&it.x[b], &sinv[b]);
        match blk.kind {
            RealKind::Diag => {
                let v = (0..blk.n)
                    .map(|i| {
                        let c = corr.map_or(0.0, |c| c[b][i]);
                        sigma_mu * si[i] - x[i] - (x[i] * ds[b][i] + c) * si[i]
                    })
                    .collect();
                dx.push(v);
            }
            RealKind::Psd => {
                let n = blk.n;
                let mut inner = dense::matmul(n, x, &ds[b]);
                if let Some(c) = corr {
                    inner.iter_mut().zip(&c[b]).for_each(|(a, cc)| *a += cc);
                }
                let t = dense::matmul(n, &inner, si);
                let mut v: Vec<f64> = (0..n * n)
                    .map(|idx| sigma_mu * si[idx] - x[idx] - t[idx])
                    .collect();
                dense::symmetrize(n, &mut v);
                dx.push(v);
            }
        }
    }
    Direction { dx, dy, ds }
}

fn initial_point(rp: &RealProblem) -> Iterate {
    let id = rp.identity_blocks(1.0);
    let ai = rp.forward(&id);
    let num: f64 = ai.iter().zip(&rp.b).map(|(a, b)| a * b).sum();
    let den: f64 = ai.iter().map(|a| a * a).sum();
    let tau = if den > 0.0 && num > 0.0 {
        num / den
    } else {
        1.0
    };
    let cnorm = blocks_max_abs(&rp.c_blocks());
    let eta = 1.0 + cnorm;
    Iterate {
        x: rp.identity_blocks(tau),
        y: vec![0.0; rp.m()],
        s: rp.identity_blocks(eta),
    }
}

/// Solves a [`ConicProblem`].
pub fn solve(problem: &ConicProblem, opts: &SolverOptions) -> Result<ConicSolution, ConicError> {
    problem.validate()?;
    let rp = RealProblem::from_conic(problem);
    let layout = SchurLayout::new(&rp)?;
    if opts.check_rank {
        let id = rp.identity_blocks(1.0);
        let mut m = layout.assemble(&rp, &id, &id);
        let ratio = m.factor().unwrap_or(0.0);
        if ratio < DEPENDENT_ROW_RATIO {
            return Err(ConicError::DependentRows);
        }
    }
    let nu = rp.nu() as f64;
    let bnorm = 1.0 + max_abs(&rp.b);
    let c = rp.c_blocks();
    let cnorm = 1.0 + blocks_max_abs(&c);

    let mut it = initial_point(&rp);
    let mut history = Vec::new();
    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;
    let (mut best_merit, mut best_iter) = (f64::INFINITY, 0);

    for iter in 0..=opts.max_iter {
        iterations = iter;
        let ax = rp.forward(&it.x);
        let rp_res: Vec<f64> = rp.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let aty = rp.adjoint(&it.y);
        let rd: Blocks = c
            .iter()
            .zip(&aty)
            .zip(&it.s)
            .map(|((cb, ab), sb)| {
                cb.iter()
                    .zip(ab)
                    .zip(sb)
                    .map(|((c, a), s)| c - a + s)
                    .collect()
            })
            .collect();
        let pobj = rp.objective(&it.x);
        let dobj: f64 = rp.b.iter().zip(&it.y).map(|(b, y)| b * y).sum();
        let xs = blocks_dot(&it.x, &it.s);
        debug_assert!({
            let lhs = dobj - pobj - dense::dot(&it.y, &rp_res) + blocks_dot(&rd, &it.x);
            let size = 1.0
                + xs.abs()
                + pobj.abs()
                + max_abs(&it.y) * (max_abs(&rp.b) + max_abs(&rp_res)) * rp.m() as f64
                + blocks_max_abs(&rd) * blocks_max_abs(&it.x) * nu * nu;
            (lhs - xs).abs() <= 1e-8 * size
        });
        let mu = xs / nu;
        let pres = max_abs(&rp_res) / bnorm;
        let dres = blocks_max_abs(&rd) / cnorm;
        let gap = dobj - pobj;
        let (ap, ad) = history.last().map_or((0.0, 0.0), |h: &IterationRecord| {
            (h.step_primal, h.step_dual)
        });
        debug!(
            "iter {iter:3}  pobj {pobj:+.12e}  dobj {dobj:+.12e}  gap {gap:+.2e}  pres {pres:.2e}  dres {dres:.2e}  mu {mu:.2e}"
        );
        history.push(IterationRecord {
            iter,
            primal_objective: pobj,
            dual_objective: dobj,
            primal_residual: pres,
            dual_residual: dres,
            mu,
            step_primal: ap,
            step_dual: ad,
        });
        let gap_target = 0.5 * opts.tol_gap * pobj.abs().max(1.0);
        if pres <= opts.tol_feas
            && dres <= opts.tol_feas
            && gap.abs() <= gap_target
            && xs <= gap_target
        {
            status = SolveStatus::Optimal;
            break;
        }
        let merit = pres.max(dres).max(gap.abs() / pobj.abs().max(1.0));
        if merit < 0.9 * best_merit {
            (best_merit, best_iter) = (merit, iter);
        } else if iter >= best_iter + STAGNATION_ITERS {
            status = SolveStatus::Stalled;
            break;
        }
        if blocks_max_abs(&it.x) > DIVERGENCE_NORM {
            status = SolveStatus::DualInfeasible;
            break;
        }
        if max_abs(&it.y) > DIVERGENCE_NORM {
            status = SolveStatus::PrimalInfeasible;
            break;
        }
        if iter == opts.max_iter {
            break;
        }

        let mut sinv: Blocks = Vec::with_capacity(rp.blocks.len());
        let mut ok = true;
        for (b, blk) in rp.blocks.iter().enumerate() {
            match blk.kind {
                RealKind::Diag => sinv.push(it.s[b].iter().map(|v| 1.0 / v).collect()),
                RealKind::Psd => match dense::cholesky(blk.n, &it.s[b]) {
                    Some(l) => sinv.push(dense::inverse_from_cholesky(blk.n, &l)),
                    None => {
                        ok = false;
                        break;
                    }
                },
            }
        }
        if !ok {
            debug!("iter {iter:3}  dual slack lost definiteness");
            status = SolveStatus::NumericalError;
            break;
        }
        let mut schur = layout.assemble(&rp, &it.x, &sinv);
        if let Err(e) = schur.factor() {
            debug!("iter {iter:3}  {e}");
            status = SolveStatus::NumericalError;
            break;
        }
        if schur.regularized() > 0 {
            debug!(
                "iter {iter:3}  Schur complement regularised {} times",
                schur.regularized()
            );
        }

        let pred = direction(&rp, &schur, &it, &sinv, &rp_res, &rd, 0.0, None);
        let step = |d: &Direction| -> Result<(f64, f64), ConicError> {
            Ok((max_step(&rp, &it.x, &d.dx)?, max_step(&rp, &it.s, &d.ds)?))
        };
        let Ok((ap_max, ad_max)) = step(&pred) else {
            status = SolveStatus::NumericalError;
            break;
        };
        let (ap_a, ad_a) = (ap_max.min(1.0), ad_max.min(1.0));
        let mut mu_aff = 0.0;
        for b in 0..rp.blocks.len() {
            let xa: Vec<f64> = it.x[b]
                .iter()
                .zip(&pred.dx[b])
                .map(|(x, d)| x + ap_a * d)
                .collect();
            let sa: Vec<f64> = it.s[b]
                .iter()
                .zip(&pred.ds[b])
                .map(|(s, d)| s + ad_a * d)
                .collect();
            mu_aff += dense::dot(&xa, &sa);
        }
        mu_aff /= nu;
        let sigma = if mu > 0.0 {
            (mu_aff / mu).clamp(0.0, 1.0).powi(3)
        } else {
            0.0
        };
        let corr: Blocks = rp
            .blocks
            .iter()
            .enumerate()
            .map(|(b, blk)| match blk.kind {
                RealKind::Diag => pred.dx[b]
                    .iter()
                    .zip(&pred.ds[b])
                    .map(|(x, s)| x * s)
                    .collect(),
                RealKind::Psd => dense::matmul(blk.n, &pred.dx[b], &pred.ds[b]),
            })
            .collect();
        let dir = direction(
            &rp,
            &schur,
            &it,
            &sinv,
            &rp_res,
            &rd,
            sigma * mu,
            Some(&corr),
        );
        let Ok((mut ap_max, mut ad_max)) = step(&dir) else {
            status = SolveStatus::NumericalError;
            break;
        };
        let mut dir = dir;
        if ap_max < 1e-8 && ad_max < 1e-8 {
            // The second-order term can push a poorly conditioned direction
            // straight into the boundary; fall back to pure centring.
            let centre = direction(&rp, &schur, &it, &sinv, &rp_res, &rd, mu, None);
            if let Ok((a, b)) = step(&centre) {
                debug!("iter {iter:3}  corrector blocked, centring step {a:.1e} / {b:.1e}");
                (ap_max, ad_max, dir) = (a, b, centre);
            }
        }
        let ap = (opts.step_fraction * ap_max).min(1.0);
        let ad = (opts.step_fraction * ad_max).min(1.0);
        if ap < 1e-12 && ad < 1e-12 {
            status = SolveStatus::Stalled;
            break;
        }
        for b in 0..rp.blocks.len() {
            it.x[b]
                .iter_mut()
                .zip(&dir.dx[b])
                .for_each(|(x, d)| *x += ap * d);
            it.s[b]
                .iter_mut()
                .zip(&dir.ds[b])
                .for_each(|(s, d)| *s += ad * d);
        }
        it.y.iter_mut().zip(&dir.dy).for_each(|(y, d)| *y += ad * d);
        if let Some(h) = history.last_mut() {
            h.step_primal = ap;
            h.step_dual = ad;
        }
    }

    let primal: Vec<ProjectedBlock> = (0..rp.blocks.len())
        .map(|b| rp.project(b, &it.x[b]))
        .collect();
    let check = check_solution(problem, &primal, &it.y)?;
    match status {
        SolveStatus::Optimal if !check.passes(opts.tol_gap) => status = SolveStatus::Inaccurate,
        // Degenerate programs can stop short of the internal targets at a
        // point that still meets the published acceptance tolerances.
        SolveStatus::Stalled | SolveStatus::NumericalError | SolveStatus::MaxIterations
            if check.passes(opts.tol_gap) =>
        {
            debug!("{status} after {iterations} iterations, accepted by the independent check");
            status = SolveStatus::Optimal;
        }
        _ => {}
    }
    Ok(ConicSolution {
        status,
        primal,
        y: it.y,
        iterations,
        check,
        history,
    })
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub iterations: usize,
}

/// Solves a [`LinearProgram`] through the same interior-point method.
pub fn solve_lp(lp: &LinearProgram, opts: &SolverOptions) -> Result<LpSolution, ConicError> {
    if lp.rows.len() != lp.b.len() {
        return Err(ConicError::InvalidProblem(
            "row count and right-hand side differ".into(),
        ));
    }
    let sol = solve(&lp.to_conic(), opts)?;
    let x = sol.primal[0]
        .as_diagonal()
        .expect("nonnegative block")
        .to_vec();
    Ok(LpSolution {
        status: sol.status,
        primal_objective: sol.primal_objective(),
        dual_objective: sol.dual_objective(),
        iterations: sol.iterations,
        x,
        y: sol.y,
    })
}
