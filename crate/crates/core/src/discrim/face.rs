//! Implied zeros of the zero-error lattice cones.
//!
//! The coefficients of a conclusive outcome range over the cone
//! `K = {c ≥ 0 on the allowed codes : S c ≥ 0}`. When a state cannot be
//! singled out, `K` has empty interior, the linear program has no strictly
//! feasible point and interior-point iterates stall. The coordinates that
//! vanish on all of `K` are therefore found first with a simplex solve and
//! removed; the dual conditions they carried are restored afterwards by a
//! correction to `Q` that leaves `Tr(Y)` unchanged.

use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};

use crate::conic::ConicError;

use super::DiscrimError;

/// Support of the smallest face of `K` containing all of it.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Face {
    /// Allowed codes whose coefficient can be positive.
    pub codes: Vec<usize>,
    /// Per code `u`: whether `(S c)_u` can be positive.
    pub open: Vec<bool>,
    /// A point of the relative interior, indexed by code: at least 1 on
    /// `codes`, with `(S c)_u ≥ 2^{-t}` on the open coordinates.
    pub interior: Vec<f64>,
}

impl Face {
    pub fn is_full(&self, allowed: usize) -> bool {
        self.codes.len() == allowed && self.open.iter().all(|&o| o)
    }
}

fn lp_error(what: &str, e: impl std::fmt::Debug) -> DiscrimError {
    DiscrimError::Conic(ConicError::Numerical(format!("{what}: {e:?}")))
}

/// `max Σ τ` with `τ ≤ 1` and `τ` below every coordinate of `(c, S c)`.
/// The cone is closed under addition and scaling, so every coordinate that
/// can be positive reaches `τ = 1` at the optimum and the others stay 0.
pub(crate) fn cone_face(n: usize, signs: &[f64], allowed: &[usize]) -> Result<Face, DiscrimError> {
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let c: Vec<_> = allowed
        .iter()
        .map(|_| lp.add_var(0.0, (0.0, f64::INFINITY)))
        .collect();
    let tau_c: Vec<_> = allowed
        .iter()
        .map(|_| lp.add_var(1.0, (0.0, 1.0)))
        .collect();
    let tau_z: Vec<_> = (0..n).map(|_| lp.add_var(1.0, (0.0, 1.0))).collect();
    for (&cv, &tv) in c.iter().zip(&tau_c) {
        lp.add_constraint([(tv, 1.0), (cv, -1.0)], ComparisonOp::Le, 0.0);
    }
    for u in 0..n {
        // Signs scaled to ±1; the cone is unchanged.
        let sc = |w: usize| signs[w * n + u].signum();
        let mut z = LinearExpr::empty();
        let mut gap = LinearExpr::empty();
        for (&w, &cv) in allowed.iter().zip(&c) {
            z.add(cv, sc(w));
            gap.add(cv, -sc(w));
        }
        gap.add(tau_z[u], 1.0);
        lp.add_constraint(z, ComparisonOp::Ge, 0.0);
        lp.add_constraint(gap, ComparisonOp::Le, 0.0);
    }
    let sol = lp
        .solve()
        .map_err(|e| lp_error("face detection", e))?
        .into_solution()
        .map_err(|_| lp_error("face detection", "interrupted"))?;
    let codes = allowed
        .iter()
        .zip(&tau_c)
        .filter(|&(_, &tv)| sol.var_value(tv) > 0.5)
        .map(|(&w, _)| w)
        .collect();
    let open = tau_z.iter().map(|&tv| sol.var_value(tv) > 0.5).collect();
    let mut interior = vec![0.0; n];
    for (&w, &cv) in allowed.iter().zip(&c) {
        interior[w] = sol.var_value(cv);
    }
    Ok(Face {
        codes,
        open,
        interior,
    })
}

/// Smallest `ν ≥ 0` with `q + ν ≥ 0` on the closed coordinates of `face`
/// and `(S ν)_w ≤ slack_w` on the allowed codes (slack clipped at zero on
/// the face, where the reduced program already enforced the condition).
/// Returns `None` if no such `ν` is found.
pub(crate) fn dual_correction(
    n: usize,
    signs: &[f64],
    allowed: &[usize],
    face: &Face,
    q: &[f64],
    slack: &[f64],
) -> Result<Option<Vec<f64>>, DiscrimError> {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let nu: Vec<_> = (0..n)
        .map(|u| {
            let lo = if face.open[u] { 0.0 } else { (-q[u]).max(0.0) };
            lp.add_var(1.0, (lo, f64::INFINITY))
        })
        .collect();
    for &w in allowed {
        let mut e = LinearExpr::empty();
        for (u, &v) in nu.iter().enumerate() {
            e.add(v, signs[w * n + u]);
        }
        let rhs = if face.codes.contains(&w) {
            slack[w].max(0.0)
        } else {
            slack[w]
        };
        lp.add_constraint(e, ComparisonOp::Le, rhs);
    }
    match lp.solve() {
        Ok(outcome) => match outcome.into_solution() {
            Ok(sol) => Ok(Some(nu.iter().map(|&v| sol.var_value(v)).collect())),
            Err(_) => Ok(None),
        },
        Err(microlp::Error::Infeasible) => Ok(None),
        Err(e) => Err(lp_error("dual correction", e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrim::sign_matrix;

    #[test]
    fn unrestricted_cone_is_full() {
        let s = sign_matrix(1);
        let allowed: Vec<usize> = (0..4).collect();
        let f = cone_face(4, &s, &allowed).unwrap();
        assert!(f.is_full(4));
    }

    #[test]
    fn single_bell_projector_is_not_ppt() {
        // Only ψ_w itself plus nothing to compensate: T_A(ψ_w) has a
        // negative coefficient, so the cone is {0}.
        let s = sign_matrix(1);
        let f = cone_face(4, &s, &[1]).unwrap();
        assert!(f.codes.is_empty());
        assert!(f.open.iter().all(|&o| !o));
    }

    #[test]
    fn correction_restores_dropped_conditions() {
        let s = sign_matrix(1);
        let face = cone_face(4, &s, &[1]).unwrap();
        let q = vec![-1.0, 0.0, 0.0, 0.0];
        let slack = vec![0.0, -2.0, 0.0, 0.0];
        let nu = dual_correction(4, &s, &[1], &face, &q, &slack)
            .unwrap()
            .unwrap();
        assert!(nu[0] >= 1.0 - 1e-9);
        let snu: f64 = (0..4).map(|u| s[4 + u] * nu[u]).sum();
        assert!(snu <= -2.0 + 1e-9);
    }
}
