//! Block-sparse Schur complement `M_rs = Tr(A_r X A_s S⁻¹)`.
//!
//! Rows are grouped by their support (the set of variable blocks they
//! touch) and the groups are ordered by support size. Two groups interact
//! only when their supports intersect, so problems whose rows couple a few
//! blocks each — plus a few global rows — give an arrow-shaped `M` that is
//! factored blockwise with dense kernels.

use faer::linalg::matmul::matmul;
use faer::linalg::solvers::Llt;
use faer::linalg::triangular_solve::{
    solve_lower_triangular_in_place, solve_upper_triangular_in_place,
};
use faer::{Accum, Mat, Par, Side};

use super::real::{dense, RealKind, RealProblem};
use super::ConicError;

/// Diagonal-block density above which nonnegative blocks use a dense
/// `W Wᵀ` product.
const DENSE_DIAG_THRESHOLD: f64 = 0.25;

#[derive(Debug, Clone)]
pub(crate) struct SchurLayout {
    groups: Vec<Vec<usize>>,
    row_pos: Vec<(usize, usize)>,
    /// `nz[g * G + h]` for `g ≥ h`, including fill.
    nz: Vec<bool>,
}

impl SchurLayout {
    pub fn new(rp: &RealProblem) -> Result<Self, ConicError> {
        let m = rp.m();
        let mut supports: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
        for r in 0..m {
            let mut s: Vec<usize> = rp.row_terms[r].iter().map(|&t| rp.terms[t].block).collect();
            s.sort_unstable();
            s.dedup();
            if s.is_empty() {
                return Err(ConicError::InvalidProblem(format!(
                    "row {r} has no nonzero coefficient"
                )));
            }
            match supports.iter_mut().find(|(sup, _)| *sup == s) {
                Some((_, rows)) => rows.push(r),
                None => supports.push((s, vec![r])),
            }
        }
        supports.sort_by(|a, b| (a.0.len(), a.0[0]).cmp(&(b.0.len(), b.0[0])));
        let gcount = supports.len();
        let mut row_pos = vec![(0, 0); m];
        for (g, (_, rows)) in supports.iter().enumerate() {
            for (l, &r) in rows.iter().enumerate() {
                row_pos[r] = (g, l);
            }
        }
        let mut nz = vec![false; gcount * gcount];
        for g in 0..gcount {
            for h in 0..=g {
                nz[g * gcount + h] = supports[g].0.iter().any(|b| supports[h].0.contains(b));
            }
        }
        // Symbolic block elimination.
        for h in 0..gcount {
            let below: Vec<usize> = ((h + 1)..gcount).filter(|&g| nz[g * gcount + h]).collect();
            for (a, &g1) in below.iter().enumerate() {
                for &g2 in &below[..=a] {
                    nz[g1 * gcount + g2] = true;
                }
            }
        }
        let groups = supports.into_iter().map(|(_, rows)| rows).collect();
        Ok(Self {
            groups,
            row_pos,
            nz,
        })
    }

    #[cfg(test)]
    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    fn is_nz(&self, g: usize, h: usize) -> bool {
        self.nz[g * self.groups.len() + h]
    }

    fn empty_matrix(&self) -> SchurMatrix {
        let gc = self.groups.len();
        let mut blocks = Vec::with_capacity(gc * gc);
        for g in 0..gc {
            for h in 0..gc {
                blocks.push(if h <= g && self.is_nz(g, h) {
                    Some(Mat::zeros(self.groups[g].len(), self.groups[h].len()))
                } else {
                    None
                });
            }
        }
        SchurMatrix {
            layout: self.clone(),
            blocks,
            regularized: 0,
        }
    }

    /// Assembles `M` for the scaling pair `(X, S⁻¹)`; for nonnegative blocks
    /// `sinv` holds `1/s` elementwise.
    pub fn assemble(&self, rp: &RealProblem, x: &[Vec<f64>], sinv: &[Vec<f64>]) -> SchurMatrix {
        let mut mat = self.empty_matrix();
        for (b, blk) in rp.blocks.iter().enumerate() {
            let terms = &rp.block_terms[b];
            if terms.is_empty() {
                continue;
            }
            match blk.kind {
                RealKind::Psd => self.assemble_psd(rp, b, &x[b], &sinv[b], &mut mat),
                RealKind::Diag => {
                    let d: Vec<f64> = x[b].iter().zip(&sinv[b]).map(|(a, c)| a * c).collect();
                    self.assemble_diag(rp, b, &d, &mut mat);
                }
            }
        }
        mat
    }

    fn add(&self, mat: &mut SchurMatrix, r: usize, s: usize, v: f64) {
        let (gr, lr) = self.row_pos[r];
        let (gs, ls) = self.row_pos[s];
        let gc = self.groups.len();
        let blk = mat.blocks[gr * gc + gs]
            .as_mut()
            .expect("structural nonzero");
        blk[(lr, ls)] += v;
    }

    fn assemble_psd(
        &self,
        rp: &RealProblem,
        b: usize,
        x: &[f64],
        sinv: &[f64],
        mat: &mut SchurMatrix,
    ) {
        let n = rp.blocks[b].n;
        let terms = &rp.block_terms[b];
        let mut g = vec![0.0; n * n];
        for &ts in terms {
            let src = &rp.terms[ts];
            let (gs, _) = self.row_pos[src.row];
            // G = X A_s S⁻¹
            if src.entries.len() > 2 * n {
                let mut a = vec![0.0; n * n];
                for &(i, j, v) in &src.entries {
                    a[i as usize * n + j as usize] += v;
                }
                g = dense::matmul(n, &dense::matmul(n, x, &a), sinv);
            } else {
                g.iter_mut().for_each(|v| *v = 0.0);
                for &(k, l, c) in &src.entries {
                    let (k, l) = (k as usize, l as usize);
                    let srow = &sinv[l * n..(l + 1) * n];
                    for i in 0..n {
                        let f = c * x[i * n + k];
                        if f == 0.0 {
                            continue;
                        }
                        for (gij, sj) in g[i * n..(i + 1) * n].iter_mut().zip(srow) {
                            *gij += f * sj;
                        }
                    }
                }
            }
            for &tr in terms {
                let dst = &rp.terms[tr];
                if self.row_pos[dst.row].0 < gs {
                    continue;
                }
                let v: f64 = dst
                    .entries
                    .iter()
                    .map(|&(i, j, a)| a * g[i as usize * n + j as usize])
                    .sum();
                self.add(mat, dst.row, src.row, v);
            }
        }
    }

    fn assemble_diag(&self, rp: &RealProblem, b: usize, d: &[f64], mat: &mut SchurMatrix) {
        let n = rp.blocks[b].n;
        let terms = &rp.block_terms[b];
        let nnz: usize = terms.iter().map(|&t| rp.terms[t].entries.len()).sum();
        if nnz as f64 > DENSE_DIAG_THRESHOLD * (terms.len() * n) as f64 && terms.len() > 32 {
            let mut w = Mat::<f64>::zeros(terms.len(), n);
            for (a, &t) in terms.iter().enumerate() {
                for &(i, _, v) in &rp.terms[t].entries {
                    w[(a, i as usize)] = v * d[i as usize].sqrt();
                }
            }
            let mut prod = Mat::<f64>::zeros(terms.len(), terms.len());
            matmul(
                prod.as_mut(),
                Accum::Replace,
                w.as_ref(),
                w.transpose(),
                1.0,
                Par::Seq,
            );
            for (a, &ta) in terms.iter().enumerate() {
                let ra = rp.terms[ta].row;
                for (c, &tc) in terms.iter().enumerate() {
                    let rc = rp.terms[tc].row;
                    if self.row_pos[ra].0 >= self.row_pos[rc].0 {
                        self.add(mat, ra, rc, prod[(a, c)]);
                    }
                }
            }
            return;
        }
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &t in terms {
            let term = &rp.terms[t];
            for &(i, _, v) in &term.entries {
                cols[i as usize].push((term.row, v));
            }
        }
        for (i, col) in cols.iter().enumerate() {
            for &(r, a) in col {
                for &(s, c) in col {
                    if self.row_pos[r].0 >= self.row_pos[s].0 {
                        self.add(mat, r, s, d[i] * a * c);
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct SchurMatrix {
    layout: SchurLayout,
    blocks: Vec<Option<Mat<f64>>>,
    regularized: usize,
}

impl SchurMatrix {
    /// Number of diagonal shifts applied during the last factorisation.
    pub fn regularized(&self) -> usize {
        self.regularized
    }

    /// Smallest ratio `L_ii² / M_ii` over all pivots, used to detect
    /// dependent rows.
    pub fn factor(&mut self) -> Result<f64, ConicError> {
        let gc = self.layout.groups.len();
        // Shifts are scaled by the original diagonal: after elimination a
        // trailing block can be much smaller than the roundoff it carries.
        let dmax = (0..gc)
            .filter_map(|h| self.blocks[h * gc + h].as_ref())
            .flat_map(|d| (0..d.nrows()).map(move |i| d[(i, i)].abs()))
            .fold(0.0, f64::max)
            .max(1e-300);
        let original = self.blocks.clone();
        let err = match self.eliminate(dmax, 0.0) {
            Ok(r) => return Ok(r),
            Err(e) => e,
        };
        // A nearly singular pivot block can blow up the fill so far that no
        // local shift repairs the trailing blocks. Restart with the whole
        // matrix shifted, which keeps every pivot away from zero.
        let mut shift = 1e-12 * dmax;
        while shift <= dmax {
            self.blocks = original.clone();
            self.regularized += 1;
            if let Ok(r) = self.eliminate(dmax, shift) {
                return Ok(r);
            }
            shift *= 100.0;
        }
        Err(err)
    }

    fn eliminate(&mut self, dmax: f64, global_shift: f64) -> Result<f64, ConicError> {
        let gc = self.layout.groups.len();
        let mut min_ratio = f64::INFINITY;
        for h in 0..gc {
            let idx = h * gc + h;
            let mut diag = self.blocks[idx].take().expect("diagonal block");
            for i in 0..diag.nrows() {
                diag[(i, i)] += global_shift;
            }
            let orig: Vec<f64> = (0..diag.nrows()).map(|i| diag[(i, i)]).collect();
            let mut shift = 0.0;
            let l = loop {
                match Llt::new(diag.as_ref(), Side::Lower) {
                    Ok(f) => break f.L().to_owned(),
                    Err(_) => {
                        shift = if shift == 0.0 {
                            1e-14 * dmax
                        } else {
                            shift * 100.0
                        };
                        if shift > 1e-4 * dmax.max(1.0) || !shift.is_finite() {
                            return Err(ConicError::Numerical(
                                "Schur complement is not positive definite".into(),
                            ));
                        }
                        for i in 0..diag.nrows() {
                            diag[(i, i)] = orig[i] + shift;
                        }
                        self.regularized += 1;
                    }
                }
            };
            for i in 0..l.nrows() {
                if orig[i] > 0.0 {
                    min_ratio = min_ratio.min(l[(i, i)] * l[(i, i)] / orig[i]);
                }
            }
            for g in (h + 1)..gc {
                if let Some(b) = self.blocks[g * gc + h].as_mut() {
                    // L_gh L_hhᵀ = M_gh
                    solve_lower_triangular_in_place(
                        l.as_ref(),
                        b.as_mut().transpose_mut(),
                        Par::Seq,
                    );
                }
            }
            for g1 in (h + 1)..gc {
                if self.blocks[g1 * gc + h].is_none() {
                    continue;
                }
                for g2 in (h + 1)..=g1 {
                    if self.blocks[g2 * gc + h].is_none() {
                        continue;
                    }
                    let mut dst = self.blocks[g1 * gc + g2].take().expect("fill block");
                    {
                        let a = self.blocks[g1 * gc + h].as_ref().unwrap();
                        let b = self.blocks[g2 * gc + h].as_ref().unwrap();
                        matmul(
                            dst.as_mut(),
                            Accum::Add,
                            a.as_ref(),
                            b.transpose(),
                            -1.0,
                            Par::Seq,
                        );
                    }
                    self.blocks[g1 * gc + g2] = Some(dst);
                }
            }
            self.blocks[idx] = Some(l);
        }
        Ok(min_ratio)
    }

    /// Solves `M Δy = rhs` with the factor from [`SchurMatrix::factor`].
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let lay = &self.layout;
        let gc = lay.groups.len();
        let mut parts: Vec<Mat<f64>> = lay
            .groups
            .iter()
            .map(|rows| Mat::from_fn(rows.len(), 1, |i, _| rhs[rows[i]]))
            .collect();
        for h in 0..gc {
            let mut z = std::mem::replace(&mut parts[h], Mat::zeros(0, 0));
            for j in 0..h {
                if let Some(l) = &self.blocks[h * gc + j] {
                    matmul(
                        z.as_mut(),
                        Accum::Add,
                        l.as_ref(),
                        parts[j].as_ref(),
                        -1.0,
                        Par::Seq,
                    );
                }
            }
            solve_lower_triangular_in_place(
                self.blocks[h * gc + h].as_ref().unwrap().as_ref(),
                z.as_mut(),
                Par::Seq,
            );
            parts[h] = z;
        }
        for h in (0..gc).rev() {
            let mut z = std::mem::replace(&mut parts[h], Mat::zeros(0, 0));
            for g in (h + 1)..gc {
                if let Some(l) = &self.blocks[g * gc + h] {
                    matmul(
                        z.as_mut(),
                        Accum::Add,
                        l.transpose(),
                        parts[g].as_ref(),
                        -1.0,
                        Par::Seq,
                    );
                }
            }
            solve_upper_triangular_in_place(
                self.blocks[h * gc + h].as_ref().unwrap().transpose(),
                z.as_mut(),
                Par::Seq,
            );
            parts[h] = z;
        }
        let mut out = vec![0.0; rhs.len()];
        for (g, rows) in lay.groups.iter().enumerate() {
            for (l, &r) in rows.iter().enumerate() {
                out[r] = parts[g][(l, 0)];
            }
        }
        out
    }
}
