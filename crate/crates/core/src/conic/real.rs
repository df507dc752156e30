//! Real symmetric form of a [`ConicProblem`].
//!
//! A Hermitian block of order `n` becomes a real symmetric block of order
//! `2n` through `H ↦ [[Re H, −Im H], [Im H, Re H]]`, with every coefficient
//! halved so that real inner products equal complex ones. The embedding is
//! an algebra map, so interior-point iterates started from structured
//! points stay structured.

use num_complex::Complex64;

use crate::hermlin::CMatrix;

use super::problem::{BlockKind, ConicProblem, SparseHerm};

/// Symmetric sparse matrix with both `(i, j)` and `(j, i)` listed.
pub(crate) type Triplets = Vec<(u32, u32, f64)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RealKind {
    Psd,
    Diag,
}

#[derive(Debug, Clone)]
pub(crate) struct RealBlock {
    pub kind: RealKind,
    pub n: usize,
    pub source: BlockKind,
}

#[derive(Debug, Clone)]
pub(crate) struct Term {
    pub row: usize,
    pub block: usize,
    pub entries: Triplets,
}

#[derive(Debug, Clone)]
pub(crate) struct RealProblem {
    pub blocks: Vec<RealBlock>,
    pub c: Vec<Triplets>,
    pub terms: Vec<Term>,
    pub row_terms: Vec<Vec<usize>>,
    pub block_terms: Vec<Vec<usize>>,
    pub b: Vec<f64>,
}

fn expand(a: &SparseHerm, kind: BlockKind, n: usize) -> Triplets {
    let mut out = Vec::new();
    match kind {
        BlockKind::Nonneg => {
            for &(i, _, z) in a.entries() {
                out.push((i as u32, i as u32, z.re));
            }
        }
        BlockKind::Symmetric => {
            for &(i, j, z) in a.entries() {
                out.push((i as u32, j as u32, z.re));
                if i != j {
                    out.push((j as u32, i as u32, z.re));
                }
            }
        }
        BlockKind::Hermitian => {
            let h = |i: usize| (i + n) as u32;
            for &(i, j, z) in a.entries() {
                let (x, y) = (0.5 * z.re, 0.5 * z.im);
                let (iu, ju) = (i as u32, j as u32);
                if i == j {
                    out.push((iu, iu, x));
                    out.push((h(i), h(i), x));
                    continue;
                }
                if x != 0.0 {
                    out.extend([(iu, ju, x), (ju, iu, x), (h(i), h(j), x), (h(j), h(i), x)]);
                }
                if y != 0.0 {
                    // Im H sits in the lower-left block, −Im H in the upper right.
                    out.extend([(h(i), ju, y), (ju, h(i), y), (h(j), iu, -y), (iu, h(j), -y)]);
                }
            }
        }
    }
    merge(out)
}

fn merge(mut t: Triplets) -> Triplets {
    t.sort_by_key(|a| (a.0, a.1));
    let mut out: Triplets = Vec::with_capacity(t.len());
    for (i, j, v) in t {
        match out.last_mut() {
            Some(last) if last.0 == i && last.1 == j => last.2 += v,
            _ => out.push((i, j, v)),
        }
    }
    out.retain(|e| e.2 != 0.0);
    out
}

impl RealProblem {
    pub fn from_conic(p: &ConicProblem) -> Self {
        let blocks: Vec<RealBlock> = p
            .blocks()
            .iter()
            .map(|b| match b.kind {
                BlockKind::Hermitian => RealBlock {
                    kind: RealKind::Psd,
                    n: 2 * b.order,
                    source: b.kind,
                },
                BlockKind::Symmetric => RealBlock {
                    kind: RealKind::Psd,
                    n: b.order,
                    source: b.kind,
                },
                BlockKind::Nonneg => RealBlock {
                    kind: RealKind::Diag,
                    n: b.order,
                    source: b.kind,
                },
            })
            .collect();
        let c = p
            .objective()
            .iter()
            .zip(p.blocks())
            .map(|(a, b)| expand(a, b.kind, b.order))
            .collect();
        let mut terms = Vec::new();
        let mut row_terms = vec![Vec::new(); p.num_rows()];
        let mut block_terms = vec![Vec::new(); blocks.len()];
        for (r, row) in p.rows().iter().enumerate() {
            // Merge repeated blocks within a row.
            let mut per_block: Vec<(usize, Triplets)> = Vec::new();
            for (blk, a) in &row.terms {
                let b = &p.blocks()[*blk];
                let e = expand(a, b.kind, b.order);
                match per_block.iter_mut().find(|(x, _)| x == blk) {
                    Some((_, t)) => t.extend(e),
                    None => per_block.push((*blk, e)),
                }
            }
            for (blk, e) in per_block {
                let e = merge(e);
                if e.is_empty() {
                    continue;
                }
                row_terms[r].push(terms.len());
                block_terms[blk].push(terms.len());
                terms.push(Term {
                    row: r,
                    block: blk,
                    entries: e,
                });
            }
        }
        Self {
            blocks,
            c,
            terms,
            row_terms,
            block_terms,
            b: p.rhs(),
        }
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    /// Total barrier order `Σ n_b`.
    pub fn nu(&self) -> usize {
        self.blocks.iter().map(|b| b.n).sum()
    }

    pub fn zero_blocks(&self) -> Vec<Vec<f64>> {
        self.blocks
            .iter()
            .map(|b| match b.kind {
                RealKind::Psd => vec![0.0; b.n * b.n],
                RealKind::Diag => vec![0.0; b.n],
            })
            .collect()
    }

    pub fn identity_blocks(&self, scale: f64) -> Vec<Vec<f64>> {
        self.blocks
            .iter()
            .map(|b| match b.kind {
                RealKind::Psd => {
                    let mut v = vec![0.0; b.n * b.n];
                    for i in 0..b.n {
                        v[i * b.n + i] = scale;
                    }
                    v
                }
                RealKind::Diag => vec![scale; b.n],
            })
            .collect()
    }

    fn apply(entries: &Triplets, kind: RealKind, n: usize, x: &[f64]) -> f64 {
        match kind {
            RealKind::Psd => entries
                .iter()
                .map(|&(i, j, v)| v * x[i as usize * n + j as usize])
                .sum(),
            RealKind::Diag => entries.iter().map(|&(i, _, v)| v * x[i as usize]).sum(),
        }
    }

    /// `A(X)`.
    pub fn forward(&self, x: &[Vec<f64>]) -> Vec<f64> {
        let mut out = vec![0.0; self.m()];
        for t in &self.terms {
            let b = &self.blocks[t.block];
            out[t.row] += Self::apply(&t.entries, b.kind, b.n, &x[t.block]);
        }
        out
    }

    /// `⟨C, X⟩`.
    pub fn objective(&self, x: &[Vec<f64>]) -> f64 {
        self.c
            .iter()
            .zip(&self.blocks)
            .zip(x)
            .map(|((c, b), xb)| Self::apply(c, b.kind, b.n, xb))
            .sum()
    }

    fn scatter(entries: &Triplets, kind: RealKind, n: usize, a: f64, out: &mut [f64]) {
        match kind {
            RealKind::Psd => {
                for &(i, j, v) in entries {
                    out[i as usize * n + j as usize] += a * v;
                }
            }
            RealKind::Diag => {
                for &(i, _, v) in entries {
                    out[i as usize] += a * v;
                }
            }
        }
    }

    /// `Aᵀ y`.
    pub fn adjoint(&self, y: &[f64]) -> Vec<Vec<f64>> {
        let mut out = self.zero_blocks();
        for t in &self.terms {
            let b = &self.blocks[t.block];
            Self::scatter(&t.entries, b.kind, b.n, y[t.row], &mut out[t.block]);
        }
        out
    }

    pub fn c_blocks(&self) -> Vec<Vec<f64>> {
        let mut out = self.zero_blocks();
        for (bi, c) in self.c.iter().enumerate() {
            let b = &self.blocks[bi];
            Self::scatter(c, b.kind, b.n, 1.0, &mut out[bi]);
        }
        out
    }

    /// Maps a real iterate block back to the original cone.
    pub fn project(&self, block: usize, x: &[f64]) -> ProjectedBlock {
        let b = &self.blocks[block];
        match b.source {
            BlockKind::Nonneg => ProjectedBlock::Diagonal(x.to_vec()),
            BlockKind::Symmetric => {
                let n = b.n;
                ProjectedBlock::Matrix(CMatrix::from_fn(n, n, |i, j| {
                    Complex64::new(0.5 * (x[i * n + j] + x[j * n + i]), 0.0)
                }))
            }
            BlockKind::Hermitian => {
                let n2 = b.n;
                let n = n2 / 2;
                let at = |i: usize, j: usize| x[i * n2 + j];
                let m = CMatrix::from_fn(n, n, |i, j| {
                    let re = 0.5 * (at(i, j) + at(i + n, j + n));
                    let im = 0.5 * (at(i + n, j) - at(i, j + n));
                    Complex64::new(re, im)
                });
                ProjectedBlock::Matrix(m.hermitian_part())
            }
        }
    }
}

/// Value of one variable block in the original cone.
#[derive(Debug, Clone, PartialEq)]
pub enum ProjectedBlock {
    Matrix(CMatrix),
    Diagonal(Vec<f64>),
}

impl ProjectedBlock {
    pub fn as_matrix(&self) -> Option<&CMatrix> {
        match self {
            ProjectedBlock::Matrix(m) => Some(m),
            ProjectedBlock::Diagonal(_) => None,
        }
    }

    pub fn as_diagonal(&self) -> Option<&[f64]> {
        match self {
            ProjectedBlock::Matrix(_) => None,
            ProjectedBlock::Diagonal(d) => Some(d),
        }
    }

    /// `⟨A, X⟩` for a coefficient of this block.
    pub fn inner(&self, a: &SparseHerm) -> f64 {
        match self {
            ProjectedBlock::Matrix(m) => a.inner(m),
            ProjectedBlock::Diagonal(d) => a.inner_diag(d),
        }
    }
}

/// Small dense kernels on row-major square matrices.
pub(crate) mod dense {
    pub fn matmul(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut c = vec![0.0; n * n];
        for i in 0..n {
            let ci = &mut c[i * n..(i + 1) * n];
            for k in 0..n {
                let aik = a[i * n + k];
                if aik == 0.0 {
                    continue;
                }
                let bk = &b[k * n..(k + 1) * n];
                for (cij, bkj) in ci.iter_mut().zip(bk) {
                    *cij += aik * bkj;
                }
            }
        }
        c
    }

    pub fn symmetrize(n: usize, a: &mut [f64]) {
        for i in 0..n {
            for j in 0..i {
                let v = 0.5 * (a[i * n + j] + a[j * n + i]);
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
    }

    /// Lower Cholesky factor; `None` when a pivot is not positive.
    pub fn cholesky(n: usize, a: &[f64]) -> Option<Vec<f64>> {
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = a[j * n + j];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in (j + 1)..n {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }
        Some(l)
    }

    /// `L⁻¹` for lower-triangular `L`.
    pub fn lower_inverse(n: usize, l: &[f64]) -> Vec<f64> {
        let mut inv = vec![0.0; n * n];
        for j in 0..n {
            inv[j * n + j] = 1.0 / l[j * n + j];
            for i in (j + 1)..n {
                let mut s = 0.0;
                for k in j..i {
                    s -= l[i * n + k] * inv[k * n + j];
                }
                inv[i * n + j] = s / l[i * n + i];
            }
        }
        inv
    }

    /// `A⁻¹` from the Cholesky factor of `A`.
    pub fn inverse_from_cholesky(n: usize, l: &[f64]) -> Vec<f64> {
        let li = lower_inverse(n, l);
        // A⁻¹ = L⁻ᵀ L⁻¹
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = 0.0;
                for k in i..n {
                    s += li[k * n + i] * li[k * n + j];
                }
                out[i * n + j] = s;
                out[j * n + i] = s;
            }
        }
        out
    }

    /// `L⁻¹ B L⁻ᵀ` given `L⁻¹`.
    pub fn congruence(n: usize, li: &[f64], b: &[f64]) -> Vec<f64> {
        let t = matmul(n, li, b);
        let mut lit = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                lit[i * n + j] = li[j * n + i];
            }
        }
        let mut out = matmul(n, &t, &lit);
        symmetrize(n, &mut out);
        out
    }

    pub fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermlin::{real_embedding, ONE};

    fn herm(n: usize, seed: u64) -> CMatrix {
        let mut s = seed;
        let mut next = move || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let m = CMatrix::from_fn(n, n, |_, _| Complex64::new(next(), next()));
        m.hermitian_part()
    }

    #[test]
    fn embedded_coefficients_preserve_inner_products() {
        let a = herm(3, 1);
        let x = herm(3, 2);
        let mut p = ConicProblem::new();
        let blk = p.add_block(BlockKind::Hermitian, 3, "X");
        p.add_row(vec![(blk, SparseHerm::from_matrix(&a))], 0.0);
        let rp = RealProblem::from_conic(&p);
        let xe = real_embedding(&x);
        let lhs = rp.forward(&[xe])[0];
        let rhs = (&a * &x).trace().re;
        assert!((lhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn projection_inverts_embedding() {
        let x = herm(4, 7);
        let mut p = ConicProblem::new();
        p.add_block(BlockKind::Hermitian, 4, "X");
        let rp = RealProblem::from_conic(&p);
        let back = rp.project(0, &real_embedding(&x));
        assert!(back.as_matrix().unwrap().max_abs_diff(&x).unwrap() < 1e-15);
    }

    #[test]
    fn adjoint_is_transpose_of_forward() {
        let mut p = ConicProblem::new();
        let b0 = p.add_block(BlockKind::Hermitian, 2, "X");
        let b1 = p.add_block(BlockKind::Nonneg, 3, "x");
        let mut a = SparseHerm::new();
        a.push(0, 1, Complex64::new(0.3, -0.4));
        a.push(1, 1, ONE);
        p.add_row(vec![(b0, a), (b1, SparseHerm::diagonal(2, 2.0))], 1.0);
        p.add_row(vec![(b0, SparseHerm::diagonal(0, 1.0))], 1.0);
        let rp = RealProblem::from_conic(&p);
        let x = vec![real_embedding(&herm(2, 3)), vec![0.1, 0.2, 0.3]];
        let y = [0.7, -1.1];
        let ax = rp.forward(&x);
        let aty = rp.adjoint(&y);
        let lhs: f64 = ax.iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = aty.iter().zip(&x).map(|(a, b)| dense::dot(a, b)).sum();
        assert!((lhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn dense_inverse() {
        let a = vec![4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0];
        let l = dense::cholesky(3, &a).unwrap();
        let inv = dense::inverse_from_cholesky(3, &l);
        let id = dense::matmul(3, &a, &inv);
        for i in 0..3 {
            for j in 0..3 {
                assert!((id[i * 3 + j] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        assert!(dense::cholesky(2, &[1.0, 2.0, 2.0, 1.0]).is_none());
    }
}
