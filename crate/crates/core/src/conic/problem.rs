use num_complex::Complex64;

use crate::hermlin::{CMatrix, HermOp};

use super::ConicError;

/// Cone of a variable block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// Complex Hermitian positive semidefinite matrices.
    Hermitian,
    /// Real symmetric positive semidefinite matrices.
    Symmetric,
    /// Nonnegative vectors, stored as the diagonal of a matrix.
    Nonneg,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub kind: BlockKind,
    pub order: usize,
    pub name: String,
}

/// Sparse Hermitian coefficient matrix stored by its upper triangle.
///
/// An entry `(i, j, z)` with `i < j` stands for `z` at `(i, j)` and `z̄` at
/// `(j, i)`; diagonal entries are real.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseHerm {
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseHerm {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `z` at `(i, j)` and `z̄` at `(j, i)`. For `i == j` only the real
    /// part of `z` is kept. Repeated positions accumulate.
    pub fn push(&mut self, i: usize, j: usize, z: Complex64) {
        let (i, j, z) = match i.cmp(&j) {
            std::cmp::Ordering::Less => (i, j, z),
            std::cmp::Ordering::Greater => (j, i, z.conj()),
            std::cmp::Ordering::Equal => (i, i, Complex64::new(z.re, 0.0)),
        };
        if z != Complex64::new(0.0, 0.0) {
            self.entries.push((i, j, z));
        }
    }

    pub fn diagonal(pos: usize, value: f64) -> Self {
        let mut s = Self::new();
        s.push(pos, pos, Complex64::new(value, 0.0));
        s
    }

    /// Every entry of the upper triangle of `m` with modulus above zero.
    pub fn from_matrix(m: &CMatrix) -> Self {
        let mut s = Self::new();
        for i in 0..m.rows() {
            for j in i..m.cols() {
                s.push(i, j, m[(i, j)]);
            }
        }
        s
    }

    pub fn from_herm(h: &HermOp) -> Self {
        Self::from_matrix(h.matrix())
    }

    /// Merges repeated positions and drops cancelled entries.
    pub fn compress(&mut self) {
        self.entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut out: Vec<(usize, usize, Complex64)> = Vec::with_capacity(self.entries.len());
        for &(i, j, z) in &self.entries {
            match out.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += z,
                _ => out.push((i, j, z)),
            }
        }
        out.retain(|e| e.2.norm() != 0.0);
        self.entries = out;
    }

    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|&(i, j, z)| (i, j, z * a))
                .collect(),
        }
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.iter().map(|e| e.1).max()
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|e| e.2.im == 0.0)
    }

    /// `Re Tr(A X)` for Hermitian `X`.
    pub fn inner(&self, x: &CMatrix) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, z)| {
                if i == j {
                    z.re * x[(i, i)].re
                } else {
                    // z x_ji + z̄ x_ij = 2 Re(z x_ji)
                    2.0 * (z * x[(j, i)]).re
                }
            })
            .sum()
    }

    /// Inner product with a diagonal (nonnegative-block) variable.
    pub fn inner_diag(&self, x: &[f64]) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.0 == e.1)
            .map(|&(i, _, z)| z.re * x[i])
            .sum()
    }

    /// Adds `a · A` into the dense matrix `m`.
    pub fn add_to(&self, m: &mut CMatrix, a: f64) {
        for &(i, j, z) in &self.entries {
            m[(i, j)] += z * a;
            if i != j {
                m[(j, i)] += z.conj() * a;
            }
        }
    }

    pub fn to_dense(&self, n: usize) -> CMatrix {
        let mut m = CMatrix::zeros(n, n);
        self.add_to(&mut m, 1.0);
        m
    }
}

/// One equality `Σ_b ⟨A_b, X_b⟩ = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub terms: Vec<(usize, SparseHerm)>,
    pub rhs: f64,
}

/// Primal-dual conic program
///
/// ```text
/// maximise    Σ_b ⟨C_b, X_b⟩
/// subject to  Σ_b ⟨A_{r,b}, X_b⟩ = b_r,   X_b in cone_b,
/// ```
///
/// with dual `minimise bᵀy` subject to `S_b = Σ_r y_r A_{r,b} − C_b` in
/// `cone_b`. Inner products are `⟨A, X⟩ = Re Tr(A X)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConicProblem {
    blocks: Vec<Block>,
    objective: Vec<SparseHerm>,
    rows: Vec<Constraint>,
}

impl ConicProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_block(&mut self, kind: BlockKind, order: usize, name: impl Into<String>) -> usize {
        self.blocks.push(Block {
            kind,
            order,
            name: name.into(),
        });
        self.objective.push(SparseHerm::new());
        self.blocks.len() - 1
    }

    pub fn set_objective(&mut self, block: usize, c: SparseHerm) {
        self.objective[block] = c;
    }

    pub fn objective_mut(&mut self, block: usize) -> &mut SparseHerm {
        &mut self.objective[block]
    }

    pub fn add_row(&mut self, terms: Vec<(usize, SparseHerm)>, rhs: f64) -> usize {
        self.rows.push(Constraint { terms, rhs });
        self.rows.len() - 1
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn objective(&self) -> &[SparseHerm] {
        &self.objective
    }

    pub fn rows(&self) -> &[Constraint] {
        &self.rows
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rhs(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.rhs).collect()
    }

    /// Checks indices, cone compatibility and finiteness.
    pub fn validate(&self) -> Result<(), ConicError> {
        if self.blocks.is_empty() {
            return Err(ConicError::InvalidProblem("no variable blocks".into()));
        }
        let check = |b: usize, a: &SparseHerm, what: &str| -> Result<(), ConicError> {
            let block = self.blocks.get(b).ok_or_else(|| {
                ConicError::InvalidProblem(format!("{what} refers to missing block {b}"))
            })?;
            if block.order == 0 {
                return Err(ConicError::InvalidProblem(format!("block {b} has order 0")));
            }
            if let Some(mx) = a.max_index() {
                if mx >= block.order {
                    return Err(ConicError::InvalidProblem(format!(
                        "{what}: index {mx} out of range for block {b} of order {}",
                        block.order
                    )));
                }
            }
            if a.entries()
                .iter()
                .any(|e| !e.2.re.is_finite() || !e.2.im.is_finite())
            {
                return Err(ConicError::InvalidProblem(format!(
                    "{what}: non-finite coefficient"
                )));
            }
            match block.kind {
                BlockKind::Symmetric if !a.is_real() => Err(ConicError::InvalidProblem(format!(
                    "{what}: complex coefficient on real block {b}"
                ))),
                BlockKind::Nonneg if a.entries().iter().any(|e| e.0 != e.1) => {
                    Err(ConicError::InvalidProblem(format!(
                        "{what}: off-diagonal coefficient on nonnegative block {b}"
                    )))
                }
                _ => Ok(()),
            }
        };
        for (b, c) in self.objective.iter().enumerate() {
            check(b, c, "objective")?;
        }
        for (r, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(ConicError::InvalidProblem(format!(
                    "row {r}: non-finite right-hand side"
                )));
            }
            for (b, a) in &row.terms {
                check(*b, a, &format!("row {r}"))?;
            }
        }
        Ok(())
    }
}

/// `maximise cᵀx` subject to `A x = b`, `x ≥ 0`, with `A` given by sparse
/// rows of `(column, value)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub c: Vec<f64>,
    pub rows: Vec<Vec<(usize, f64)>>,
    pub b: Vec<f64>,
}

impl LinearProgram {
    pub fn to_conic(&self) -> ConicProblem {
        let n = self.c.len();
        let mut p = ConicProblem::new();
        let blk = p.add_block(BlockKind::Nonneg, n, "x");
        let mut obj = SparseHerm::new();
        for (i, &ci) in self.c.iter().enumerate() {
            obj.push(i, i, Complex64::new(ci, 0.0));
        }
        p.set_objective(blk, obj);
        for (row, &rhs) in self.rows.iter().zip(&self.b) {
            let mut a = SparseHerm::new();
            for &(i, v) in row {
                a.push(i, i, Complex64::new(v, 0.0));
            }
            p.add_row(vec![(blk, a)], rhs);
        }
        p
    }
}
