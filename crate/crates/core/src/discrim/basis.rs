//! Real coordinates on Hermitian matrices, used to express matrix equality
//! constraints as scalar rows.

use num_complex::Complex64;

use crate::conic::SparseHerm;
use crate::hermlin::{CMatrix, HermOp, I};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Part {
    Diag,
    Re,
    Im,
}

/// One coordinate `⟨E, X⟩` of a Hermitian `X`: `X_pp`, `Re X_pq` or
/// `Im X_qp` for `p < q`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BasisElem {
    pub p: usize,
    pub q: usize,
    pub part: Part,
}

impl BasisElem {
    pub fn matrix(&self) -> SparseHerm {
        let mut s = SparseHerm::new();
        match self.part {
            Part::Diag => s.push(self.p, self.p, Complex64::new(1.0, 0.0)),
            Part::Re => s.push(self.p, self.q, Complex64::new(0.5, 0.0)),
            Part::Im => s.push(self.p, self.q, I * 0.5),
        }
        s
    }

    /// `m += y · E`.
    pub fn accumulate(&self, m: &mut CMatrix, y: f64) {
        match self.part {
            Part::Diag => m[(self.p, self.p)] += y,
            Part::Re => {
                m[(self.p, self.q)] += y * 0.5;
                m[(self.q, self.p)] += y * 0.5;
            }
            Part::Im => {
                m[(self.p, self.q)] += I * (y * 0.5);
                m[(self.q, self.p)] -= I * (y * 0.5);
            }
        }
    }
}

/// Coordinates spanning the Hermitian (or, with `complex = false`, the
/// real symmetric) matrices of order `n`.
pub(crate) fn hermitian_basis(n: usize, complex: bool) -> Vec<BasisElem> {
    let mut out = Vec::with_capacity(if complex { n * n } else { n * (n + 1) / 2 });
    for p in 0..n {
        out.push(BasisElem {
            p,
            q: p,
            part: Part::Diag,
        });
        for q in (p + 1)..n {
            out.push(BasisElem {
                p,
                q,
                part: Part::Re,
            });
            if complex {
                out.push(BasisElem {
                    p,
                    q,
                    part: Part::Im,
                });
            }
        }
    }
    out
}

/// Partial transpose on the first factor of a sparse Hermitian matrix.
pub(crate) fn sparse_partial_transpose(a: &SparseHerm, dim_b: usize) -> SparseHerm {
    let mut out = SparseHerm::new();
    for &(r, c, z) in a.entries() {
        let (i, k) = (r / dim_b, r % dim_b);
        let (j, l) = (c / dim_b, c % dim_b);
        out.push(j * dim_b + k, i * dim_b + l, z);
    }
    out.compress();
    out
}

/// `Σ_r y_r E_r` as a Hermitian operator.
pub(crate) fn assemble(
    dim_a: usize,
    dim_b: usize,
    basis: &[BasisElem],
    y: &[f64],
    scale: f64,
) -> HermOp {
    let n = dim_a * dim_b;
    let mut m = CMatrix::zeros(n, n);
    for (e, &v) in basis.iter().zip(y) {
        e.accumulate(&mut m, v * scale);
    }
    HermOp::new(dim_a, dim_b, m).expect("assembled from a Hermitian basis")
}

/// Whether every entry of every operator is real.
pub(crate) fn all_real<'a>(ops: impl IntoIterator<Item = &'a HermOp>) -> bool {
    ops.into_iter()
        .all(|h| h.matrix().data().iter().all(|z| z.im == 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermlin::ONE;

    #[test]
    fn coordinates_recover_matrix() {
        let mut h = CMatrix::from_real_diag(&[1.0, -2.0, 0.5]);
        h[(0, 2)] = Complex64::new(0.3, -0.7);
        h[(2, 0)] = Complex64::new(0.3, 0.7);
        let basis = hermitian_basis(3, true);
        assert_eq!(basis.len(), 9);
        // y_r = ⟨E_r, H⟩ scaled by the inverse Gram diagonal (1 or 2).
        let y: Vec<f64> = basis
            .iter()
            .map(|e| {
                let g = if e.part == Part::Diag { 1.0 } else { 2.0 };
                e.matrix().inner(&h) * g
            })
            .collect();
        let back = assemble(3, 1, &basis, &y, 1.0);
        assert!(back.matrix().max_abs_diff(&h).unwrap() < 1e-15);
    }

    #[test]
    fn sparse_partial_transpose_matches_dense() {
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 3)] = Complex64::new(0.5, 0.25);
        m[(3, 0)] = Complex64::new(0.5, -0.25);
        m[(1, 1)] = ONE;
        let h = HermOp::new(2, 2, m.clone()).unwrap();
        let sp = sparse_partial_transpose(&SparseHerm::from_matrix(&m), 2);
        assert!(
            sp.to_dense(4)
                .max_abs_diff(h.partial_transpose().matrix())
                .unwrap()
                < 1e-15
        );
    }
}
