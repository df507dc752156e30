use num_complex::Complex64;

use super::eigen::herm_eigvals;
use super::matrix::CMatrix;
use super::LinalgError;

/// Relative Hermiticity tolerance accepted by [`HermOp::new`].
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Default relative PSD tolerance.
pub const PSD_TOL: f64 = 1e-9;

/// Hermitian operator on `C^dim_a ⊗ C^dim_b`. Row/column index `i·dim_b + k`
/// addresses Alice's basis vector `i` and Bob's basis vector `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermOp {
    dim_a: usize,
    dim_b: usize,
    matrix: CMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

impl HermOp {
    pub fn new(dim_a: usize, dim_b: usize, matrix: CMatrix) -> Result<Self, LinalgError> {
        let n = dim_a
            .checked_mul(dim_b)
            .ok_or_else(|| LinalgError::Overflow(format!("{dim_a} x {dim_b}")))?;
        if dim_a == 0 || dim_b == 0 || matrix.rows() != n || matrix.cols() != n {
            return Err(LinalgError::Shape(format!(
                "{}x{} matrix for a {}x{} bipartition",
                matrix.rows(),
                matrix.cols(),
                dim_a,
                dim_b
            )));
        }
        let scale = matrix.max_norm();
        let defect = matrix.hermiticity_defect();
        if defect > HERMITICITY_TOL * scale {
            return Err(LinalgError::NotHermitian { defect });
        }
        Ok(Self {
            dim_a,
            dim_b,
            matrix,
        })
    }

    /// Builds from a matrix known to be Hermitian up to rounding; the
    /// Hermitian part is taken.
    pub fn from_hermitian_part(
        dim_a: usize,
        dim_b: usize,
        matrix: &CMatrix,
    ) -> Result<Self, LinalgError> {
        Self::new(dim_a, dim_b, matrix.hermitian_part())
    }

    pub fn zeros(dim_a: usize, dim_b: usize) -> Self {
        Self {
            dim_a,
            dim_b,
            matrix: CMatrix::zeros(dim_a * dim_b, dim_a * dim_b),
        }
    }

    pub fn identity(dim_a: usize, dim_b: usize) -> Self {
        Self {
            dim_a,
            dim_b,
            matrix: CMatrix::identity(dim_a * dim_b),
        }
    }

    /// Projector `u u†` onto a (not necessarily normalised) vector.
    pub fn projector(dim_a: usize, dim_b: usize, u: &[Complex64]) -> Result<Self, LinalgError> {
        Self::new(dim_a, dim_b, CMatrix::outer(u))
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    /// Order of the matrix, `dim_a · dim_b`.
    pub fn order(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn max_norm(&self) -> f64 {
        self.matrix.max_norm()
    }

    pub fn same_shape(&self, other: &HermOp) -> bool {
        self.dim_a == other.dim_a && self.dim_b == other.dim_b
    }

    fn check_shape(&self, other: &HermOp) -> Result<(), LinalgError> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(LinalgError::Shape(format!(
                "{}x{} vs {}x{} bipartition",
                self.dim_a, self.dim_b, other.dim_a, other.dim_b
            )))
        }
    }

    pub fn add(&self, other: &HermOp) -> Result<HermOp, LinalgError> {
        self.check_shape(other)?;
        Ok(Self {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &HermOp) -> Result<HermOp, LinalgError> {
        self.check_shape(other)?;
        Ok(Self {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            matrix: &self.matrix - &other.matrix,
        })
    }

    pub fn scale(&self, s: f64) -> HermOp {
        Self {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            matrix: self.matrix.scale(s),
        }
    }

    /// `self + s · other`.
    pub fn axpy(&self, s: f64, other: &HermOp) -> Result<HermOp, LinalgError> {
        self.check_shape(other)?;
        let mut m = self.matrix.clone();
        for (d, x) in m.data_mut().iter_mut().zip(other.matrix.data()) {
            *d += x * s;
        }
        Ok(Self {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            matrix: m,
        })
    }

    pub fn max_abs_diff(&self, other: &HermOp) -> Result<f64, LinalgError> {
        self.check_shape(other)?;
        self.matrix.max_abs_diff(&other.matrix)
    }

    /// Transpose on Alice's factor.
    pub fn partial_transpose(&self) -> HermOp {
        Self {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            matrix: partial_transpose_matrix(&self.matrix, self.dim_a, self.dim_b),
        }
    }

    pub fn partial_trace(&self, over: Subsystem) -> CMatrix {
        partial_trace_matrix(&self.matrix, self.dim_a, self.dim_b, over)
    }

    pub fn eigvals(&self) -> Result<Vec<f64>, LinalgError> {
        eigvals_hermitian(self)
    }

    pub fn min_eigval(&self) -> Result<f64, LinalgError> {
        Ok(self.eigvals()?[0])
    }

    pub fn is_psd(&self, tol: f64) -> Result<bool, LinalgError> {
        is_psd(self, tol)
    }
}

/// `T_A` on a square matrix of order `dim_a · dim_b`:
/// `out[(j,k),(i,l)] = x[(i,k),(j,l)]`.
pub fn partial_transpose_matrix(x: &CMatrix, dim_a: usize, dim_b: usize) -> CMatrix {
    let n = dim_a * dim_b;
    assert_eq!(
        (x.rows(), x.cols()),
        (n, n),
        "partial transpose: order mismatch"
    );
    let mut out = CMatrix::zeros(n, n);
    for i in 0..dim_a {
        for j in 0..dim_a {
            for k in 0..dim_b {
                for l in 0..dim_b {
                    out[(j * dim_b + k, i * dim_b + l)] = x[(i * dim_b + k, j * dim_b + l)];
                }
            }
        }
    }
    out
}

pub fn partial_trace_matrix(x: &CMatrix, dim_a: usize, dim_b: usize, over: Subsystem) -> CMatrix {
    match over {
        Subsystem::A => CMatrix::from_fn(dim_b, dim_b, |k, l| {
            (0..dim_a).map(|i| x[(i * dim_b + k, i * dim_b + l)]).sum()
        }),
        Subsystem::B => CMatrix::from_fn(dim_a, dim_a, |i, j| {
            (0..dim_b).map(|k| x[(i * dim_b + k, j * dim_b + k)]).sum()
        }),
    }
}

/// Free-function form of [`HermOp::partial_transpose`].
pub fn partial_transpose(x: &HermOp) -> HermOp {
    x.partial_transpose()
}

pub fn partial_trace(x: &HermOp, over: Subsystem) -> CMatrix {
    x.partial_trace(over)
}

/// Complex trace inner product `Tr(a† b)` of equally shaped matrices.
pub fn trace_inner(a: &CMatrix, b: &CMatrix) -> Result<Complex64, LinalgError> {
    a.check_same_shape(b)?;
    Ok(a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Hilbert-Schmidt inner product `Tr(a† b)` of Hermitian operators.
pub fn hs_inner(a: &HermOp, b: &HermOp) -> Result<f64, LinalgError> {
    a.check_shape(b)?;
    let z = trace_inner(&a.matrix, &b.matrix)?;
    let scale = 1.0_f64.max(a.matrix.frobenius_norm() * b.matrix.frobenius_norm());
    if z.im.abs() > 1e-10 * scale {
        return Err(LinalgError::ImaginaryResidue(z.im));
    }
    Ok(z.re)
}

/// All eigenvalues, ascending.
pub fn eigvals_hermitian(x: &HermOp) -> Result<Vec<f64>, LinalgError> {
    herm_eigvals(&x.matrix)
}

/// `λ_min(x) ≥ −tol · max(1, ‖x‖_max)`.
pub fn is_psd(x: &HermOp, tol: f64) -> Result<bool, LinalgError> {
    let lmin = x.min_eigval()?;
    Ok(lmin >= -tol * 1.0_f64.max(x.max_norm()))
}

#[cfg(test)]
mod tests {
    use super::super::matrix::{kron, ONE, ZERO};
    use super::*;
    use proptest::prelude::*;

    fn psi0() -> HermOp {
        let h = 0.5;
        let mut m = CMatrix::zeros(4, 4);
        for &(i, j) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            m[(i, j)] = Complex64::new(h, 0.0);
        }
        HermOp::new(2, 2, m).unwrap()
    }

    fn hermitian_from(n: usize, vals: &[f64]) -> CMatrix {
        let mut m = CMatrix::zeros(n, n);
        let mut it = vals.iter().copied();
        for i in 0..n {
            m[(i, i)] = Complex64::new(it.next().unwrap(), 0.0);
            for j in 0..i {
                let z = Complex64::new(it.next().unwrap(), it.next().unwrap());
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    fn arb_herm(da: usize, db: usize) -> impl Strategy<Value = HermOp> {
        let n = da * db;
        prop::collection::vec(-1.0f64..1.0, n * n)
            .prop_map(move |v| HermOp::new(da, db, hermitian_from(n, &v)).unwrap())
    }

    #[test]
    fn partial_transpose_of_identity() {
        let id = HermOp::identity(2, 3);
        assert_eq!(id.partial_transpose(), id);
    }

    #[test]
    fn partial_transpose_of_psi0_is_half_swap() {
        // T_A(ψ₀) = ½·1 − ψ₂ where ψ₂ is the singlet projector.
        let pt = psi0().partial_transpose();
        let mut singlet = CMatrix::zeros(4, 4);
        singlet[(1, 1)] = Complex64::new(0.5, 0.0);
        singlet[(2, 2)] = Complex64::new(0.5, 0.0);
        singlet[(1, 2)] = Complex64::new(-0.5, 0.0);
        singlet[(2, 1)] = Complex64::new(-0.5, 0.0);
        let expected = &CMatrix::identity(4).scale(0.5) - &singlet;
        assert_eq!(pt.matrix(), &expected);
        let spec = pt.eigvals().unwrap();
        for (a, b) in spec.iter().zip([-0.5, 0.5, 0.5, 0.5]) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(!pt.is_psd(PSD_TOL).unwrap());
        assert!(psi0().is_psd(PSD_TOL).unwrap());
    }

    #[test]
    fn partial_trace_of_psi0() {
        let ta = psi0().partial_trace(Subsystem::A);
        assert!(ta.max_abs_diff(&CMatrix::identity(2).scale(0.5)).unwrap() < 1e-15);
    }

    #[test]
    fn partial_trace_of_product() {
        let rho = hermitian_from(2, &[0.3, 0.7, 0.1, -0.2]);
        let sigma = hermitian_from(3, &[1.0, 2.0, 0.5, 0.5, 3.0, 0.0, 1.0, -1.0, 0.25]);
        let x = HermOp::new(2, 3, kron(&rho, &sigma).unwrap()).unwrap();
        let tb = x.partial_trace(Subsystem::B);
        let expected = rho.scale_c(sigma.trace());
        assert!(tb.max_abs_diff(&expected).unwrap() < 1e-14);
    }

    #[test]
    fn spectrum_of_psi0() {
        let s = psi0().eigvals().unwrap();
        for (a, b) in s.iter().zip([0.0, 0.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_is_psd() {
        assert!(HermOp::zeros(2, 2).is_psd(PSD_TOL).unwrap());
    }

    #[test]
    fn hs_inner_values() {
        let p0 = psi0();
        assert!((hs_inner(&p0, &p0).unwrap() - 1.0).abs() < 1e-15);
        let mut psi2 = CMatrix::zeros(4, 4);
        psi2[(1, 1)] = Complex64::new(0.5, 0.0);
        psi2[(2, 2)] = Complex64::new(0.5, 0.0);
        psi2[(1, 2)] = Complex64::new(-0.5, 0.0);
        psi2[(2, 1)] = Complex64::new(-0.5, 0.0);
        let psi2 = HermOp::new(2, 2, psi2).unwrap();
        assert!(hs_inner(&p0, &psi2).unwrap().abs() < 1e-15);
        let quarter = HermOp::identity(2, 2).scale(0.25);
        assert!((hs_inner(&quarter, &psi2).unwrap() - 0.25).abs() < 1e-15);
        assert!(hs_inner(&p0, &HermOp::identity(2, 3)).is_err());
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let mut m = CMatrix::identity(4);
        m[(0, 1)] = ONE;
        assert!(matches!(
            HermOp::new(2, 2, m),
            Err(LinalgError::NotHermitian { .. })
        ));
        assert!(HermOp::new(2, 2, CMatrix::identity(3)).is_err());
        let _ = ZERO;
    }

    #[test]
    fn product_partial_transpose_is_exact() {
        let a = hermitian_from(2, &[0.3, 0.7, 0.1, -0.2]);
        let b = hermitian_from(3, &[1.0, 2.0, 0.5, 0.5, 3.0, 0.0, 1.0, -1.0, 0.25]);
        let x = HermOp::new(2, 3, kron(&a, &b).unwrap()).unwrap();
        assert_eq!(
            x.partial_transpose().matrix(),
            &kron(&a.transpose(), &b).unwrap()
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn partial_transpose_is_trace_preserving_involution(x in arb_herm(2, 3)) {
            let pt = x.partial_transpose();
            prop_assert!(pt.matrix().hermiticity_defect() <= 1e-12);
            prop_assert!((pt.trace() - x.trace()).abs() <= 1e-12);
            prop_assert!(pt.partial_transpose().max_abs_diff(&x).unwrap() <= 1e-12);
        }

        #[test]
        fn partial_transpose_is_self_adjoint(a in arb_herm(3, 2), b in arb_herm(3, 2)) {
            let lhs = hs_inner(&a, &b.partial_transpose()).unwrap();
            let rhs = hs_inner(&a.partial_transpose(), &b).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }

        #[test]
        fn spectrum_sums_to_trace(x in arb_herm(2, 4)) {
            let s: f64 = x.eigvals().unwrap().iter().sum();
            prop_assert!((s - x.trace()).abs() <= 1e-10 * 1.0f64.max(x.trace().abs()));
        }

        #[test]
        fn partial_trace_preserves_trace(x in arb_herm(3, 3)) {
            prop_assert!((x.partial_trace(Subsystem::A).trace().re - x.trace()).abs() <= 1e-12);
            prop_assert!((x.partial_trace(Subsystem::B).trace().re - x.trace()).abs() <= 1e-12);
        }
    }
}
