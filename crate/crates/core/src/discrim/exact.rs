//! Exact rational arithmetic for certificate checks.
//!
//! Every `f64` input is converted to the rational it represents; inputs
//! with denominators above `2^32` are rejected, which keeps the check
//! meaningful only for certificates written with short dyadic entries.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::hermlin::HermOp;
use crate::states::{lattice_ket_support, qubit_pairs, LatticeVector};

/// Largest accepted denominator exponent.
pub const MAX_DENOMINATOR_BITS: u64 = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExactError {
    #[error("entry {0:e} is not a dyadic rational with denominator at most 2^32")]
    NotDyadic(f64),
    #[error("entry is not finite")]
    NonFinite,
}

pub(crate) type Rat = BigRational;

pub(crate) fn to_rat(x: f64) -> Result<Rat, ExactError> {
    if !x.is_finite() {
        return Err(ExactError::NonFinite);
    }
    let r = BigRational::from_float(x).ok_or(ExactError::NonFinite)?;
    if r.denom().bits() > MAX_DENOMINATOR_BITS + 1 {
        return Err(ExactError::NotDyadic(x));
    }
    Ok(r)
}

pub(crate) fn rat_int(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

/// Dense Hermitian matrix with Gaussian-rational entries.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RatMatrix {
    n: usize,
    re: Vec<Rat>,
    im: Vec<Rat>,
}

impl RatMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            re: vec![Rat::zero(); n * n],
            im: vec![Rat::zero(); n * n],
        }
    }

    pub fn from_herm(h: &HermOp) -> Result<Self, ExactError> {
        let n = h.order();
        let mut out = Self::zeros(n);
        for (idx, z) in h.matrix().data().iter().enumerate() {
            if z.re != 0.0 {
                out.re[idx] = to_rat(z.re)?;
            }
            if z.im != 0.0 {
                out.im[idx] = to_rat(z.im)?;
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> Rat {
        (0..self.n).fold(Rat::zero(), |acc, i| acc + &self.re[i * self.n + i])
    }

    pub fn partial_transpose(&self, dim_a: usize, dim_b: usize) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..dim_a {
            for k in 0..dim_b {
                for j in 0..dim_a {
                    for l in 0..dim_b {
                        let src = (i * dim_b + k) * n + j * dim_b + l;
                        let dst = (j * dim_b + k) * n + i * dim_b + l;
                        out.re[dst] = self.re[src].clone();
                        out.im[dst] = self.im[src].clone();
                    }
                }
            }
        }
        out
    }

    /// `self += a · other`.
    pub fn axpy(&mut self, a: &Rat, other: &RatMatrix) {
        if a.is_zero() {
            return;
        }
        for (s, o) in self.re.iter_mut().zip(&other.re) {
            if !o.is_zero() {
                *s += a * o;
            }
        }
        for (s, o) in self.im.iter_mut().zip(&other.im) {
            if !o.is_zero() {
                *s += a * o;
            }
        }
    }

    fn is_real(&self) -> bool {
        self.im.iter().all(Zero::is_zero)
    }

    /// Real symmetric matrix with the same inertia (doubled) as `self`.
    fn real_form(&self) -> (usize, Vec<Rat>) {
        let n = self.n;
        if self.is_real() {
            return (n, self.re.clone());
        }
        let m = 2 * n;
        let mut out = vec![Rat::zero(); m * m];
        for i in 0..n {
            for j in 0..n {
                let (re, im) = (&self.re[i * n + j], &self.im[i * n + j]);
                out[i * m + j] = re.clone();
                out[(i + n) * m + j + n] = re.clone();
                out[i * m + j + n] = -im.clone();
                out[(i + n) * m + j] = im.clone();
            }
        }
        (m, out)
    }

    /// Lattice-basis coefficients when the matrix is lattice diagonal.
    fn lattice_coefficients(&self, dim_a: usize, dim_b: usize) -> Option<Vec<Rat>> {
        let t = qubit_pairs(dim_a, dim_b).ok()?;
        let scale = Rat::new(BigInt::from(1), BigInt::from(1u64 << t));
        let mut coeffs = Vec::with_capacity(1 << (2 * t));
        let mut diag_norm = Rat::zero();
        for code in 0..1usize << (2 * t) {
            let support = lattice_ket_support(&LatticeVector::from_code(t, code));
            let mut acc = Rat::zero();
            for &(i, zi) in &support {
                for &(j, zj) in &support {
                    // Re(conj(z_i) X_ij z_j) with z ∈ {±1, ±i}.
                    let w = zi.conj() * zj;
                    let (re, im) = (&self.re[i * self.n + j], &self.im[i * self.n + j]);
                    if w.re != 0.0 {
                        if w.re > 0.0 {
                            acc += re;
                        } else {
                            acc -= re;
                        }
                    } else if w.im > 0.0 {
                        acc -= im;
                    } else {
                        acc += im;
                    }
                }
            }
            let c = acc * &scale;
            diag_norm += &c * &c;
            coeffs.push(c);
        }
        // ‖X‖²_F = Σ_v c_v² exactly when X has no off-diagonal part in the
        // orthonormal lattice basis.
        let frob = self
            .re
            .iter()
            .chain(&self.im)
            .fold(Rat::zero(), |acc, x| acc + x * x);
        (frob == diag_norm).then_some(coeffs)
    }

    pub fn is_psd(&self, dim_a: usize, dim_b: usize) -> bool {
        if let Some(c) = self.lattice_coefficients(dim_a, dim_b) {
            return c.iter().all(|x| !x.is_negative());
        }
        let (n, a) = self.real_form();
        symmetric_is_psd(n, a)
    }
}

/// Symmetric elimination with positive diagonal pivots. A zero pivot
/// requires a zero row; a negative diagonal entry certifies indefiniteness.
fn symmetric_is_psd(n: usize, mut a: Vec<Rat>) -> bool {
    let mut alive: Vec<usize> = (0..n).collect();
    loop {
        let mut pivot = None;
        let mut dead = Vec::new();
        for (pos, &i) in alive.iter().enumerate() {
            let d = &a[i * n + i];
            if d.is_negative() {
                return false;
            }
            if d.is_zero() {
                if alive.iter().any(|&j| !a[i * n + j].is_zero()) {
                    return false;
                }
                dead.push(pos);
            } else if pivot.is_none() {
                pivot = Some(i);
            }
        }
        for pos in dead.into_iter().rev() {
            alive.remove(pos);
        }
        let Some(p) = pivot else {
            return true;
        };
        alive.retain(|&i| i != p);
        let inv = Rat::from_integer(BigInt::from(1)) / &a[p * n + p];
        let col: Vec<(usize, Rat)> = alive
            .iter()
            .filter(|&&j| !a[j * n + p].is_zero())
            .map(|&j| (j, a[j * n + p].clone()))
            .collect();
        for &(j, ref ajp) in &col {
            let f = ajp * &inv;
            for &(l, ref alp) in &col {
                let upd = &f * alp;
                a[j * n + l] -= upd;
            }
        }
    }
}

/// Exact PSD test of a Hermitian operator with dyadic entries.
pub fn exact_is_psd(x: &HermOp) -> Result<bool, ExactError> {
    Ok(RatMatrix::from_herm(x)?.is_psd(x.dim_a(), x.dim_b()))
}
