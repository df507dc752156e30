use crate::hermlin::{CMatrix, HermOp};

use super::bell::{add_lattice_term, lattice_ket_support, LatticeVector};
use super::StateError;

/// Number of qubit pairs `t` when both local dimensions equal `2^t`.
pub fn qubit_pairs(dim_a: usize, dim_b: usize) -> Result<usize, StateError> {
    if dim_a != dim_b || dim_a < 2 || !dim_a.is_power_of_two() {
        return Err(StateError::NotPowerOfTwo { dim_a, dim_b });
    }
    Ok(dim_a.trailing_zeros() as usize)
}

/// Diagonal of `x` in the lattice basis: `⟨ψ_v|x|ψ_v⟩` for every `v`,
/// indexed by [`LatticeVector::code`].
pub fn lattice_coefficients(x: &HermOp) -> Result<Vec<f64>, StateError> {
    let t = qubit_pairs(x.dim_a(), x.dim_b())?;
    let m = x.matrix();
    let scale = 1.0 / (1u64 << t) as f64;
    Ok((0..1usize << (2 * t))
        .map(|code| {
            let support = lattice_ket_support(&LatticeVector::from_code(t, code));
            let mut acc = 0.0;
            for &(i, zi) in &support {
                for &(j, zj) in &support {
                    acc += (zi.conj() * m[(i, j)] * zj).re;
                }
            }
            acc * scale
        })
        .collect())
}

/// The completely dephasing channel in the lattice basis,
/// `Σ_v ⟨ψ_v|x|ψ_v⟩ ψ_v`, i.e. the local Pauli twirl applied on every pair.
pub fn dephase_bell(x: &HermOp) -> Result<HermOp, StateError> {
    let t = qubit_pairs(x.dim_a(), x.dim_b())?;
    let coeffs = lattice_coefficients(x)?;
    let n = x.order();
    let mut m = CMatrix::zeros(n, n);
    for (code, &c) in coeffs.iter().enumerate() {
        if c != 0.0 {
            add_lattice_term(&mut m, &LatticeVector::from_code(t, code), c);
        }
    }
    Ok(HermOp::new(x.dim_a(), x.dim_b(), m).expect("lattice operator is Hermitian"))
}

/// Lattice coefficients of `x` when `x` is diagonal in the lattice basis
/// (within `tol`, max-norm); `None` otherwise or when the dimensions are
/// not equal powers of two.
pub fn lattice_diagonal(x: &HermOp, tol: f64) -> Option<Vec<f64>> {
    let t = qubit_pairs(x.dim_a(), x.dim_b()).ok()?;
    let coeffs = lattice_coefficients(x).ok()?;
    let n = x.order();
    let mut m = CMatrix::zeros(n, n);
    for (code, &c) in coeffs.iter().enumerate() {
        if c != 0.0 {
            add_lattice_term(&mut m, &LatticeVector::from_code(t, code), c);
        }
    }
    let defect = m.max_abs_diff(x.matrix()).ok()?;
    (defect <= tol).then_some(coeffs)
}

/// Coefficient of `ψ_u` in `T_A(ψ_w)`: `2^{-t} (−1)^{#{l : u_l = f(w_l)}}`.
pub fn lattice_sign(w: &LatticeVector, u: &LatticeVector) -> f64 {
    debug_assert_eq!(w.t(), u.t());
    let flips = w
        .indices()
        .iter()
        .zip(u.indices())
        .filter(|(wl, ul)| **ul == wl.transpose_partner())
        .count();
    let mag = 1.0 / (1u64 << w.t()) as f64;
    if flips % 2 == 0 {
        mag
    } else {
        -mag
    }
}

/// `{ j : ⊕_l [i_l = j_l] = 1 }`: the vectors agreeing with `i` in an odd
/// number of positions.
pub fn parity_set(i: &LatticeVector) -> Vec<LatticeVector> {
    let t = i.t();
    (0..1usize << (2 * t))
        .map(|code| LatticeVector::from_code(t, code))
        .filter(|j| {
            i.indices()
                .iter()
                .zip(j.indices())
                .filter(|(a, b)| a == b)
                .count()
                % 2
                == 1
        })
        .collect()
}
