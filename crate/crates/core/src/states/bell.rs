use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::hermlin::{CMatrix, HermOp, I, ONE, ZERO};

use super::StateError;

/// Index of one of the four two-qubit Bell states `ψ₀..ψ₃`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BellIndex(u8);

impl BellIndex {
    pub const ALL: [BellIndex; 4] = [BellIndex(0), BellIndex(1), BellIndex(2), BellIndex(3)];

    pub fn new(value: usize) -> Result<Self, StateError> {
        if value < 4 {
            Ok(Self(value as u8))
        } else {
            Err(StateError::BellIndexOutOfRange(value))
        }
    }

    pub fn value(self) -> usize {
        self.0 as usize
    }

    /// Index of the Bell state that appears with a minus sign in the partial
    /// transpose: `T_A(ψ_i) = ½·1 − ψ_{f(i)}`.
    pub fn transpose_partner(self) -> BellIndex {
        BellIndex([2, 3, 0, 1][self.0 as usize])
    }
}

impl fmt::Display for BellIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn bell_transpose_index(i: BellIndex) -> BellIndex {
    i.transpose_partner()
}

/// Pauli matrix `σ_i`, with `σ₀ = 1`.
pub fn pauli(i: usize) -> Result<CMatrix, StateError> {
    let entries = match i {
        0 => [ONE, ZERO, ZERO, ONE],
        1 => [ZERO, ONE, ONE, ZERO],
        2 => [ZERO, -I, I, ZERO],
        3 => [ONE, ZERO, ZERO, -ONE],
        _ => return Err(StateError::PauliIndexOutOfRange(i)),
    };
    Ok(CMatrix::from_vec(2, 2, entries.to_vec()).expect("2x2"))
}

/// `√2 · |ψ_i⟩`: the entries are exactly representable.
fn bell_unnormalized(i: BellIndex) -> [Complex64; 4] {
    // (1 ⊗ σ_i)(|00⟩ + |11⟩)
    match i.0 {
        0 => [ONE, ZERO, ZERO, ONE],
        1 => [ZERO, ONE, ONE, ZERO],
        2 => [ZERO, I, -I, ZERO],
        _ => [ONE, ZERO, ZERO, -ONE],
    }
}

pub fn bell_vector(i: BellIndex) -> Vec<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    bell_unnormalized(i).iter().map(|z| z * s).collect()
}

/// Density operator `ψ_i` on `C² ⊗ C²`.
pub fn bell_density(i: BellIndex) -> HermOp {
    lattice_density(&LatticeVector::new(vec![i]).expect("non-empty"))
}

/// Parameters `(d, a, b)` of the generalized Bell state
/// `|ψ_{a,b}⟩ = d^{-1/2} Σ_j ω^{aj} |j⟩⊗|j+b⟩`, `ω = exp(2πi/d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneralizedBellSpec {
    d: usize,
    a: usize,
    b: usize,
}

impl GeneralizedBellSpec {
    pub fn new(d: usize, a: usize, b: usize) -> Result<Self, StateError> {
        if d < 2 || a >= d || b >= d {
            return Err(StateError::InvalidGeneralizedBell { d, a, b });
        }
        Ok(Self { d, a, b })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn omega(&self) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI / self.d as f64)
    }
}

pub fn generalized_bell_vector(spec: &GeneralizedBellSpec) -> Vec<Complex64> {
    let d = spec.d;
    let norm = 1.0 / (d as f64).sqrt();
    let mut v = vec![ZERO; d * d];
    for j in 0..d {
        // ω^{aj} with the exponent reduced mod d before evaluating.
        let phase = Complex64::from_polar(norm, 2.0 * PI * ((spec.a * j) % d) as f64 / d as f64);
        v[j * d + (j + spec.b) % d] = phase;
    }
    v
}

/// Tensor product of `t` Bell-state labels, one per qubit pair `A_l B_l`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeVector {
    indices: Vec<BellIndex>,
}

impl LatticeVector {
    pub fn new(indices: Vec<BellIndex>) -> Result<Self, StateError> {
        if indices.is_empty() {
            return Err(StateError::EmptyLatticeVector);
        }
        Ok(Self { indices })
    }

    pub fn from_values(values: &[usize]) -> Result<Self, StateError> {
        Self::new(
            values
                .iter()
                .map(|&v| BellIndex::new(v))
                .collect::<Result<_, _>>()?,
        )
    }

    /// Inverse of [`LatticeVector::code`].
    pub fn from_code(t: usize, mut code: usize) -> Self {
        let mut indices = vec![BellIndex(0); t];
        for slot in indices.iter_mut().rev() {
            *slot = BellIndex((code % 4) as u8);
            code /= 4;
        }
        Self { indices }
    }

    pub fn t(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[BellIndex] {
        &self.indices
    }

    /// Base-4 code with the first pair most significant, so that codes
    /// run over `Z₄^t` in lexicographic order.
    pub fn code(&self) -> usize {
        self.indices.iter().fold(0, |acc, i| acc * 4 + i.value())
    }

    /// Componentwise image under the transpose partner map.
    pub fn transpose_partner(&self) -> LatticeVector {
        Self {
            indices: self.indices.iter().map(|i| i.transpose_partner()).collect(),
        }
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, i) in self.indices.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, ")")
    }
}

/// Position in the `A₁…A_t : B₁…B_t` ordering of the computational basis
/// vector with Alice bits `a` and Bob bits `b` (pair 1 most significant).
fn canonical_position(t: usize, a_bits: usize, b_bits: usize) -> usize {
    (a_bits << t) | b_bits
}

/// For each basis index of the interleaved ordering `A₁B₁A₂B₂…`, its
/// position in the canonical `A₁…A_t : B₁…B_t` ordering.
pub fn interleaved_to_canonical(t: usize) -> Vec<usize> {
    (0..1usize << (2 * t))
        .map(|idx| {
            let (mut a, mut b) = (0, 0);
            for l in 0..t {
                let shift = 2 * (t - 1 - l);
                let pair = (idx >> shift) & 3;
                a = (a << 1) | (pair >> 1);
                b = (b << 1) | (pair & 1);
            }
            canonical_position(t, a, b)
        })
        .collect()
}

/// Nonzero entries of `2^{t/2} |ψ_v⟩` in canonical ordering; every
/// amplitude is one of `±1, ±i`.
pub fn lattice_ket_support(v: &LatticeVector) -> Vec<(usize, Complex64)> {
    let t = v.t();
    let mut out = vec![(0usize, 0usize, ONE)];
    for &i in v.indices() {
        let amps = bell_unnormalized(i);
        let mut next = Vec::with_capacity(out.len() * 2);
        for &(a, b, z) in &out {
            for (pair, &amp) in amps.iter().enumerate() {
                if amp != ZERO {
                    next.push(((a << 1) | (pair >> 1), (b << 1) | (pair & 1), z * amp));
                }
            }
        }
        out = next;
    }
    let mut entries: Vec<(usize, Complex64)> = out
        .into_iter()
        .map(|(a, b, z)| (canonical_position(t, a, b), z))
        .collect();
    entries.sort_by_key(|e| e.0);
    entries
}

/// Normalised `|ψ_v⟩` on `C^{2^t} ⊗ C^{2^t}` in canonical ordering.
pub fn lattice_ket(v: &LatticeVector) -> Vec<Complex64> {
    let n = 1usize << (2 * v.t());
    let scale = (0.5f64).powf(v.t() as f64 / 2.0);
    let mut out = vec![ZERO; n];
    for (idx, z) in lattice_ket_support(v) {
        out[idx] = z * scale;
    }
    out
}

/// `ψ_v = |ψ_v⟩⟨ψ_v|` with Alice holding every `A_l` and Bob every `B_l`.
/// Entries are exact dyadic rationals.
pub fn lattice_density(v: &LatticeVector) -> HermOp {
    let t = v.t();
    let dim = 1usize << t;
    let mut m = CMatrix::zeros(dim * dim, dim * dim);
    add_lattice_term(&mut m, v, 1.0);
    HermOp::new(dim, dim, m).expect("lattice projector is Hermitian")
}

/// `m += c · ψ_v`.
pub(crate) fn add_lattice_term(m: &mut CMatrix, v: &LatticeVector, c: f64) {
    let support = lattice_ket_support(v);
    let scale = c / (1u64 << v.t()) as f64;
    for &(i, zi) in &support {
        for &(j, zj) in &support {
            m[(i, j)] += zi * zj.conj() * scale;
        }
    }
}

/// Lattice operator `Σ_w c_w ψ_w`, with `coeffs` indexed by
/// [`LatticeVector::code`] over `Z₄^t`.
pub fn lattice_operator(t: usize, coeffs: &[f64]) -> Result<HermOp, StateError> {
    if t == 0 || coeffs.len() != 1 << (2 * t) {
        return Err(StateError::LatticeCoefficients {
            t,
            len: coeffs.len(),
        });
    }
    let dim = 1usize << t;
    let mut m = CMatrix::zeros(dim * dim, dim * dim);
    for (code, &c) in coeffs.iter().enumerate() {
        if c != 0.0 {
            add_lattice_term(&mut m, &LatticeVector::from_code(t, code), c);
        }
    }
    Ok(HermOp::new(dim, dim, m).expect("lattice operator is Hermitian"))
}

/// True iff both reduced states of `u u†` are within `tol` (max-norm) of
/// `1/d`.
pub fn is_maximally_entangled(
    u: &[Complex64],
    dim_a: usize,
    dim_b: usize,
    tol: f64,
) -> Result<bool, StateError> {
    if dim_a != dim_b {
        return Err(StateError::UnequalDimensions { dim_a, dim_b });
    }
    if u.len() != dim_a * dim_b {
        return Err(StateError::VectorLength {
            expected: dim_a * dim_b,
            got: u.len(),
        });
    }
    let d = dim_a;
    let target = 1.0 / d as f64;
    // Tr_B(uu*)[i,j] = Σ_k u[i,k] conj(u[j,k]); Tr_A(uu*)[k,l] = Σ_i u[i,k] conj(u[i,l]).
    for x in 0..d {
        for y in 0..d {
            let expected = if x == y { target } else { 0.0 };
            let rb: Complex64 = (0..d).map(|k| u[x * d + k] * u[y * d + k].conj()).sum();
            let ra: Complex64 = (0..d).map(|i| u[i * d + x] * u[i * d + y].conj()).sum();
            if (rb - expected).norm() > tol || (ra - expected).norm() > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermlin::{inner, kron, kron_vec, CMatrix};

    fn approx_vec(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn pauli_matrices() {
        assert_eq!(pauli(0).unwrap(), CMatrix::identity(2));
        assert_eq!(pauli(1).unwrap().data(), &[ZERO, ONE, ONE, ZERO]);
        let s2 = pauli(2).unwrap();
        assert_eq!(s2.data(), &[ZERO, -I, I, ZERO]);
        assert_eq!(s2.conj(), s2.scale(-1.0));
        assert!(matches!(pauli(4), Err(StateError::PauliIndexOutOfRange(4))));
    }

    #[test]
    fn bell_vectors_match_definition() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let b0 = bell_vector(BellIndex::new(0).unwrap());
        assert!(approx_vec(&b0, &[ONE * s, ZERO, ZERO, ONE * s], 1e-16));
        let b3 = bell_vector(BellIndex::new(3).unwrap());
        assert!(approx_vec(&b3, &[ONE * s, ZERO, ZERO, -ONE * s], 1e-16));
        for i in BellIndex::ALL {
            // (1 ⊗ σ_i)|ψ₀⟩
            let op = kron(&CMatrix::identity(2), &pauli(i.value()).unwrap()).unwrap();
            assert!(approx_vec(
                &op.mul_vec(&b0).unwrap(),
                &bell_vector(i),
                1e-16
            ));
        }
    }

    #[test]
    fn bell_gram_is_identity() {
        for i in BellIndex::ALL {
            for j in BellIndex::ALL {
                let g = inner(&bell_vector(i), &bell_vector(j));
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g - Complex64::new(e, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn transpose_index_table() {
        let f = |i| BellIndex::new(i).unwrap().transpose_partner().value();
        assert_eq!([f(0), f(1), f(2), f(3)], [2, 3, 0, 1]);
        for i in BellIndex::ALL {
            assert_eq!(bell_transpose_index(bell_transpose_index(i)), i);
        }
        assert!(BellIndex::new(4).is_err());
    }

    #[test]
    fn local_symmetry_group_fixes_bell_states() {
        for g in 0..4 {
            let s = pauli(g).unwrap();
            let u = kron(&s, &s).unwrap();
            for i in BellIndex::ALL {
                let rho = bell_density(i);
                let conj = &(&u * rho.matrix()) * &u.adjoint();
                assert!(
                    conj.max_abs_diff(rho.matrix()).unwrap() < 1e-15,
                    "g={g} i={i}"
                );
            }
        }
        // σ₁⊗σ₁ |ψ₀⟩ = |ψ₀⟩
        let x = kron(&pauli(1).unwrap(), &pauli(1).unwrap()).unwrap();
        let b0 = bell_vector(BellIndex::new(0).unwrap());
        assert!(approx_vec(&x.mul_vec(&b0).unwrap(), &b0, 1e-16));
    }

    #[test]
    fn generalized_bell_reduces_to_psi0() {
        let v = generalized_bell_vector(&GeneralizedBellSpec::new(2, 0, 0).unwrap());
        assert!(approx_vec(
            &v,
            &bell_vector(BellIndex::new(0).unwrap()),
            1e-15
        ));
        let v5 = generalized_bell_vector(&GeneralizedBellSpec::new(5, 0, 0).unwrap());
        let s = 1.0 / 5f64.sqrt();
        for i in 0..5 {
            for k in 0..5 {
                let e = if i == k { s } else { 0.0 };
                assert!((v5[i * 5 + k] - Complex64::new(e, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn generalized_bell_gram_d5() {
        let states: Vec<_> = (0..5)
            .flat_map(|a| {
                (0..5).map(move |b| {
                    generalized_bell_vector(&GeneralizedBellSpec::new(5, a, b).unwrap())
                })
            })
            .collect();
        for (i, u) in states.iter().enumerate() {
            for (j, v) in states.iter().enumerate() {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((inner(u, v) - Complex64::new(e, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn invalid_generalized_bell() {
        assert!(GeneralizedBellSpec::new(1, 0, 0).is_err());
        assert!(GeneralizedBellSpec::new(3, 3, 0).is_err());
        assert!(GeneralizedBellSpec::new(3, 0, 5).is_err());
    }

    #[test]
    fn maximal_entanglement_checks() {
        assert!(
            is_maximally_entangled(&bell_vector(BellIndex::new(2).unwrap()), 2, 2, 1e-12).unwrap()
        );
        assert!(!is_maximally_entangled(&[ONE, ZERO, ZERO, ZERO], 2, 2, 1e-12).unwrap());
        for a in 0..6 {
            for b in 0..6 {
                let v = generalized_bell_vector(&GeneralizedBellSpec::new(6, a, b).unwrap());
                assert!(is_maximally_entangled(&v, 6, 6, 1e-12).unwrap());
            }
        }
        assert!(is_maximally_entangled(&[ONE; 6], 2, 3, 1e-9).is_err());
        assert!(is_maximally_entangled(&[ONE; 5], 2, 2, 1e-9).is_err());
    }

    #[test]
    fn single_pair_lattice_density() {
        let rho = lattice_density(&LatticeVector::from_values(&[0]).unwrap());
        let expected = CMatrix::outer(&bell_vector(BellIndex::new(0).unwrap()));
        assert!(rho.matrix().max_abs_diff(&expected).unwrap() < 1e-15);
        // Entries are exact halves, unlike the floating outer product.
        assert_eq!(rho.matrix()[(0, 3)].re, 0.5);
        assert_eq!(rho.matrix()[(3, 3)].re, 0.5);
    }

    #[test]
    fn lattice_density_is_maximally_entangled_across_cut() {
        let rho = lattice_density(&LatticeVector::from_values(&[0, 0]).unwrap());
        let ta = rho.partial_trace(crate::hermlin::Subsystem::B);
        assert!(ta.max_abs_diff(&CMatrix::identity(4).scale(0.25)).unwrap() < 1e-16);
    }

    #[test]
    fn lattice_density_matches_explicit_permutation() {
        // Build ψ₁ ⊗ ψ₃ on A₁B₁A₂B₂ and permute the qubits to A₁A₂B₁B₂ with a
        // 16×16 permutation matrix written out bit by bit.
        let v1 = bell_vector(BellIndex::new(1).unwrap());
        let v3 = bell_vector(BellIndex::new(3).unwrap());
        let interleaved = kron_vec(&v1, &v3);
        let mut perm = CMatrix::zeros(16, 16);
        for idx in 0..16 {
            let (a1, b1, a2, b2) = ((idx >> 3) & 1, (idx >> 2) & 1, (idx >> 1) & 1, idx & 1);
            let target = (a1 << 3) | (a2 << 2) | (b1 << 1) | b2;
            perm[(target, idx)] = ONE;
        }
        let canonical = perm.mul_vec(&interleaved).unwrap();
        let expected = CMatrix::outer(&canonical);
        let rho = lattice_density(&LatticeVector::from_values(&[1, 3]).unwrap());
        assert!(rho.matrix().max_abs_diff(&expected).unwrap() < 1e-15);
        let map = interleaved_to_canonical(2);
        for idx in 0..16 {
            assert_eq!(perm[(map[idx], idx)], ONE);
        }
    }

    #[test]
    fn lattice_codes_round_trip() {
        for code in 0..64 {
            assert_eq!(LatticeVector::from_code(3, code).code(), code);
        }
        assert_eq!(
            LatticeVector::from_values(&[1, 2, 3]).unwrap().code(),
            16 + 8 + 3
        );
        assert!(LatticeVector::from_values(&[]).is_err());
    }
}
