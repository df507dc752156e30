//! Closed-form certificates and measurements for the builtin sets.
//!
//! Two-pair lattice operators are written as sums of products `X ⊗ Z`
//! where `X`, `Z` are coefficient vectors over the four Bell labels of the
//! first and second pair.

use crate::hermlin::HermOp;
use crate::states::DiscriminationInstance;

use super::lattice::{LatticeCertificate, LatticeMeasurement};
use super::types::{CertificateForm, DualCertificate, Measurement, Mode};
use super::verify::theorem1_bound;
use super::DiscrimError;

type Pair = [f64; 4];

const ONE: Pair = [1.0; 4];

fn psi(i: usize) -> Pair {
    let mut p = [0.0; 4];
    p[i] = 1.0;
    p
}

fn lin(terms: &[(f64, Pair)]) -> Pair {
    let mut out = [0.0; 4];
    for (a, p) in terms {
        for (o, x) in out.iter_mut().zip(p) {
            *o += a * x;
        }
    }
    out
}

/// `Σ_i a_i (X_i ⊗ Z_i)` as 16 lattice coefficients.
fn tensor(terms: &[(f64, Pair, Pair)]) -> Vec<f64> {
    let mut c = vec![0.0; 16];
    for (a, x, z) in terms {
        for (i, xi) in x.iter().enumerate() {
            for (j, zj) in z.iter().enumerate() {
                c[4 * i + j] += a * xi * zj;
            }
        }
    }
    c
}

/// `Y = ¼ 1⊗1 − ½ ψ₂⊗ψ₁` for the four two-pair states: trace `7/2`, so
/// the PPT success probability is at most `7/8`.
pub fn theorem3_certificate() -> LatticeCertificate {
    let y = tensor(&[(0.25, ONE, ONE), (-0.5, psi(2), psi(1))]);
    LatticeCertificate {
        form: CertificateForm::Dual3,
        t: 2,
        y,
        q: Vec::new(),
        y_offdiag: Vec::new(),
    }
}

/// A PPT measurement reaching `7/8` on the four two-pair states.
pub fn theorem4_measurement() -> LatticeMeasurement {
    let q = (0.25, ONE, lin(&[(1.0, psi(1)), (1.0, psi(2))]));
    let r = lin(&[(7.0 / 8.0, psi(0)), (1.0 / 8.0, psi(3))]);
    let s = lin(&[(1.0 / 8.0, psi(0)), (7.0 / 8.0, psi(3))]);
    let third = 1.0 / 3.0;
    let mut coeffs = vec![tensor(&[
        q,
        (1.0, lin(&[(2.0 / 3.0, psi(0)), (third, ONE)]), r),
    ])];
    for (own, rest) in [(1, [2, 3]), (2, [1, 3]), (3, [1, 2])] {
        coeffs.push(tensor(&[
            q,
            (1.0, lin(&[(third, psi(0)), (1.0, psi(own))]), s),
            (third, lin(&[(1.0, psi(rest[0])), (1.0, psi(rest[1]))]), r),
        ]));
    }
    LatticeMeasurement {
        t: 2,
        coeffs,
        ppt: true,
    }
}

/// `Y = (1/k) 1 − (2/k) ψ₂^{⊗n}` with `k = 2ⁿ`, bounding the `n`-pair
/// power-of-two sets by `1 − 2/k²`.
pub fn theorem5_certificate(n: usize) -> Result<LatticeCertificate, DiscrimError> {
    if !(2..=crate::states::POW2_MAX_N).contains(&n) {
        return Err(DiscrimError::MalformedCertificate(format!(
            "no closed-form certificate for n = {n}"
        )));
    }
    let k = (1u64 << n) as f64;
    let mut y = vec![1.0 / k; 1 << (2 * n)];
    let all_two = (0..n).fold(0usize, |acc, _| acc * 4 + 2);
    y[all_two] -= 2.0 / k;
    Ok(LatticeCertificate {
        form: CertificateForm::Dual3,
        t: n,
        y,
        q: Vec::new(),
        y_offdiag: Vec::new(),
    })
}

/// How the one-based labels `ψ₁…ψ₄` of the unambiguous certificate map to
/// the Bell labels `0…3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theorem6Reading {
    /// `i ↦ i − 1`.
    Shifted,
    /// `4 ↦ 0`, others unchanged.
    Wrapped,
}

/// Unambiguous certificate with `Tr(Y) = 3` and `y_{i,j} = 1` for the
/// four two-pair states, under the given label reading.
pub fn theorem6_certificate(reading: Theorem6Reading) -> LatticeCertificate {
    let map: [usize; 4] = match reading {
        Theorem6Reading::Shifted => [0, 1, 2, 3],
        Theorem6Reading::Wrapped => [1, 2, 3, 0],
    };
    theorem6_with_labels(map)
}

/// The unambiguous certificate with one-based label `i` read as Bell
/// label `map[i − 1]`, transcribed literally.
pub fn theorem6_with_labels(map: [usize; 4]) -> LatticeCertificate {
    unambiguous_certificate(map, false)
}

/// The shifted reading with the second factor of `Q₁`'s last term taken
/// as `ψ₁ + ψ₄` instead of `ψ₂ + ψ₃`: the unique `Q₁` making the first
/// condition an equality, and PSD. Every condition then holds exactly.
pub fn theorem6_corrected() -> LatticeCertificate {
    unambiguous_certificate([0, 1, 2, 3], true)
}

fn unambiguous_certificate(map: [usize; 4], corrected: bool) -> LatticeCertificate {
    let p = |i: usize| psi(map[i - 1]);
    let not = |i: usize| lin(&[(1.0, ONE), (-1.0, p(i))]);
    let add = |i: usize, j: usize| lin(&[(1.0, p(i)), (1.0, p(j))]);
    let y = tensor(&[
        (0.25, not(1), lin(&[(1.0, ONE), (-2.0, p(4))])),
        (
            0.25,
            p(1),
            lin(&[(-1.0, p(1)), (3.0, p(2)), (3.0, p(3)), (1.0, p(4))]),
        ),
    ]);
    let q = vec![
        tensor(&[
            (1.0, not(3), p(3)),
            (1.0, p(3), if corrected { add(1, 4) } else { add(2, 3) }),
        ]),
        tensor(&[(1.0, add(1, 2), p(2)), (1.0, p(4), not(2))]),
        tensor(&[(1.0, add(2, 4), p(2)), (1.0, p(1), not(2))]),
        tensor(&[(1.0, add(1, 4), p(2)), (1.0, p(2), not(2))]),
        tensor(&[(1.0, p(3), p(2))]),
    ];
    let mut off = vec![vec![1.0; 4]; 4];
    for (i, row) in off.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    LatticeCertificate {
        form: CertificateForm::Dual5,
        t: 2,
        y,
        q,
        y_offdiag: off,
    }
}

/// `Y = 1/d`, valid for maximally entangled states on `C^d ⊗ C^d` because
/// `T_A` of such a projector has spectrum `±1/d`.
pub fn theorem1_certificate(inst: &DiscriminationInstance) -> Option<DualCertificate> {
    theorem1_bound(inst)?;
    let d = inst.dim_a() as f64;
    Some(DualCertificate::dual3(
        HermOp::identity(inst.dim_a(), inst.dim_b()).scale(1.0 / d),
    ))
}

/// `P_j = 1/k` (min-error) or the always-inconclusive measurement.
pub fn uniform_measurement(inst: &DiscriminationInstance, mode: Mode) -> Measurement {
    let (da, db, k) = (inst.dim_a(), inst.dim_b(), inst.k());
    let operators = match mode {
        Mode::MinError => vec![HermOp::identity(da, db).scale(1.0 / k as f64); k],
        Mode::Unambiguous => {
            let mut ops = vec![HermOp::zeros(da, db); k];
            ops.push(HermOp::identity(da, db));
            ops
        }
    };
    Measurement {
        operators,
        ppt: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrim::lattice::{verify_lattice_certificate, verify_lattice_measurement};
    use crate::discrim::verify::{dual3_to_dual2, verify_certificate, verify_measurement, Backend};
    use crate::states::{example_set, ExampleSet};

    fn yde4() -> DiscriminationInstance {
        example_set(ExampleSet::Yde4).unwrap()
    }

    #[test]
    fn seven_eighths_certificate_is_exact() {
        let inst = yde4();
        let cert = theorem3_certificate();
        let lat = verify_lattice_certificate(&inst, &cert, Backend::Exact).unwrap();
        assert!(lat.valid);
        assert_eq!(lat.exact_bound.as_deref(), Some("7/8"));
        let dense = cert.to_dense().unwrap();
        assert_eq!(dense.y.trace(), 3.5);
        for backend in [Backend::Float, Backend::Exact] {
            let chk = verify_certificate(&inst, &dense, backend).unwrap();
            assert!(chk.valid, "{backend}: {:?}", chk.failures);
            assert_eq!(chk.bound, 0.875);
        }
    }

    #[test]
    fn dual3_converts_to_dual2() {
        let inst = yde4();
        let dense = theorem3_certificate().to_dense().unwrap();
        let two = dual3_to_dual2(&inst, &dense).unwrap();
        let chk = verify_certificate(&inst, &two, Backend::Exact).unwrap();
        assert!(chk.valid, "{:?}", chk.failures);
        assert_eq!(chk.exact_bound.as_deref(), Some("7/8"));
        assert!(dual3_to_dual2(&inst, &two).is_err());
    }

    #[test]
    fn seven_eighths_measurement() {
        let inst = yde4();
        let m = theorem4_measurement();
        let lat = verify_lattice_measurement(&inst, &m, Mode::MinError).unwrap();
        assert!(lat.valid);
        let dense = m.to_dense().unwrap();
        let chk = verify_measurement(&inst, &dense, Mode::MinError).unwrap();
        assert!(chk.valid);
        assert!(chk.completeness_defect <= 1e-12);
        assert!(chk.min_eig >= -1e-12);
        assert!(chk.min_pt_eig.unwrap() >= -1e-12);
        for s in &chk.per_state {
            assert!((s - 0.875).abs() <= 1e-12, "{s}");
        }
    }

    #[test]
    fn power_of_two_certificates() {
        for (n, num, den) in [(3, 31u64, 32u64), (4, 127, 128)] {
            let inst = example_set(ExampleSet::Pow2(n)).unwrap();
            let cert = theorem5_certificate(n).unwrap();
            let chk = verify_lattice_certificate(&inst, &cert, Backend::Exact).unwrap();
            assert!(chk.valid, "n = {n}: {:?}", chk.failures);
            assert_eq!(chk.exact_bound, Some(format!("{num}/{den}")));
        }
        assert!(theorem5_certificate(1).is_err());
    }

    #[test]
    fn three_quarters_certificate() {
        let inst = yde4();
        for reading in [Theorem6Reading::Shifted, Theorem6Reading::Wrapped] {
            let chk =
                verify_lattice_certificate(&inst, &theorem6_certificate(reading), Backend::Float)
                    .unwrap();
            assert!(!chk.valid, "{reading:?} as printed");
        }
        let fixed = theorem6_corrected();
        let lat = verify_lattice_certificate(&inst, &fixed, Backend::Exact).unwrap();
        assert!(lat.valid, "{:?}", lat.failures);
        assert_eq!(lat.exact_bound.as_deref(), Some("3/4"));
        let chk = verify_certificate(&inst, &fixed.to_dense().unwrap(), Backend::Exact).unwrap();
        assert!(chk.valid, "{:?}", chk.failures);
    }

    #[test]
    fn identity_over_d_bounds_bell_basis() {
        let inst = example_set(ExampleSet::BellBasis).unwrap();
        let cert = theorem1_certificate(&inst).unwrap();
        let chk = verify_certificate(&inst, &cert, Backend::Exact).unwrap();
        assert!(chk.valid);
        assert_eq!(chk.exact_bound.as_deref(), Some("1/2"));
        let m = uniform_measurement(&inst, Mode::MinError);
        let mc = verify_measurement(&inst, &m, Mode::MinError).unwrap();
        assert!(mc.valid && (mc.success - 0.25).abs() < 1e-15);
        let u = uniform_measurement(&inst, Mode::Unambiguous);
        let uc = verify_measurement(&inst, &u, Mode::Unambiguous).unwrap();
        assert!(uc.valid && uc.success == 0.0);
    }
}
