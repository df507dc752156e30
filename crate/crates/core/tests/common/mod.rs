//! Shared generators for integration tests.
#![allow(dead_code)]

use pptdiscrim::hermlin::{herm_eigh, kron, CMatrix, Complex64};
use pptdiscrim::states::{
    generalized_bell_vector, DiscriminationInstance, GeneralizedBellSpec, LatticeVector,
};
use rand::seq::SliceRandom;
use rand::Rng;

/// Eigenbasis of a random Hermitian matrix.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> CMatrix {
    let mut h = CMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
        for j in (i + 1)..n {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    herm_eigh(&h).unwrap().1
}

/// Kets of `k` distinct generalized Bell states on `C^d ⊗ C^d` under a
/// random local unitary `U_A ⊗ U_B`.
pub fn rotated_generalized_bell_kets(
    d: usize,
    k: usize,
    rng: &mut impl Rng,
) -> Vec<Vec<Complex64>> {
    let mut labels: Vec<(usize, usize)> =
        (0..d).flat_map(|a| (0..d).map(move |b| (a, b))).collect();
    labels.shuffle(rng);
    labels.truncate(k);
    let u = kron(&random_unitary(d, rng), &random_unitary(d, rng)).unwrap();
    labels
        .iter()
        .map(|&(a, b)| {
            let v = generalized_bell_vector(&GeneralizedBellSpec::new(d, a, b).unwrap());
            u.mul_vec(&v).unwrap()
        })
        .collect()
}

pub fn rotated_generalized_bell(d: usize, k: usize, rng: &mut impl Rng) -> DiscriminationInstance {
    let kets = rotated_generalized_bell_kets(d, k, rng);
    DiscriminationInstance::from_kets(d, d, &kets, None, None).unwrap()
}

/// `k` distinct lattice states on `t` pairs, optionally with random priors.
pub fn random_lattice(
    t: usize,
    k: usize,
    random_priors: bool,
    rng: &mut impl Rng,
) -> DiscriminationInstance {
    let mut codes: Vec<usize> = (0..1usize << (2 * t)).collect();
    codes.shuffle(rng);
    let vectors = codes[..k]
        .iter()
        .map(|&c| LatticeVector::from_code(t, c))
        .collect();
    let priors = random_priors.then(|| {
        let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.2..1.0)).collect();
        let s: f64 = raw.iter().sum();
        raw.iter().map(|x| x / s).collect()
    });
    DiscriminationInstance::from_lattice(vectors, priors).unwrap()
}
