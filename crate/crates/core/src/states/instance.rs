use num_complex::Complex64;

use crate::hermlin::{hs_inner, inner, vec_norm, HermOp};

use super::bell::{lattice_density, LatticeVector};
use super::dephase::{lattice_diagonal, qubit_pairs};
use super::StateError;

pub const TRACE_TOL: f64 = 1e-10;
pub const ORTHOGONALITY_TOL: f64 = 1e-10;
pub const PRIOR_SUM_TOL: f64 = 1e-12;

/// A set of `k` mutually orthogonal density operators with priors.
#[derive(Debug, Clone)]
pub struct DiscriminationInstance {
    dim_a: usize,
    dim_b: usize,
    states: Vec<HermOp>,
    priors: Vec<f64>,
    labels: Vec<String>,
    lattice: Option<Vec<LatticeVector>>,
}

impl DiscriminationInstance {
    /// Validates general density operators: PSD, unit trace, mutual
    /// orthogonality and priors.
    pub fn new(
        dim_a: usize,
        dim_b: usize,
        states: Vec<HermOp>,
        priors: Option<Vec<f64>>,
        labels: Option<Vec<String>>,
    ) -> Result<Self, StateError> {
        if states.is_empty() {
            return Err(StateError::EmptyInstance);
        }
        for (j, rho) in states.iter().enumerate() {
            if rho.dim_a() != dim_a || rho.dim_b() != dim_b {
                return Err(StateError::StateDimensions {
                    index: j,
                    dim_a: rho.dim_a(),
                    dim_b: rho.dim_b(),
                });
            }
            let tr = rho.trace();
            if (tr - 1.0).abs() > TRACE_TOL {
                return Err(StateError::NotNormalized {
                    index: j,
                    value: tr,
                });
            }
            let lmin = rho.min_eigval()?;
            if lmin < -TRACE_TOL {
                return Err(StateError::NotPositive {
                    index: j,
                    min_eig: lmin,
                });
            }
        }
        for i in 0..states.len() {
            for j in (i + 1)..states.len() {
                let overlap = hs_inner(&states[i], &states[j])?;
                if overlap > ORTHOGONALITY_TOL {
                    return Err(StateError::NotOrthogonal { i, j, overlap });
                }
            }
        }
        Self::finish(dim_a, dim_b, states, priors, labels, None)
    }

    /// Builds from state vectors. Normalisation and pairwise orthogonality
    /// are checked on the vectors.
    pub fn from_kets(
        dim_a: usize,
        dim_b: usize,
        kets: &[Vec<Complex64>],
        priors: Option<Vec<f64>>,
        labels: Option<Vec<String>>,
    ) -> Result<Self, StateError> {
        if kets.is_empty() {
            return Err(StateError::EmptyInstance);
        }
        for (j, u) in kets.iter().enumerate() {
            if u.len() != dim_a * dim_b {
                return Err(StateError::VectorLength {
                    expected: dim_a * dim_b,
                    got: u.len(),
                });
            }
            let norm2 = vec_norm(u).powi(2);
            if (norm2 - 1.0).abs() > TRACE_TOL {
                return Err(StateError::NotNormalized {
                    index: j,
                    value: norm2,
                });
            }
        }
        for i in 0..kets.len() {
            for j in (i + 1)..kets.len() {
                let overlap = inner(&kets[i], &kets[j]).norm_sqr();
                if overlap > ORTHOGONALITY_TOL {
                    return Err(StateError::NotOrthogonal { i, j, overlap });
                }
            }
        }
        let states = kets
            .iter()
            .map(|u| HermOp::projector(dim_a, dim_b, u))
            .collect::<Result<Vec<_>, _>>()?;
        Self::finish(dim_a, dim_b, states, priors, labels, None)
    }

    /// Pure lattice states `ψ_v`, built with exact entries.
    pub fn from_lattice(
        vectors: Vec<LatticeVector>,
        priors: Option<Vec<f64>>,
    ) -> Result<Self, StateError> {
        let t = vectors.first().ok_or(StateError::EmptyInstance)?.t();
        if vectors.iter().any(|v| v.t() != t) {
            return Err(StateError::MixedLatticeLength);
        }
        for i in 0..vectors.len() {
            for j in (i + 1)..vectors.len() {
                if vectors[i] == vectors[j] {
                    return Err(StateError::NotOrthogonal { i, j, overlap: 1.0 });
                }
            }
        }
        let dim = 1usize << t;
        let states = vectors.iter().map(lattice_density).collect();
        let labels = vectors.iter().map(|v| format!("psi{v}")).collect();
        Self::finish(dim, dim, states, priors, Some(labels), Some(vectors))
    }

    fn finish(
        dim_a: usize,
        dim_b: usize,
        states: Vec<HermOp>,
        priors: Option<Vec<f64>>,
        labels: Option<Vec<String>>,
        lattice: Option<Vec<LatticeVector>>,
    ) -> Result<Self, StateError> {
        let k = states.len();
        let priors = match priors {
            None => vec![1.0 / k as f64; k],
            Some(p) => {
                if p.len() != k {
                    return Err(StateError::PriorCount {
                        expected: k,
                        got: p.len(),
                    });
                }
                if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                    return Err(StateError::InvalidPriors(
                        "negative or non-finite prior".into(),
                    ));
                }
                let sum: f64 = p.iter().sum();
                if (sum - 1.0).abs() > PRIOR_SUM_TOL {
                    return Err(StateError::InvalidPriors(format!("priors sum to {sum}")));
                }
                p
            }
        };
        let labels = match labels {
            Some(l) if l.len() == k => l,
            Some(l) => {
                return Err(StateError::LabelCount {
                    expected: k,
                    got: l.len(),
                })
            }
            None => (1..=k).map(|j| format!("rho{j}")).collect(),
        };
        Ok(Self {
            dim_a,
            dim_b,
            states,
            priors,
            labels,
            lattice,
        })
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    /// `dim_a · dim_b`.
    pub fn order(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn k(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[HermOp] {
        &self.states
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn with_priors(self, priors: Vec<f64>) -> Result<Self, StateError> {
        Self::finish(
            self.dim_a,
            self.dim_b,
            self.states,
            Some(priors),
            Some(self.labels),
            self.lattice,
        )
    }

    /// Lattice vectors when the instance was built from them.
    pub fn lattice_vectors(&self) -> Option<&[LatticeVector]> {
        self.lattice.as_deref()
    }

    /// Number of qubit pairs and the lattice-basis coefficients of every
    /// state, when every state is diagonal in the lattice basis.
    pub fn lattice_coefficients(&self, tol: f64) -> Option<(usize, Vec<Vec<f64>>)> {
        let t = qubit_pairs(self.dim_a, self.dim_b).ok()?;
        if let Some(vs) = &self.lattice {
            let len = 1usize << (2 * t);
            let coeffs = vs
                .iter()
                .map(|v| {
                    let mut c = vec![0.0; len];
                    c[v.code()] = 1.0;
                    c
                })
                .collect();
            return Some((t, coeffs));
        }
        let coeffs = self
            .states
            .iter()
            .map(|rho| lattice_diagonal(rho, tol))
            .collect::<Option<Vec<_>>>()?;
        Some((t, coeffs))
    }
}
