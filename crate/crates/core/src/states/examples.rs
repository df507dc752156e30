use std::fmt;
use std::str::FromStr;

use super::bell::{generalized_bell_vector, GeneralizedBellSpec, LatticeVector};
use super::instance::DiscriminationInstance;
use super::StateError;

/// Largest `n` accepted by `pow2(n)`: operators are materialised densely
/// on `C^{2^n} ⊗ C^{2^n}`.
pub const POW2_MAX_N: usize = 5;

/// Eight three-pair lattice states whose relaxed PPT bound is 15/16 (the
/// PPT optimum itself is 7/8), read with labels shifted down by one
/// (`i ↦ i − 1`).
pub const LATTICE8_SHIFTED: [[usize; 3]; 8] = [
    [0, 0, 0],
    [0, 0, 2],
    [0, 0, 3],
    [1, 1, 1],
    [2, 2, 0],
    [2, 2, 2],
    [2, 2, 3],
    [3, 1, 1],
];

/// The same eight labels read with `4 ↦ 0` and the others unchanged.
pub const LATTICE8_WRAPPED: [[usize; 3]; 8] = [
    [1, 1, 1],
    [1, 1, 3],
    [1, 1, 0],
    [2, 2, 2],
    [3, 3, 1],
    [3, 3, 3],
    [3, 3, 0],
    [0, 2, 2],
];

/// Reading used by the `lattice8` builtin, frozen by a regression test.
pub const LATTICE8: [[usize; 3]; 8] = LATTICE8_SHIFTED;

pub const YDE4: [[usize; 2]; 4] = [[0, 0], [1, 3], [2, 3], [3, 3]];

pub const GBELL5: [(usize, usize); 5] = [(0, 0), (1, 1), (2, 1), (1, 3), (2, 3)];
pub const GBELL6: [(usize, usize); 6] = [(0, 0), (1, 0), (2, 0), (3, 0), (4, 0), (0, 3)];

/// Builtin state sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExampleSet {
    /// Four two-pair lattice states on `C⁴ ⊗ C⁴`.
    Yde4,
    /// `2ⁿ` states `ψ₀ ⊗ ψ_w` on `C^{2ⁿ} ⊗ C^{2ⁿ}`, `w ∈ {1,2,3}^{n−1}`.
    Pow2(usize),
    Lattice8,
    Gbell5,
    Gbell6,
    BellBasis,
}

impl ExampleSet {
    pub fn all() -> Vec<ExampleSet> {
        vec![
            ExampleSet::BellBasis,
            ExampleSet::Yde4,
            ExampleSet::Pow2(3),
            ExampleSet::Pow2(4),
            ExampleSet::Lattice8,
            ExampleSet::Gbell5,
            ExampleSet::Gbell6,
        ]
    }

    /// Known reference value for the builtin.
    pub fn reference(&self) -> String {
        match self {
            ExampleSet::Yde4 => "PPT optimum 7/8; unambiguous PPT optimum 3/4".into(),
            ExampleSet::Pow2(n) => {
                let half = 1u64 << (2 * n - 1);
                format!("PPT optimum ≤ 1 - 2/k^2 = {}/{}", half - 1, half)
            }
            ExampleSet::Lattice8 => "PPT optimum ≤ 15/16".into(),
            ExampleSet::Gbell5 => "PPT error ≥ 0.0101".into(),
            ExampleSet::Gbell6 => "PPT error ≥ 0.002".into(),
            ExampleSet::BellBasis => "PPT optimum d/k = 1/2".into(),
        }
    }

    pub fn local_dimension(&self) -> usize {
        match self {
            ExampleSet::Yde4 => 4,
            ExampleSet::Pow2(n) => 1 << n,
            ExampleSet::Lattice8 => 8,
            ExampleSet::Gbell5 => 5,
            ExampleSet::Gbell6 => 6,
            ExampleSet::BellBasis => 2,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            ExampleSet::Yde4 | ExampleSet::BellBasis => 4,
            ExampleSet::Pow2(n) => 1 << n,
            ExampleSet::Lattice8 => 8,
            ExampleSet::Gbell5 => 5,
            ExampleSet::Gbell6 => 6,
        }
    }
}

impl fmt::Display for ExampleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExampleSet::Yde4 => write!(f, "yde4"),
            ExampleSet::Pow2(n) => write!(f, "pow2_{n}"),
            ExampleSet::Lattice8 => write!(f, "lattice8"),
            ExampleSet::Gbell5 => write!(f, "gbell5"),
            ExampleSet::Gbell6 => write!(f, "gbell6"),
            ExampleSet::BellBasis => write!(f, "bell_basis"),
        }
    }
}

impl FromStr for ExampleSet {
    type Err = StateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "yde4" => Ok(ExampleSet::Yde4),
            "lattice8" => Ok(ExampleSet::Lattice8),
            "gbell5" => Ok(ExampleSet::Gbell5),
            "gbell6" => Ok(ExampleSet::Gbell6),
            "bell_basis" | "bell_basis(d=2)" => Ok(ExampleSet::BellBasis),
            _ => {
                let n = s
                    .strip_prefix("pow2_")
                    .or_else(|| s.strip_prefix("pow2(").and_then(|r| r.strip_suffix(')')))
                    .and_then(|n| n.parse::<usize>().ok())
                    .ok_or_else(|| StateError::UnknownExample(s.to_string()))?;
                Ok(ExampleSet::Pow2(n))
            }
        }
    }
}

/// First `2ⁿ` vectors of `{1,2,3}^{n−1}` in lexicographic order, each
/// prefixed by a `ψ₀` pair.
pub fn pow2_vectors(n: usize) -> Result<Vec<LatticeVector>, StateError> {
    if n < 3 {
        return Err(StateError::Pow2TooSmall(n));
    }
    if n > POW2_MAX_N {
        return Err(StateError::Pow2TooLarge(n));
    }
    let k = 1usize << n;
    let mut out = Vec::with_capacity(k);
    let tail = n - 1;
    for code in 0..3usize.pow(tail as u32) {
        if out.len() == k {
            break;
        }
        let mut digits = vec![0usize; n];
        let mut c = code;
        for l in (1..n).rev() {
            digits[l] = 1 + c % 3;
            c /= 3;
        }
        out.push(LatticeVector::from_values(&digits)?);
    }
    Ok(out)
}

pub fn example_set(set: ExampleSet) -> Result<DiscriminationInstance, StateError> {
    let lattice = |rows: &[&[usize]]| -> Result<DiscriminationInstance, StateError> {
        let vs = rows
            .iter()
            .map(|r| LatticeVector::from_values(r))
            .collect::<Result<Vec<_>, _>>()?;
        DiscriminationInstance::from_lattice(vs, None)
    };
    let gbell =
        |d: usize, pairs: &[(usize, usize)]| -> Result<DiscriminationInstance, StateError> {
            let specs = pairs
                .iter()
                .map(|&(a, b)| GeneralizedBellSpec::new(d, a, b))
                .collect::<Result<Vec<_>, _>>()?;
            let kets: Vec<_> = specs.iter().map(generalized_bell_vector).collect();
            let labels = pairs.iter().map(|(a, b)| format!("psi_{a},{b}")).collect();
            DiscriminationInstance::from_kets(d, d, &kets, None, Some(labels))
        };
    match set {
        ExampleSet::Yde4 => lattice(&YDE4.iter().map(|r| r.as_slice()).collect::<Vec<_>>()),
        ExampleSet::Pow2(n) => DiscriminationInstance::from_lattice(pow2_vectors(n)?, None),
        ExampleSet::Lattice8 => lattice(&LATTICE8.iter().map(|r| r.as_slice()).collect::<Vec<_>>()),
        ExampleSet::Gbell5 => gbell(5, &GBELL5),
        ExampleSet::Gbell6 => gbell(6, &GBELL6),
        ExampleSet::BellBasis => lattice(&[&[0], &[1], &[2], &[3]]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermlin::{hs_inner, CMatrix, Subsystem};

    fn check_instance(inst: &DiscriminationInstance) {
        let d = inst.dim_a();
        for (i, rho) in inst.states().iter().enumerate() {
            assert!((rho.trace() - 1.0).abs() < 1e-10);
            assert!(rho.min_eigval().unwrap() > -1e-10);
            // Pure maximally entangled: both marginals are 1/d.
            let half = CMatrix::identity(d).scale(1.0 / d as f64);
            assert!(rho.partial_trace(Subsystem::A).max_abs_diff(&half).unwrap() < 1e-12);
            assert!(rho.partial_trace(Subsystem::B).max_abs_diff(&half).unwrap() < 1e-12);
            for rho_j in &inst.states()[i + 1..] {
                assert!(hs_inner(rho, rho_j).unwrap().abs() < 1e-10);
            }
        }
        assert!((inst.priors().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn builtins_satisfy_instance_invariants() {
        for set in [
            ExampleSet::BellBasis,
            ExampleSet::Yde4,
            ExampleSet::Pow2(3),
            ExampleSet::Lattice8,
            ExampleSet::Gbell5,
            ExampleSet::Gbell6,
        ] {
            let inst = example_set(set).unwrap();
            assert_eq!(inst.k(), set.size(), "{set}");
            assert_eq!(inst.dim_a(), set.local_dimension(), "{set}");
            check_instance(&inst);
        }
    }

    #[test]
    fn yde4_lattice_labels() {
        let inst = example_set(ExampleSet::Yde4).unwrap();
        let vs: Vec<String> = inst
            .lattice_vectors()
            .unwrap()
            .iter()
            .map(|v| v.to_string())
            .collect();
        assert_eq!(vs, ["(0,0)", "(1,3)", "(2,3)", "(3,3)"]);
        assert_eq!((inst.dim_a(), inst.dim_b()), (4, 4));
    }

    #[test]
    fn pow2_construction() {
        let vs = pow2_vectors(3).unwrap();
        assert_eq!(vs.len(), 8);
        assert_eq!(vs[0].to_string(), "(0,1,1)");
        assert_eq!(vs[7].to_string(), "(0,3,2)");
        assert!(vs.iter().all(
            |v| v.indices()[0].value() == 0 && v.indices()[1..].iter().all(|i| i.value() != 0)
        ));
        assert_eq!(pow2_vectors(4).unwrap().len(), 16);
        assert!(matches!(pow2_vectors(2), Err(StateError::Pow2TooSmall(2))));
        let inst = example_set(ExampleSet::Pow2(3)).unwrap();
        for rho in inst.states() {
            let ket = crate::states::lattice_ket(&LatticeVector::from_code(3, 0));
            assert!(crate::states::is_maximally_entangled(&ket, 8, 8, 1e-12).unwrap());
            assert_eq!(rho.dim_a(), 8);
        }
    }

    #[test]
    fn names_parse() {
        for set in ExampleSet::all() {
            assert_eq!(set.to_string().parse::<ExampleSet>().unwrap(), set);
        }
        assert_eq!(
            "pow2(4)".parse::<ExampleSet>().unwrap(),
            ExampleSet::Pow2(4)
        );
        assert!("nope".parse::<ExampleSet>().is_err());
    }
}
