//! State-set files and set resolution.

use std::path::Path;

use serde::Deserialize;

use crate::hermlin::Complex64;
use crate::states::{
    example_set, generalized_bell_vector, lattice_ket, DiscriminationInstance, ExampleSet,
    GeneralizedBellSpec, LatticeVector,
};

use super::CliError;

/// Version written to, and accepted from, state-set and report files.
pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSetFile {
    #[serde(default)]
    pub schema_version: Option<u64>,
    pub dim_a: usize,
    pub dim_b: usize,
    pub states: Vec<StateRecord>,
    #[serde(default)]
    pub priors: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateRecord {
    BellTensor {
        indices: Vec<usize>,
        #[serde(default)]
        label: Option<String>,
    },
    GeneralizedBell {
        d: usize,
        a: usize,
        b: usize,
        #[serde(default)]
        label: Option<String>,
    },
    RawVector {
        re: Vec<f64>,
        #[serde(default)]
        im: Option<Vec<f64>>,
        #[serde(default)]
        label: Option<String>,
    },
}

impl StateRecord {
    fn label(&self, j: usize) -> String {
        let given = match self {
            StateRecord::BellTensor { label, .. }
            | StateRecord::GeneralizedBell { label, .. }
            | StateRecord::RawVector { label, .. } => label.clone(),
        };
        given.unwrap_or_else(|| match self {
            StateRecord::BellTensor { indices, .. } => format!(
                "psi({})",
                indices
                    .iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            StateRecord::GeneralizedBell { a, b, .. } => format!("psi_{a},{b}"),
            StateRecord::RawVector { .. } => format!("state{}", j),
        })
    }

    fn ket(&self, j: usize, dim_a: usize, dim_b: usize) -> Result<Vec<Complex64>, CliError> {
        let bad = |msg: String| CliError::Input(format!("states[{j}]: {msg}"));
        match self {
            StateRecord::BellTensor { indices, .. } => {
                let v = LatticeVector::from_values(indices).map_err(|e| bad(e.to_string()))?;
                let side = 1usize << v.t();
                if dim_a != side || dim_b != side {
                    return Err(bad(format!(
                        "{} Bell pairs live on C^{side} x C^{side}, not C^{dim_a} x C^{dim_b}",
                        v.t()
                    )));
                }
                Ok(lattice_ket(&v))
            }
            StateRecord::GeneralizedBell { d, a, b, .. } => {
                let spec = GeneralizedBellSpec::new(*d, *a, *b).map_err(|e| bad(e.to_string()))?;
                if dim_a != *d || dim_b != *d {
                    return Err(bad(format!(
                        "generalized Bell state with d={d} on C^{dim_a} x C^{dim_b}"
                    )));
                }
                Ok(generalized_bell_vector(&spec))
            }
            StateRecord::RawVector { re, im, .. } => {
                let n = dim_a * dim_b;
                if re.len() != n {
                    return Err(bad(format!("re has length {}, expected {n}", re.len())));
                }
                if let Some(im) = im {
                    if im.len() != n {
                        return Err(bad(format!("im has length {}, expected {n}", im.len())));
                    }
                }
                let v: Vec<Complex64> = (0..n)
                    .map(|i| Complex64::new(re[i], im.as_ref().map_or(0.0, |m| m[i])))
                    .collect();
                if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(bad("non-finite amplitude".into()));
                }
                Ok(v)
            }
        }
    }
}

impl StateSetFile {
    pub fn into_instance(self) -> Result<DiscriminationInstance, CliError> {
        if let Some(v) = self.schema_version {
            if v != SCHEMA_VERSION {
                return Err(CliError::Input(format!(
                    "unsupported schema_version {v} (expected {SCHEMA_VERSION})"
                )));
            }
        }
        if self.dim_a == 0 || self.dim_b == 0 {
            return Err(CliError::Input("dimensions must be positive".into()));
        }
        if self.states.is_empty() {
            return Err(CliError::Input("state set is empty".into()));
        }
        let labels: Vec<String> = self
            .states
            .iter()
            .enumerate()
            .map(|(j, s)| s.label(j))
            .collect();
        let lattice: Option<Vec<&Vec<usize>>> = self
            .states
            .iter()
            .map(|s| match s {
                StateRecord::BellTensor { indices, .. } => Some(indices),
                _ => None,
            })
            .collect();
        if let Some(indices) = lattice {
            // Validate dimensions through the generic path first.
            for (j, s) in self.states.iter().enumerate() {
                s.ket(j, self.dim_a, self.dim_b)?;
            }
            let vectors = indices
                .iter()
                .map(|ix| LatticeVector::from_values(ix))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Input(e.to_string()))?;
            let inst = DiscriminationInstance::from_lattice(vectors, self.priors)
                .map_err(|e| CliError::Input(e.to_string()))?;
            return Ok(inst);
        }
        let kets = self
            .states
            .iter()
            .enumerate()
            .map(|(j, s)| s.ket(j, self.dim_a, self.dim_b))
            .collect::<Result<Vec<_>, _>>()?;
        DiscriminationInstance::from_kets(self.dim_a, self.dim_b, &kets, self.priors, Some(labels))
            .map_err(|e| CliError::Input(e.to_string()))
    }
}

/// Where a state set came from.
#[derive(Debug, Clone)]
pub enum SetSource {
    Builtin(ExampleSet),
    File(String),
}

impl SetSource {
    pub fn name(&self) -> String {
        match self {
            SetSource::Builtin(s) => s.to_string(),
            SetSource::File(p) => p.clone(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SetSource::Builtin(_) => "builtin",
            SetSource::File(_) => "file",
        }
    }
}

pub fn load_state_file(path: &Path) -> Result<DiscriminationInstance, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let file: StateSetFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    file.into_instance()
}

/// A builtin name, or a path to a state-set file.
pub fn resolve_set(spec: &str) -> Result<(SetSource, DiscriminationInstance), CliError> {
    if let Ok(set) = spec.parse::<ExampleSet>() {
        let inst = example_set(set).map_err(|e| CliError::Input(e.to_string()))?;
        return Ok((SetSource::Builtin(set), inst));
    }
    let path = Path::new(spec);
    if path.exists() {
        let inst = load_state_file(path)?;
        return Ok((SetSource::File(spec.to_string()), inst));
    }
    let names: Vec<String> = ExampleSet::all().iter().map(|s| s.to_string()).collect();
    Err(CliError::Input(format!(
        "{spec:?} is neither a builtin set ({}, pow2_N) nor a readable file",
        names.join(", ")
    )))
}
