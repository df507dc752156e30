use std::fmt;
use std::str::FromStr;

use crate::hermlin::HermOp;

/// Discrimination task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    MinError,
    /// `k + 1` outcomes, the last inconclusive; never wrong.
    Unambiguous,
}

/// Measurement class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cone {
    /// Every operator has positive partial transpose.
    Ppt,
    /// Unrestricted global measurements.
    PsdOnly,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::MinError => "min_error",
            Mode::Unambiguous => "unambiguous",
        }
    }
}

impl Cone {
    pub fn as_str(&self) -> &'static str {
        match self {
            Cone::Ppt => "ppt",
            Cone::PsdOnly => "psd",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Cone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min_error" | "min-error" => Ok(Mode::MinError),
            "unambiguous" => Ok(Mode::Unambiguous),
            _ => Err(format!(
                "unknown mode {s:?} (expected min-error or unambiguous)"
            )),
        }
    }
}

impl FromStr for Cone {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ppt" => Ok(Cone::Ppt),
            "psd" | "psd_only" => Ok(Cone::PsdOnly),
            _ => Err(format!("unknown cone {s:?} (expected ppt or psd)")),
        }
    }
}

/// POVM `{P_a}`; for unambiguous discrimination the last operator is the
/// inconclusive outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub operators: Vec<HermOp>,
    /// Whether every operator is claimed to be PPT.
    pub ppt: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateForm {
    /// `Y − k p_j ρ_j − T_A(Q_j) ⪰ 0`, `Q_j ⪰ 0`.
    Dual2,
    /// `Y − k p_j T_A(ρ_j) ⪰ 0`.
    Dual3,
    /// `Y − k p_j ρ_j + Σ_{i≠j} y_{i,j} ρ_i − T_A(Q_j) ⪰ 0` for `j ≤ k`,
    /// `Y − T_A(Q_{k+1}) ⪰ 0`, `Q_j ⪰ 0`.
    Dual5,
}

impl CertificateForm {
    pub fn as_str(&self) -> &'static str {
        match self {
            CertificateForm::Dual2 => "dual2",
            CertificateForm::Dual3 => "dual3",
            CertificateForm::Dual5 => "dual5",
        }
    }
}

impl FromStr for CertificateForm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dual2" => Ok(CertificateForm::Dual2),
            "dual3" => Ok(CertificateForm::Dual3),
            "dual5" => Ok(CertificateForm::Dual5),
            _ => Err(format!("unknown certificate form {s:?}")),
        }
    }
}

/// Dual feasible point bounding the success probability by `Tr(Y)/k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate {
    pub form: CertificateForm,
    pub y: HermOp,
    /// `Q_1..Q_k` (dual2) or `Q_1..Q_{k+1}` (dual5); empty for dual3.
    pub q: Vec<HermOp>,
    /// `y_offdiag[i][j] = y_{i,j}` (dual5 only; diagonal ignored).
    pub y_offdiag: Vec<Vec<f64>>,
}

impl DualCertificate {
    pub fn dual3(y: HermOp) -> Self {
        Self {
            form: CertificateForm::Dual3,
            y,
            q: Vec::new(),
            y_offdiag: Vec::new(),
        }
    }

    pub fn dual2(y: HermOp, q: Vec<HermOp>) -> Self {
        Self {
            form: CertificateForm::Dual2,
            y,
            q,
            y_offdiag: Vec::new(),
        }
    }

    pub fn dual5(y: HermOp, q: Vec<HermOp>, y_offdiag: Vec<Vec<f64>>) -> Self {
        Self {
            form: CertificateForm::Dual5,
            y,
            q,
            y_offdiag,
        }
    }
}
