//! JSON encoding of operators, measurements, certificates and checks.
//!
//! Operators are `{dim_a, dim_b, re, im}` with row-major nested arrays.
//! Lattice-diagonal objects additionally carry their Bell-product
//! coefficients, which are preferred on input.

use serde_json::{json, Map, Value};

use crate::discrim::{
    Certificate, CertificateCheck, CertificateForm, DualCertificate, LatticeCertificate,
    LatticeMeasurement, Measurement, MeasurementCheck, Povm, SolverDiagnostics,
};
use crate::hermlin::{CMatrix, Complex64, HermOp};

use super::CliError;

/// Dense operators are written only up to this order when a lattice
/// representation is available.
pub const DENSE_MAX_ORDER: usize = 64;

pub fn encode_operator(h: &HermOp) -> Value {
    let n = h.order();
    let m = h.matrix();
    let rows = |f: &dyn Fn(Complex64) -> f64| -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| (0..n).map(|j| f(m[(i, j)])).collect())
            .collect()
    };
    json!({
        "dim_a": h.dim_a(),
        "dim_b": h.dim_b(),
        "re": rows(&|z| z.re),
        "im": rows(&|z| z.im),
    })
}

fn field<'a>(v: &'a Value, key: &str, what: &str) -> Result<&'a Value, CliError> {
    v.get(key)
        .ok_or_else(|| CliError::Input(format!("{what}: missing field {key:?}")))
}

fn as_usize(v: &Value, what: &str) -> Result<usize, CliError> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| CliError::Input(format!("{what}: expected a non-negative integer")))
}

fn as_f64(v: &Value, what: &str) -> Result<f64, CliError> {
    v.as_f64()
        .ok_or_else(|| CliError::Input(format!("{what}: expected a number")))
}

fn as_vec(v: &Value, what: &str) -> Result<Vec<f64>, CliError> {
    v.as_array()
        .ok_or_else(|| CliError::Input(format!("{what}: expected an array")))?
        .iter()
        .map(|x| as_f64(x, what))
        .collect()
}

fn as_table(v: &Value, what: &str) -> Result<Vec<Vec<f64>>, CliError> {
    v.as_array()
        .ok_or_else(|| CliError::Input(format!("{what}: expected an array of arrays")))?
        .iter()
        .map(|r| as_vec(r, what))
        .collect()
}

pub fn decode_operator(v: &Value, what: &str) -> Result<HermOp, CliError> {
    let da = as_usize(field(v, "dim_a", what)?, what)?;
    let db = as_usize(field(v, "dim_b", what)?, what)?;
    let n = da * db;
    let re = as_table(field(v, "re", what)?, what)?;
    let im = match v.get("im") {
        Some(x) => as_table(x, what)?,
        None => vec![vec![0.0; n]; n],
    };
    if re.len() != n || im.len() != n || re.iter().chain(&im).any(|r| r.len() != n) {
        return Err(CliError::Input(format!(
            "{what}: expected {n}x{n} re/im arrays for dimensions {da}x{db}"
        )));
    }
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = Complex64::new(re[i][j], im[i][j]);
        }
    }
    HermOp::new(da, db, m).map_err(|e| CliError::Input(format!("{what}: {e}")))
}

pub fn encode_measurement(p: &Povm, dense_ok: bool) -> Result<Value, CliError> {
    let mut out = Map::new();
    let dense = match p {
        Povm::Dense(m) => {
            out.insert("ppt".into(), json!(m.ppt));
            Some(m.clone())
        }
        Povm::Lattice(m) => {
            out.insert("ppt".into(), json!(m.ppt));
            out.insert("lattice".into(), json!({ "t": m.t, "coeffs": m.coeffs }));
            dense_ok.then(|| m.to_dense()).transpose()?
        }
    };
    if let Some(m) = dense {
        out.insert(
            "operators".into(),
            Value::Array(m.operators.iter().map(encode_operator).collect()),
        );
    }
    Ok(Value::Object(out))
}

pub fn decode_measurement(v: &Value) -> Result<Povm, CliError> {
    let what = "measurement";
    let ppt = field(v, "ppt", what)?
        .as_bool()
        .ok_or_else(|| CliError::Input("measurement.ppt: expected a boolean".into()))?;
    if let Some(l) = v.get("lattice") {
        return Ok(Povm::Lattice(LatticeMeasurement {
            t: as_usize(field(l, "t", what)?, what)?,
            coeffs: as_table(field(l, "coeffs", what)?, what)?,
            ppt,
        }));
    }
    let operators = field(v, "operators", what)?
        .as_array()
        .ok_or_else(|| CliError::Input("measurement.operators: expected an array".into()))?
        .iter()
        .enumerate()
        .map(|(a, o)| decode_operator(o, &format!("measurement operator {}", a + 1)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Povm::Dense(Measurement { operators, ppt }))
}

pub fn encode_certificate(c: &Certificate, dense_ok: bool) -> Result<Value, CliError> {
    let mut out = Map::new();
    out.insert("form".into(), json!(c.form().as_str()));
    let dense = match c {
        Certificate::Dense(d) => {
            out.insert("y_offdiag".into(), json!(d.y_offdiag));
            Some(d.clone())
        }
        Certificate::Lattice(l) => {
            out.insert("y_offdiag".into(), json!(l.y_offdiag));
            out.insert("lattice".into(), json!({ "t": l.t, "y": l.y, "q": l.q }));
            dense_ok.then(|| l.to_dense()).transpose()?
        }
    };
    if let Some(d) = dense {
        out.insert("y".into(), encode_operator(&d.y));
        out.insert(
            "q".into(),
            Value::Array(d.q.iter().map(encode_operator).collect()),
        );
    }
    Ok(Value::Object(out))
}

pub fn decode_certificate(v: &Value) -> Result<Certificate, CliError> {
    let what = "certificate";
    let form: CertificateForm = field(v, "form", what)?
        .as_str()
        .ok_or_else(|| CliError::Input("certificate.form: expected a string".into()))?
        .parse()
        .map_err(|e: String| CliError::Input(e))?;
    let y_offdiag = match v.get("y_offdiag") {
        Some(x) => as_table(x, what)?,
        None => Vec::new(),
    };
    if let Some(l) = v.get("lattice") {
        let q = match l.get("q") {
            Some(x) => as_table(x, what)?,
            None => Vec::new(),
        };
        return Ok(Certificate::Lattice(LatticeCertificate {
            form,
            t: as_usize(field(l, "t", what)?, what)?,
            y: as_vec(field(l, "y", what)?, what)?,
            q,
            y_offdiag,
        }));
    }
    let y = decode_operator(field(v, "y", what)?, "certificate Y")?;
    let q = match v.get("q") {
        Some(x) => x
            .as_array()
            .ok_or_else(|| CliError::Input("certificate.q: expected an array".into()))?
            .iter()
            .enumerate()
            .map(|(j, o)| decode_operator(o, &format!("certificate Q{}", j + 1)))
            .collect::<Result<Vec<_>, _>>()?,
        None => Vec::new(),
    };
    Ok(Certificate::Dense(DualCertificate {
        form,
        y,
        q,
        y_offdiag,
    }))
}

pub fn encode_certificate_check(c: &CertificateCheck) -> Value {
    json!({
        "form": c.form.as_str(),
        "backend": c.backend.to_string(),
        "bound": c.bound,
        "exact_bound": c.exact_bound,
        "condition_min_eigs": c.condition_min_eigs,
        "q_min_eigs": c.q_min_eigs,
        "failures": c.failures,
        "valid": c.valid,
    })
}

pub fn encode_measurement_check(c: &MeasurementCheck) -> Value {
    json!({
        "success": c.success,
        "per_state": c.per_state,
        "completeness_defect": c.completeness_defect,
        "min_eig": c.min_eig,
        "min_pt_eig": c.min_pt_eig,
        "max_error_overlap": c.max_error_overlap,
        "inconclusive": c.inconclusive,
        "valid": c.valid,
    })
}

pub fn encode_diagnostics(d: &SolverDiagnostics) -> Value {
    json!({
        "status": d.status.as_str(),
        "iterations": d.iterations,
        "primal_objective": d.primal_objective,
        "dual_objective": d.dual_objective,
        "gap": d.gap,
        "primal_residual": d.primal_residual,
        "dual_min_eig": d.dual_min_eig,
        "rows": d.rows,
    })
}

/// Canonical text: sorted keys, shortest round-trip floats, two-space
/// indentation, trailing newline.
pub fn canonical(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(&sorted(v)).expect("JSON values serialize");
    s.push('\n');
    s
}

fn sorted(v: &Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            let mut out = Map::new();
            for k in keys {
                out.insert(k.clone(), sorted(&m[k]));
            }
            Value::Object(out)
        }
        Value::Array(a) => Value::Array(a.iter().map(sorted).collect()),
        _ => v.clone(),
    }
}
