use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::conic::{SolveStatus, SolverOptions};
use crate::discrim::{
    eq3_bound, solve_instance, theorem1_bound, theorem1_certificate, theorem3_certificate,
    theorem5_certificate, theorem6_certificate, theorem6_corrected, Backend, Certificate,
    CertificateCheck, DualCertificate, Method, Mode, SolveOptions, SolveReport, Theorem6Reading,
};
use crate::hermlin::HermOp;
use crate::states::{DiscriminationInstance, ExampleSet};

use super::codec::{
    canonical, decode_certificate, decode_measurement, encode_certificate,
    encode_certificate_check, encode_diagnostics, encode_measurement, encode_measurement_check,
    DENSE_MAX_ORDER,
};
use super::input::{resolve_set, SetSource, SCHEMA_VERSION};
use super::{
    BoundArgs, CertifyArgs, Cli, CliError, Command, ExamplesArgs, OutputArgs, SolveArgs,
    EXIT_NOT_OPTIMAL, EXIT_OK,
};

pub(super) fn dispatch(cli: &Cli, w: &mut dyn Write) -> Result<i32, CliError> {
    let mut solver = SolverOptions::default();
    if let Some(t) = cli.tol {
        solver.tol_gap = t;
    }
    match &cli.command {
        Command::Solve(a) => solve(a, solver, w),
        Command::Bound(a) => bound(a, solver, w),
        Command::Certify(a) => certify(a, w),
        Command::Examples(a) => examples(a, w),
    }
}

/// Table value: eight decimals (the default solver accuracy) with trailing
/// zeros trimmed. The JSON report keeps full precision.
fn show(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.8}");
    let s = s.trim_end_matches('0');
    if s.ends_with('.') {
        format!("{s}0")
    } else {
        s.to_string()
    }
}

fn rows(w: &mut dyn Write, rows: &[(&str, String)]) -> Result<(), CliError> {
    let width = rows
        .iter()
        .map(|(k, _)| k.chars().count())
        .max()
        .unwrap_or(0);
    for (k, v) in rows {
        let pad = width - k.chars().count();
        writeln!(w, "{k}{}  {v}", " ".repeat(pad))?;
    }
    Ok(())
}

fn instance_json(src: &SetSource, inst: &DiscriminationInstance) -> Value {
    json!({
        "name": src.name(),
        "source": src.kind(),
        "dim_a": inst.dim_a(),
        "dim_b": inst.dim_b(),
        "k": inst.k(),
        "priors": inst.priors(),
        "labels": inst.labels(),
    })
}

fn header(command: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    m.insert("command".into(), json!(command));
    m.insert(
        "tool".into(),
        json!({ "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") }),
    );
    m
}

fn emit(
    report: Value,
    out: &OutputArgs,
    table: &[(&str, String)],
    w: &mut dyn Write,
) -> Result<(), CliError> {
    let text = canonical(&report);
    if let Some(path) = &out.out {
        std::fs::write(path, &text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    if out.json {
        w.write_all(text.as_bytes())?;
    } else {
        rows(w, table)?;
    }
    Ok(())
}

fn describe(src: &SetSource, inst: &DiscriminationInstance) -> String {
    format!(
        "{} ({} states on C^{} x C^{})",
        src.name(),
        inst.k(),
        inst.dim_a(),
        inst.dim_b()
    )
}

pub(super) fn solve_report_json(
    src: &SetSource,
    inst: &DiscriminationInstance,
    r: &SolveReport,
    opts: &SolveOptions,
    dense: bool,
) -> Result<Value, CliError> {
    let dense_ok = dense || inst.order() <= DENSE_MAX_ORDER;
    let mut m = header("solve");
    m.insert(
        "problem".into(),
        json!({
            "set": instance_json(src, inst),
            "mode": r.mode.as_str(),
            "cone": r.cone.as_str(),
            "method": r.method.as_str(),
            "force_sdp": opts.force_sdp,
            "tol_gap": opts.solver.tol_gap,
        }),
    );
    m.insert("status".into(), json!(r.status.as_str()));
    m.insert("optimal".into(), json!(r.is_optimal()));
    m.insert("optimal_value".into(), json!(r.alpha));
    m.insert("dual_value".into(), json!(r.beta));
    m.insert("duality_gap".into(), json!(r.gap()));
    m.insert("per_state".into(), json!(r.measurement_check.per_state));
    m.insert("theorem1_bound".into(), json!(r.theorem1));
    m.insert(
        "measurement".into(),
        encode_measurement(&r.measurement, dense_ok)?,
    );
    m.insert(
        "measurement_check".into(),
        encode_measurement_check(&r.measurement_check),
    );
    m.insert(
        "certificate".into(),
        encode_certificate(&r.certificate, dense_ok)?,
    );
    m.insert(
        "certificate_check".into(),
        encode_certificate_check(&r.certificate_check),
    );
    if let Some(c) = &r.exact_check {
        m.insert("exact_check".into(), encode_certificate_check(c));
    }
    if let Some(bp) = r.beta_prime {
        m.insert("eq3_bound".into(), json!(bp));
    }
    if let Some(c) = &r.eq3_certificate {
        m.insert("eq3_certificate".into(), encode_certificate(c, dense_ok)?);
    }
    if let Some(c) = &r.eq3_check {
        m.insert("eq3_check".into(), encode_certificate_check(c));
    }
    m.insert("solver".into(), encode_diagnostics(&r.solver));
    if let Some(d) = &r.eq3_solver {
        m.insert("eq3_solver".into(), encode_diagnostics(d));
    }
    Ok(Value::Object(m))
}

fn solve(a: &SolveArgs, solver: SolverOptions, w: &mut dyn Write) -> Result<i32, CliError> {
    let (src, inst) = resolve_set(&a.set)?;
    let opts = SolveOptions {
        solver,
        force_sdp: a.force_sdp,
        exact: a.exact,
    };
    let r = solve_instance(&inst, a.mode, a.cone, &opts)?;
    let report = solve_report_json(&src, &inst, &r, &opts, a.output.dense)?;
    let mut table = vec![
        ("set", describe(&src, &inst)),
        ("mode", r.mode.as_str().to_string()),
        ("cone", r.cone.as_str().to_string()),
        ("method", r.method.as_str().to_string()),
        ("status", r.status.as_str().to_string()),
        ("optimal value", show(r.alpha)),
        ("dual bound", show(r.beta)),
        ("gap", format!("{:e}", r.gap())),
    ];
    if let Some(bp) = r.beta_prime {
        table.push(("relaxed bound", show(bp)));
    }
    if let Some(t) = r.theorem1 {
        table.push(("d/k bound", show(t)));
    }
    table.push((
        "per-state",
        r.measurement_check
            .per_state
            .iter()
            .map(|&x| show(x))
            .collect::<Vec<_>>()
            .join(" "),
    ));
    table.push((
        "verified",
        format!(
            "measurement {}, certificate {}",
            r.measurement_check.valid, r.certificate_check.valid
        ),
    ));
    if let Some(c) = &r.exact_check {
        table.push(("exact check", verdict(c)));
    }
    emit(report, &a.output, &table, w)?;
    Ok(if r.is_optimal() {
        EXIT_OK
    } else {
        EXIT_NOT_OPTIMAL
    })
}

fn verdict(c: &CertificateCheck) -> String {
    let mut s = if c.valid {
        "valid".to_string()
    } else {
        "invalid".to_string()
    };
    if let Some(b) = &c.exact_bound {
        s.push_str(&format!(", bound {b}"));
    }
    s
}

fn bound(a: &BoundArgs, solver: SolverOptions, w: &mut dyn Write) -> Result<i32, CliError> {
    let (src, inst) = resolve_set(&a.set)?;
    let opts = SolveOptions {
        solver,
        force_sdp: a.force_sdp,
        exact: false,
    };
    let dense_ok = a.output.dense || inst.order() <= DENSE_MAX_ORDER;
    let (cert, check, diag) = eq3_bound(&inst, &opts)?;
    let method = if diag.is_some() {
        Method::Sdp
    } else {
        Method::ClosedForm
    };
    let status = diag.as_ref().map_or(SolveStatus::Optimal, |d| d.status);
    let t1 = theorem1_bound(&inst);
    let t1_check = theorem1_certificate(&inst)
        .map(|c| Certificate::Dense(c).verify(&inst, Backend::Float))
        .transpose()?;
    let mut m = header("bound");
    m.insert(
        "problem".into(),
        json!({
            "set": instance_json(&src, &inst),
            "method": method.as_str(),
            "force_sdp": a.force_sdp,
        }),
    );
    m.insert("status".into(), json!(status.as_str()));
    let ok = status == SolveStatus::Optimal && check.valid;
    m.insert("optimal".into(), json!(ok));
    m.insert("eq3_bound".into(), json!(check.bound));
    m.insert(
        "eq3_certificate".into(),
        encode_certificate(&cert, dense_ok)?,
    );
    m.insert("eq3_check".into(), encode_certificate_check(&check));
    m.insert("theorem1_bound".into(), json!(t1));
    if let Some(c) = &t1_check {
        m.insert("theorem1_check".into(), encode_certificate_check(c));
    }
    if let Some(d) = &diag {
        m.insert("eq3_solver".into(), encode_diagnostics(d));
    }
    let mut table = vec![
        ("set", describe(&src, &inst)),
        ("method", method.as_str().to_string()),
        ("status", status.as_str().to_string()),
        ("relaxed bound", show(check.bound)),
        (
            "certificate",
            if check.valid { "valid" } else { "invalid" }.to_string(),
        ),
    ];
    table.push(("d/k bound", t1.map_or("not applicable".to_string(), show)));
    emit(Value::Object(m), &a.output, &table, w)?;
    Ok(if ok { EXIT_OK } else { EXIT_NOT_OPTIMAL })
}

fn qubit_pairs(inst: &DiscriminationInstance) -> Result<usize, CliError> {
    let d = inst.dim_a();
    if d == inst.dim_b() && d.is_power_of_two() && d >= 2 {
        Ok(d.trailing_zeros() as usize)
    } else {
        Err(CliError::Input(format!(
            "fixture needs equal power-of-two dimensions, got {}x{}",
            inst.dim_a(),
            inst.dim_b()
        )))
    }
}

/// A builtin certificate, `Y=identity[/x]`, or a file.
fn load_certificate(
    spec: &str,
    inst: &DiscriminationInstance,
) -> Result<(Certificate, Option<(crate::discrim::Povm, Mode)>), CliError> {
    if let Some(name) = spec.strip_prefix("fixture:") {
        let cert = match name {
            "thm1" => Certificate::Dense(theorem1_certificate(inst).ok_or_else(|| {
                CliError::Input("fixture:thm1 needs maximally entangled pure states".into())
            })?),
            "thm3" => Certificate::Lattice(theorem3_certificate()),
            "thm5" => Certificate::Lattice(theorem5_certificate(qubit_pairs(inst)?)?),
            "thm6" => Certificate::Lattice(theorem6_corrected()),
            "thm6-printed" => Certificate::Lattice(theorem6_certificate(Theorem6Reading::Shifted)),
            _ => {
                return Err(CliError::Input(format!(
                    "unknown fixture {name:?} (thm1, thm3, thm5, thm6, thm6-printed)"
                )))
            }
        };
        return Ok((cert, None));
    }
    if let Some(rest) = spec.strip_prefix("Y=identity") {
        let scale = match rest.strip_prefix('/') {
            None if rest.is_empty() => 1.0,
            Some(x) => {
                let d: f64 = x
                    .parse()
                    .map_err(|_| CliError::Input(format!("bad divisor in {spec:?}")))?;
                if !(d.is_finite() && d > 0.0) {
                    return Err(CliError::Input(format!("bad divisor in {spec:?}")));
                }
                1.0 / d
            }
            None => return Err(CliError::Input(format!("cannot parse {spec:?}"))),
        };
        let y = HermOp::identity(inst.dim_a(), inst.dim_b()).scale(scale);
        return Ok((Certificate::Dense(DualCertificate::dual3(y)), None));
    }
    let path = Path::new(spec);
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {spec}: {e}")))?;
    let v: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{spec}: {e}")))?;
    if let Some(sv) = v.get("schema_version") {
        if sv.as_u64() != Some(SCHEMA_VERSION) {
            return Err(CliError::Input(format!(
                "{spec}: unsupported schema_version {sv}"
            )));
        }
    }
    if let Some(c) = v.get("certificate") {
        let mode: Mode = v
            .pointer("/problem/mode")
            .and_then(Value::as_str)
            .unwrap_or("min_error")
            .parse()
            .map_err(CliError::Input)?;
        let meas = match v.get("measurement") {
            Some(m) => Some((decode_measurement(m)?, mode)),
            None => None,
        };
        return Ok((decode_certificate(c)?, meas));
    }
    if let Some(c) = v.get("eq3_certificate") {
        return Ok((decode_certificate(c)?, None));
    }
    Ok((decode_certificate(&v)?, None))
}

fn certify(a: &CertifyArgs, w: &mut dyn Write) -> Result<i32, CliError> {
    let (src, inst) = resolve_set(&a.set)?;
    let (cert, meas) = load_certificate(&a.certificate, &inst)?;
    let backend = if a.exact {
        Backend::Exact
    } else {
        Backend::Float
    };
    let check = cert.verify(&inst, backend)?;
    let meas_check = match &meas {
        Some((p, mode)) => Some(p.verify(&inst, *mode)?),
        None => None,
    };
    let ok = check.valid && meas_check.as_ref().is_none_or(|m| m.valid);
    if a.json {
        let mut m = header("certify");
        m.insert("set".into(), instance_json(&src, &inst));
        m.insert("certificate".into(), json!(a.certificate));
        m.insert("certificate_check".into(), encode_certificate_check(&check));
        if let Some(mc) = &meas_check {
            m.insert("measurement_check".into(), encode_measurement_check(mc));
        }
        m.insert("valid".into(), json!(ok));
        w.write_all(canonical(&Value::Object(m)).as_bytes())?;
    } else {
        let mut table = vec![
            ("set", describe(&src, &inst)),
            ("certificate", a.certificate.clone()),
            ("form", check.form.as_str().to_string()),
            ("backend", backend.to_string()),
            ("valid", check.valid.to_string()),
            ("bound", show(check.bound)),
        ];
        if let Some(b) = &check.exact_bound {
            table.push(("exact bound", b.clone()));
        }
        if !check.failures.is_empty() {
            table.push(("failed", check.failures.join("; ")));
        }
        if let Some(mc) = &meas_check {
            table.push((
                "measurement",
                format!(
                    "{} (success {})",
                    if mc.valid { "valid" } else { "invalid" },
                    show(mc.success)
                ),
            ));
        }
        rows(w, &table)?;
    }
    Ok(if ok { EXIT_OK } else { EXIT_NOT_OPTIMAL })
}

fn examples(a: &ExamplesArgs, w: &mut dyn Write) -> Result<i32, CliError> {
    let sets = ExampleSet::all();
    if a.json {
        let list: Vec<Value> = sets
            .iter()
            .map(|s| {
                let d = s.local_dimension();
                json!({
                    "name": s.to_string(),
                    "dim_a": d,
                    "dim_b": d,
                    "k": s.size(),
                    "reference": s.reference(),
                })
            })
            .collect();
        let mut m = header("examples");
        m.insert("sets".into(), Value::Array(list));
        w.write_all(canonical(&Value::Object(m)).as_bytes())?;
        return Ok(EXIT_OK);
    }
    let names: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
    let nw = names.iter().map(|n| n.len()).max().unwrap_or(0);
    for (s, name) in sets.iter().zip(&names) {
        let d = s.local_dimension();
        let dims = format!("C^{d} x C^{d}");
        writeln!(
            w,
            "{name:<nw$}  k={:<3} {dims:<12} {}",
            s.size(),
            s.reference()
        )?;
    }
    Ok(EXIT_OK)
}
