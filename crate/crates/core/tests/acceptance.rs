//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the test harness so the lines are always printed. The
//! process fails if any criterion other than the known-unattainable ones
//! fails, or if one of those unexpectedly passes.

mod common;

use std::time::{Duration, Instant};

use pptdiscrim::conic::{
    check_solution, solve, solve_lp, BlockKind, ConicProblem, LinearProgram, SolveStatus,
    SolverOptions, SparseHerm,
};
use pptdiscrim::discrim::{
    lattice_reduce, theorem1_bound, theorem3_certificate, theorem4_measurement,
    theorem5_certificate, verify_certificate, verify_lattice_certificate, verify_measurement,
    Backend, Cone, Mode, SolveOptions, SolveReport, CHAIN_TOL,
};
use pptdiscrim::hermlin::{herm_eigvals, CMatrix, Complex64, HermOp, ONE};
use pptdiscrim::states::{
    bell_density, dephase_bell, example_set, lattice_density, lattice_operator, parity_set,
    BellIndex, DiscriminationInstance, ExampleSet, LatticeVector, LATTICE8_SHIFTED,
    LATTICE8_WRAPPED,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria whose literal statement is known not to hold.
const UNATTAINABLE: &[u32] = &[6];

const VALUE_TOL: f64 = 1e-6;

struct Ctx {
    /// `(label, α, β, β′)` of every solve, for the duality chain.
    chain: Vec<(String, f64, f64, Option<f64>)>,
}

impl Ctx {
    fn solve(
        &mut self,
        label: &str,
        inst: &DiscriminationInstance,
        mode: Mode,
        cone: Cone,
        force_sdp: bool,
    ) -> Result<SolveReport, String> {
        let opts = SolveOptions {
            force_sdp,
            ..Default::default()
        };
        let r = pptdiscrim::discrim::solve_instance(inst, mode, cone, &opts)
            .map_err(|e| format!("{label}: {e}"))?;
        if !r.is_optimal() {
            return Err(format!("{label}: status {} not verified optimal", r.status));
        }
        self.chain
            .push((label.to_string(), r.alpha, r.beta, r.beta_prime));
        Ok(r)
    }
}

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn c1(ctx: &mut Ctx) -> Outcome {
    let inst = example_set(ExampleSet::Yde4).map_err(|e| e.to_string())?;
    let t0 = Instant::now();
    let lp = ctx.solve("yde4 lp", &inst, Mode::MinError, Cone::Ppt, false)?;
    let lp_time = t0.elapsed();
    let t0 = Instant::now();
    let sdp = ctx.solve("yde4 sdp", &inst, Mode::MinError, Cone::Ppt, true)?;
    let sdp_time = t0.elapsed();
    for (name, r, dt) in [("lp", &lp, lp_time), ("sdp", &sdp, sdp_time)] {
        ensure(
            (r.alpha - 0.875).abs() <= VALUE_TOL,
            format!("{name}: alpha {}", r.alpha),
        )?;
        ensure(
            r.solver.gap.abs() <= 1e-8,
            format!("{name}: solver gap {:e}", r.solver.gap),
        )?;
        ensure(
            dt < Duration::from_secs(5),
            format!("{name}: {:.2}s", dt.as_secs_f64()),
        )?;
    }
    Ok(format!(
        "alpha lp {:.12} ({:.2}s, gap {:.1e}), sdp {:.12} ({:.2}s, gap {:.1e})",
        lp.alpha,
        lp_time.as_secs_f64(),
        lp.solver.gap,
        sdp.alpha,
        sdp_time.as_secs_f64(),
        sdp.solver.gap
    ))
}

fn c2(ctx: &mut Ctx) -> Outcome {
    let inst = example_set(ExampleSet::Yde4).map_err(|e| e.to_string())?;
    let lp = ctx.solve("yde4 unamb lp", &inst, Mode::Unambiguous, Cone::Ppt, false)?;
    let sdp = ctx.solve("yde4 unamb sdp", &inst, Mode::Unambiguous, Cone::Ppt, true)?;
    for (name, r) in [("lp", &lp), ("sdp", &sdp)] {
        ensure(
            (r.alpha - 0.75).abs() <= VALUE_TOL && (r.beta - 0.75).abs() <= VALUE_TOL,
            format!("{name}: alpha {} beta {}", r.alpha, r.beta),
        )?;
    }
    Ok(format!("alpha lp {:.12}, sdp {:.12}", lp.alpha, sdp.alpha))
}

fn c3(_: &mut Ctx) -> Outcome {
    let inst = example_set(ExampleSet::Yde4).map_err(|e| e.to_string())?;
    let m = theorem4_measurement()
        .to_dense()
        .map_err(|e| e.to_string())?;
    let chk = verify_measurement(&inst, &m, Mode::MinError).map_err(|e| e.to_string())?;
    let mut worst: f64 = f64::INFINITY;
    for p in &m.operators {
        worst = worst.min(p.min_eigval().unwrap());
        worst = worst.min(p.partial_transpose().min_eigval().unwrap());
    }
    ensure(
        chk.completeness_defect <= 1e-12,
        format!("completeness {:e}", chk.completeness_defect),
    )?;
    ensure(worst >= -1e-12, format!("min eigenvalue {worst:e}"))?;
    for (i, s) in chk.per_state.iter().enumerate() {
        ensure(
            (s - 0.875).abs() <= 1e-12,
            format!("<P{0},rho{0}> = {s}", i + 1),
        )?;
    }
    Ok(format!(
        "completeness {:.1e}, min eig over 8 conditions {:.1e}, per-state {:?}",
        chk.completeness_defect, worst, chk.per_state
    ))
}

fn c4(_: &mut Ctx) -> Outcome {
    let inst = example_set(ExampleSet::Yde4).map_err(|e| e.to_string())?;
    let dense = theorem3_certificate()
        .to_dense()
        .map_err(|e| e.to_string())?;
    let chk = verify_certificate(&inst, &dense, Backend::Exact).map_err(|e| e.to_string())?;
    ensure(chk.valid, format!("invalid: {:?}", chk.failures))?;
    ensure(
        chk.exact_bound.as_deref() == Some("7/8"),
        format!("exact bound {:?}", chk.exact_bound),
    )?;
    Ok("dual3 exact-feasible, Tr(Y)/k = 7/8".into())
}

fn c5(ctx: &mut Ctx) -> Outcome {
    let mut notes = Vec::new();
    for (n, frac, value) in [
        (3usize, "31/32", 31.0 / 32.0),
        (4, "127/128", 127.0 / 128.0),
    ] {
        let inst = example_set(ExampleSet::Pow2(n)).map_err(|e| e.to_string())?;
        let cert = theorem5_certificate(n).map_err(|e| e.to_string())?;
        let chk =
            verify_lattice_certificate(&inst, &cert, Backend::Exact).map_err(|e| e.to_string())?;
        ensure(
            chk.valid && chk.exact_bound.as_deref() == Some(frac),
            format!(
                "pow2_{n}: certificate {:?} {:?}",
                chk.valid, chk.exact_bound
            ),
        )?;
        let r = ctx.solve(
            &format!("pow2_{n}"),
            &inst,
            Mode::MinError,
            Cone::Ppt,
            false,
        )?;
        ensure(
            r.alpha <= value + VALUE_TOL && r.alpha < 1.0 - 1e-4,
            format!("pow2_{n}: alpha {}", r.alpha),
        )?;
        notes.push(format!("pow2_{n}: bound {frac}, alpha {:.9}", r.alpha));
    }
    Ok(notes.join("; "))
}

fn lattice_instance(rows: &[[usize; 3]]) -> Result<DiscriminationInstance, String> {
    let v = rows
        .iter()
        .map(|r| LatticeVector::from_values(r))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    DiscriminationInstance::from_lattice(v, None).map_err(|e| e.to_string())
}

fn c6(ctx: &mut Ctx) -> Outcome {
    let mut notes = Vec::new();
    let mut hit = false;
    for (name, rows) in [
        ("shifted", &LATTICE8_SHIFTED),
        ("wrapped", &LATTICE8_WRAPPED),
    ] {
        let inst = lattice_instance(rows)?;
        let r = ctx.solve(
            &format!("lattice8 {name}"),
            &inst,
            Mode::MinError,
            Cone::Ppt,
            false,
        )?;
        hit |= (r.alpha - 15.0 / 16.0).abs() <= VALUE_TOL;
        notes.push(format!(
            "{name}: optimum {:.9}, relaxed bound {:.9}",
            r.alpha,
            r.beta_prime.unwrap_or(f64::NAN)
        ));
    }
    let detail = notes.join("; ");
    if hit {
        Ok(detail)
    } else {
        Err(format!("no reading reaches 15/16 — {detail}"))
    }
}

fn c7(ctx: &mut Ctx) -> Outcome {
    let mut notes = Vec::new();
    for (set, floor) in [(ExampleSet::Gbell5, 0.0101), (ExampleSet::Gbell6, 0.002)] {
        let inst = example_set(set).map_err(|e| e.to_string())?;
        let t0 = Instant::now();
        let r = ctx.solve(&set.to_string(), &inst, Mode::MinError, Cone::Ppt, false)?;
        let err = 1.0 - r.alpha;
        ensure(err >= floor - 1e-4, format!("{set}: error {err}"))?;
        notes.push(format!(
            "{set}: error {err:.7} (>= {floor} - 1e-4, {:.1}s)",
            t0.elapsed().as_secs_f64()
        ));
    }
    Ok(notes.join("; "))
}

fn c8(ctx: &mut Ctx) -> Outcome {
    let inst = example_set(ExampleSet::BellBasis).map_err(|e| e.to_string())?;
    let dk = theorem1_bound(&inst).ok_or("d/k bound not applicable")?;
    let sdp = ctx.solve("bell_basis sdp", &inst, Mode::MinError, Cone::Ppt, true)?;
    let lp = ctx.solve("bell_basis lp", &inst, Mode::MinError, Cone::Ppt, false)?;
    ensure(dk == 0.5, format!("d/k = {dk}"))?;
    for (name, r) in [("sdp", &sdp), ("lp", &lp)] {
        ensure(
            (r.alpha - 0.5).abs() <= VALUE_TOL,
            format!("{name}: alpha {}", r.alpha),
        )?;
    }
    Ok(format!(
        "sdp {:.12}, lp {:.12}, d/k {dk}",
        sdp.alpha, lp.alpha
    ))
}

fn random_herm(n: usize, rng: &mut ChaCha8Rng) -> HermOp {
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
        for j in (i + 1)..n {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    let d = (n as f64).sqrt() as usize;
    HermOp::new(d, d, m).unwrap()
}

fn c9(ctx: &mut Ctx) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
    // (a) transposes of the four Bell projectors.
    let half = HermOp::identity(2, 2).scale(0.5);
    for i in 0..4 {
        let bi = BellIndex::new(i).unwrap();
        let want = half
            .sub(&bell_density(BellIndex::new([2, 3, 0, 1][i]).unwrap()))
            .unwrap();
        let got = bell_density(bi).partial_transpose();
        let d = got.max_abs_diff(&want).unwrap();
        ensure(d <= 1e-14, format!("(a) psi{i}: {d:e}"))?;
    }
    // (b) sign expansion of T_A(ψ_v), exhaustive for t ≤ 3.
    let mut checked = 0;
    for t in 1..=3usize {
        let n = 1usize << (2 * t);
        for code in 0..n {
            let v = LatticeVector::from_code(t, code);
            let mut c = vec![1.0 / (1u64 << t) as f64; n];
            for w in parity_set(&v) {
                let fw = w.transpose_partner().code();
                c[fw] -= 2.0 / (1u64 << t) as f64;
            }
            let want = lattice_operator(t, &c).unwrap();
            let got = lattice_density(&v).partial_transpose();
            let d = got.max_abs_diff(&want).unwrap();
            ensure(d <= 1e-14, format!("(b) t={t} v={code}: {d:e}"))?;
            checked += 1;
        }
    }
    // (c) dephasing commutes with the partial transpose.
    for s in 0..50 {
        let n = if s % 2 == 0 { 4 } else { 16 };
        let x = random_herm(n, &mut rng);
        let a = dephase_bell(&x.partial_transpose()).unwrap();
        let b = dephase_bell(&x).unwrap().partial_transpose();
        let d = a.max_abs_diff(&b).unwrap();
        ensure(d <= 1e-12, format!("(c) sample {s}: {d:e}"))?;
    }
    // (d) LP and SDP agree, both modes.
    let mut instances = vec![example_set(ExampleSet::Yde4).map_err(|e| e.to_string())?];
    for s in 0..20 {
        let k = rng.gen_range(2..=8);
        instances.push(common::random_lattice(2, k, s % 4 == 3, &mut rng));
    }
    let mut worst: f64 = 0.0;
    for (s, inst) in instances.iter().enumerate() {
        for mode in [Mode::MinError, Mode::Unambiguous] {
            let lp = ctx.solve(&format!("(d) {s} {mode} lp"), inst, mode, Cone::Ppt, false)?;
            let sdp = ctx.solve(&format!("(d) {s} {mode} sdp"), inst, mode, Cone::Ppt, true)?;
            let d = (lp.alpha - sdp.alpha).abs();
            worst = worst.max(d);
            ensure(
                d <= VALUE_TOL,
                format!("(d) instance {s} {mode}: lp {} sdp {}", lp.alpha, sdp.alpha),
            )?;
        }
    }
    // (f) more than d maximally entangled states.
    let mut margin = f64::INFINITY;
    for s in 0..20 {
        let d = 2 + s % 2;
        let k = rng.gen_range(d + 1..=d * d);
        let inst = common::rotated_generalized_bell(d, k, &mut rng);
        let dk = d as f64 / k as f64;
        ensure(
            theorem1_bound(&inst).map_or(false, |b| (b - dk).abs() < 1e-12),
            format!("(f) set {s}: d/k not detected"),
        )?;
        let r = ctx.solve(&format!("(f) {s}"), &inst, Mode::MinError, Cone::Ppt, false)?;
        ensure(
            r.alpha <= dk + VALUE_TOL,
            format!("(f) set {s}: alpha {} > d/k {dk}", r.alpha),
        )?;
        margin = margin.min(dk - r.alpha);
    }
    // (e) the chain over every solve so far, this run included.
    let mut chain_worst = f64::NEG_INFINITY;
    for (label, a, b, bp) in &ctx.chain {
        chain_worst = chain_worst.max(a - b);
        ensure(
            *a <= b + CHAIN_TOL,
            format!("(e) {label}: alpha {a} > beta {b}"),
        )?;
        if let Some(bp) = bp {
            chain_worst = chain_worst.max(b - bp);
            ensure(
                *b <= bp + CHAIN_TOL,
                format!("(e) {label}: beta {b} > beta' {bp}"),
            )?;
        }
    }
    Ok(format!(
        "(a) ok (b) {checked} vectors (c) 50 samples (d) max |lp-sdp| {worst:.1e} over {} instance-mode pairs (e) {} solves, worst excess {chain_worst:.1e} (f) min d/k - alpha {margin:.1e}",
        instances.len() * 2,
        ctx.chain.len()
    ))
}

fn lambda_max(cm: &CMatrix, kind: BlockKind) -> ConicProblem {
    let n = cm.rows();
    let mut p = ConicProblem::new();
    let b = p.add_block(kind, n, "X");
    p.set_objective(b, SparseHerm::from_matrix(cm));
    let mut tr = SparseHerm::new();
    for i in 0..n {
        tr.push(i, i, ONE);
    }
    p.add_row(vec![(b, tr)], 1.0);
    p
}

fn reverified(p: &ConicProblem, sol: &pptdiscrim::conic::ConicSolution) -> Result<(), String> {
    ensure(
        sol.status == SolveStatus::Optimal,
        format!("status {}", sol.status),
    )?;
    let chk = check_solution(p, &sol.primal, &sol.y).map_err(|e| e.to_string())?;
    ensure(
        chk.primal_residual <= 1e-8 && chk.primal_min_eig >= -1e-9 && chk.dual_min_eig >= -1e-9,
        format!(
            "re-check: residual {:e}, min eigs {:e} / {:e}",
            chk.primal_residual, chk.primal_min_eig, chk.dual_min_eig
        ),
    )?;
    ensure(
        chk.gap == sol.check.gap && chk.primal_residual == sol.check.primal_residual,
        "re-check differs from reported check".into(),
    )
}

fn c10(_: &mut Ctx) -> Outcome {
    let opts = SolverOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0010);
    let diag = CMatrix::from_real_diag(&[1.0, 3.0, 2.0]);
    for kind in [BlockKind::Symmetric, BlockKind::Hermitian] {
        let p = lambda_max(&diag, kind);
        let sol = solve(&p, &opts).map_err(|e| e.to_string())?;
        reverified(&p, &sol)?;
        ensure(
            (sol.primal_objective() - 3.0).abs() <= 1e-8,
            format!("diag(1,3,2): {}", sol.primal_objective()),
        )?;
    }
    for s in 0..5 {
        let h = random_herm(4, &mut rng).into_matrix();
        let want = *herm_eigvals(&h).unwrap().last().unwrap();
        let p = lambda_max(&h, BlockKind::Hermitian);
        let sol = solve(&p, &opts).map_err(|e| e.to_string())?;
        reverified(&p, &sol)?;
        ensure(
            (sol.primal_objective() - want).abs() <= 1e-7,
            format!("random {s}: {} vs {want}", sol.primal_objective()),
        )?;
    }
    // Diagonal programs: LP and the same data as a diagonal SDP.
    let mut worst: f64 = 0.0;
    for s in 0..10 {
        let (n, m) = (6, 3);
        let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
        let mut rows: Vec<Vec<(usize, f64)>> = (0..m)
            .map(|_| (0..n).map(|j| (j, rng.gen_range(-1.0..1.0))).collect())
            .collect();
        rows.push((0..n).map(|j| (j, 1.0)).collect());
        let b: Vec<f64> = rows
            .iter()
            .map(|r| r.iter().map(|&(j, a)| a * x0[j]).sum())
            .collect();
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lp = LinearProgram {
            c: c.clone(),
            rows: rows.clone(),
            b: b.clone(),
        };
        let lsol = solve_lp(&lp, &opts).map_err(|e| e.to_string())?;
        let conic = lp.to_conic();
        let csol = solve(&conic, &opts).map_err(|e| e.to_string())?;
        reverified(&conic, &csol)?;
        let mut p = ConicProblem::new();
        let blk = p.add_block(BlockKind::Symmetric, n, "X");
        let mut obj = SparseHerm::new();
        for (j, &cj) in c.iter().enumerate() {
            obj.push(j, j, Complex64::new(cj, 0.0));
        }
        p.set_objective(blk, obj);
        for (r, &br) in rows.iter().zip(&b) {
            let mut a = SparseHerm::new();
            for &(j, v) in r {
                a.push(j, j, Complex64::new(v, 0.0));
            }
            p.add_row(vec![(blk, a)], br);
        }
        let ssol = solve(&p, &opts).map_err(|e| e.to_string())?;
        reverified(&p, &ssol)?;
        ensure(
            lsol.status == SolveStatus::Optimal,
            format!("lp {s}: {}", lsol.status),
        )?;
        let d = (lsol.primal_objective - ssol.primal_objective()).abs();
        worst = worst.max(d);
        ensure(
            d <= 1e-7,
            format!(
                "program {s}: lp {} sdp {}",
                lsol.primal_objective,
                ssol.primal_objective()
            ),
        )?;
    }
    // The lattice programs are diagonal too: residuals re-verified.
    let inst = example_set(ExampleSet::Yde4).map_err(|e| e.to_string())?;
    let prog = lattice_reduce(&inst, Mode::MinError, Cone::Ppt).map_err(|e| e.to_string())?;
    let sol = solve(&prog.problem, &opts).map_err(|e| e.to_string())?;
    reverified(&prog.problem, &sol)?;
    Ok(format!(
        "lambda_max on 7 problems, diagonal LP vs SDP max diff {worst:.1e}, residuals re-verified"
    ))
}

fn main() {
    let criteria: [(u32, &str, fn(&mut Ctx) -> Outcome); 10] = [
        (1, "yde4 min-error PPT optimum 7/8", c1),
        (2, "yde4 unambiguous PPT optimum 3/4", c2),
        (3, "7/8 measurement fixture verifies", c3),
        (4, "7/8 certificate exact", c4),
        (5, "pow2(3), pow2(4) certificates and optima", c5),
        (6, "lattice8 PPT optimum 15/16", c6),
        (7, "gbell5 / gbell6 error floors", c7),
        (8, "bell_basis optimum d/k = 1/2", c8),
        (9, "property suite", c9),
        (10, "solver unit checks", c10),
    ];
    let mut ctx = Ctx { chain: Vec::new() };
    let mut unexpected = Vec::new();
    let t0 = Instant::now();
    for (id, name, f) in criteria {
        let start = Instant::now();
        let outcome = f(&mut ctx);
        let secs = start.elapsed().as_secs_f64();
        let known = UNATTAINABLE.contains(&id);
        match &outcome {
            Ok(d) => println!("PASS [{id:>2}] {name} — {d} ({secs:.1}s)"),
            Err(d) => println!(
                "FAIL [{id:>2}] {name} — {d} ({secs:.1}s){}",
                if known { " [known: see notes]" } else { "" }
            ),
        }
        if outcome.is_ok() == known {
            unexpected.push(id);
        }
    }
    println!("acceptance finished in {:.1}s", t0.elapsed().as_secs_f64());
    if !unexpected.is_empty() {
        eprintln!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
