//! Acceptance suite: one PASS/FAIL line per criterion at its stated tolerance.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use serde_json::Value;

use vega_cli::{cmd_analyze, cmd_km2, ProblemFile, Report, ReportStatus, RunOptions};
use vega_core::darboux::{normalize_darboux, verify_darboux, Frequency};
use vega_core::galois::{check_ex2, check_ve2_alpha, route_status, Status};
use vega_core::numeric::{forced_solution, integral_jump, rk4_order_errors};
use vega_core::trig::{classify_meromorphy, omega_scalar, reduce, reduction_identity_residual};
use vega_core::vebuild::{build_ve_chain, extract_ex2, extract_ve2_alpha, extract_ve2_pair, sum_systems, VESystem};
use vega_core::{Arith, Scalar};

type C = Complex64;
type Cmd = fn(&ProblemFile, &vega_core::HomogeneousPotential, &RunOptions) -> Report;
type Criterion = (u32, &'static str, fn() -> Result<String, String>);

fn data(name: &str) -> String {
    let path = format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

fn run_file(name: &str, cmd: Cmd, energy: Option<Scalar>) -> Report {
    let (p, v) = ProblemFile::parse(&data(name)).expect("fixture parses");
    let mut opts = RunOptions::from_problem(&p.options);
    if let Some(e) = energy {
        opts.energy = e;
    }
    cmd(&p, &v, &opts)
}

fn candidate(r: &Report) -> &Value {
    &r.results["candidates"][0]
}

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: f64) -> Result<(), String> {
    check(elapsed.as_secs_f64() < limit, format!("runtime {:.2}s exceeds {limit}s", elapsed.as_secs_f64()))
}

fn oscillator_certificate() -> Result<String, String> {
    let t = Instant::now();
    let r = run_file("oscillator.json", cmd_analyze, None);
    let el = t.elapsed();
    check(r.status == ReportStatus::Ok, format!("status {:?}", r.status))?;
    let c = candidate(&r);
    check(c["verdict"]["status"] == "VirtuallyAbelian", format!("verdict {}", c["verdict"]))?;
    let cert = &c["certificate"];
    check(cert["p_max"] == 5, "certificate does not reach p = 5")?;
    let tables = cert["xi_tables"].as_array().ok_or("no xi tables")?;
    check(tables.len() == 4, format!("{} xi tables", tables.len()))?;
    check(tables.iter().all(|t| t["nonzero"].as_array().is_some_and(|a| a.is_empty())), "nonzero xi entry")?;
    within(el, 10.0)?;
    Ok(format!("xi tables p=2..5 identically zero, {:.2}s < 10s", el.as_secs_f64()))
}

fn obstruction_detection() -> Result<String, String> {
    let t = Instant::now();
    let r = run_file("cubic.json", cmd_analyze, None);
    let el = t.elapsed();
    check(r.status == ReportStatus::Obstruction, format!("status {:?}", r.status))?;
    let w = &candidate(&r)["verdict"]["witness"];
    check(w["subsystem"] == serde_json::json!({"kind": "Ve2Alpha", "alpha": 1, "gamma": 1}), format!("subsystem {}", w["subsystem"]))?;
    // θ¹₁₁ = −∂³V/∂q₁³ at (0,1) = −6c/q₂ = −6
    check(w["coefficient"] == serde_json::json!(["-6", "1"]), format!("theta {}", w["coefficient"]))?;
    check(w["tags"][0] == "Irrational", format!("omega_1 tag {}", w["tags"][0]))?;
    within(el, 5.0)?;
    Ok(format!("witness (1,1), theta = -6, omega_1 irrational, {:.2}s < 5s", el.as_secs_f64()))
}

fn case_truth_tables() -> Result<String, String> {
    let a = Arith::exact();
    let sqrt2 = Frequency::from_lambda(&Scalar::from_i64(2));
    let tags = [Frequency::integer(0), Frequency::integer(1), Frequency::integer(2), sqrt2];
    let nonzero_rational = |w: &Frequency| w.as_rational().is_some_and(|q| !Scalar::from_rational(q).is_zero());
    let expected = |theta: &Scalar, ws: &[&Frequency]| {
        if theta.is_zero() || ws.iter().all(|w| nonzero_rational(w)) {
            Status::VirtuallyAbelian
        } else {
            Status::NotVirtuallyAbelian
        }
    };
    let mut total = 0;
    let mut bad = Vec::new();
    for theta in [Scalar::zero(), Scalar::one()] {
        for wa in &tags {
            for wg in &tags {
                total += 1;
                let e = expected(&theta, &[wa, wg]);
                let l = check_ve2_alpha(&theta, wa, wg, &a).status;
                let r = route_status(&theta, &[wa, wg], true, &a);
                if l != e || r != e {
                    bad.push(format!("VE2 theta={theta} ({wa},{wg}): table {l:?} route {r:?} expected {e:?}"));
                }
                for wb in &tags {
                    total += 1;
                    let e = expected(&theta, &[wa, wb, wg]);
                    let l = check_ex2(&theta, wa, wb, wg, &a).status;
                    let r = route_status(&theta, &[wa, wb, wg], false, &a);
                    if l != e || r != e {
                        bad.push(format!("EX2 theta={theta} ({wa},{wb},{wg}): table {l:?} route {r:?} expected {e:?}"));
                    }
                }
            }
        }
    }
    check(bad.is_empty(), bad.join("; "))?;
    Ok(format!("{total}/{total} cases agree (case table, integrand route, iff condition)"))
}

fn classifier_agreement() -> Result<String, String> {
    let mut probes: Vec<Frequency> = (-12..=12).map(Frequency::integer).collect();
    for (n, d) in [(1, 2), (-3, 2), (5, 3), (25, 2)] {
        probes.push(Frequency::rational(Scalar::from_ratio(n, d).as_rational().expect("rational").clone()));
    }
    probes.push(Frequency::from_lambda(&Scalar::from_i64(2)));
    probes.push(Frequency::from_lambda(&Scalar::from_i64(7)));
    let mut total = 0;
    let mut bad = Vec::new();
    for n in 1..=12u32 {
        for w in &probes {
            total += 1;
            let ws = omega_scalar(w);
            let red = reduce(n, &ws).map_err(|e| e.to_string())?;
            let p_zero = red.p.is_exact() && red.p.is_zero();
            let tail_meromorphic = red.tail_order == 2 && w.as_surd().is_some_and(|s| s.is_zero());
            let expected = p_zero || tail_meromorphic;
            let got = classify_meromorphy(n, w).meromorphic;
            if got != expected {
                bad.push(format!("(n={n}, omega={w}): classifier {got}, reduction {expected}"));
            }
            if ws.is_exact() && !reduction_identity_residual(&red).is_zero() {
                bad.push(format!("(n={n}, omega={w}): recurrence identity residual nonzero"));
            }
        }
    }
    check(bad.is_empty(), bad.join("; "))?;
    Ok(format!("{total}/{total} (n, omega) pairs agree; recurrence identity exact"))
}

fn monodromy_numerics() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for w in [0.0, 1.0, 2f64.sqrt()] {
        let jump = integral_jump(move |t: C| (C::i() * w * t).exp(), 0, 0.5, 4096).map_err(|e| e.to_string())?;
        worst = worst.max((jump - C::new(0.0, 2.0 * PI)).norm());
    }
    check(worst < 1e-6, format!("jump error {worst:e} >= 1e-6"))?;
    let e = rk4_order_errors(2.0, 50);
    let ratios = [e[0] / e[1], e[1] / e[2]];
    check(ratios.iter().all(|r| (12.0..=20.0).contains(r)), format!("step-halving ratios {ratios:?}"))?;
    Ok(format!("max jump error {worst:.1e} < 1e-6; RK4 ratios {:.2}, {:.2} in [12, 20]", ratios[0], ratios[1]))
}

fn km2_containment() -> Result<String, String> {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for file in ["radial_km2.json", "jordan_km2.json"] {
        for e in [0, 1] {
            let r = run_file(file, cmd_km2, Some(Scalar::from_i64(e)));
            check(r.status == ReportStatus::Ok, format!("{file} e={e}: status {:?} {:?}", r.status, r.errors))?;
            let c = candidate(&r);
            check(c["symbolic_residuals_zero"] == true, format!("{file} e={e}: symbolic residual nonzero"))?;
            check(c["solution"]["p_max"] == 3, format!("{file}: p_max"))?;
            let res = c["numeric_residual"].as_f64().ok_or("numeric residual missing")?;
            check(res < 1e-8, format!("{file} e={e}: numeric residual {res:e}"))?;
            worst = worst.max(res);
        }
    }
    let el = t.elapsed();
    within(el, 60.0)?;
    Ok(format!("diagonal and Jordan, e in {{0, 1}}: symbolic residuals zero, numeric max {worst:.1e} < 1e-8 at 20 points, {:.2}s < 60s", el.as_secs_f64()))
}

/// Forcing of a VE₂ system along `φ = sin t` with order-one sources
/// `x_i = a_i cos ω_i t + b_i sin ω_i t`.
fn forcing(system: &VESystem, target: usize, x: &[(C, C)], omegas: &[C]) -> impl Fn(C) -> C + Send + Sync + 'static {
    let terms: Vec<(C, i32, Vec<(usize, u32)>)> = system
        .forcing
        .iter()
        .filter(|t| t.target == target)
        .map(|t| (t.coefficient.to_c64(), t.phi_power, t.monomial.iter().map(|(v, e)| (v.component, *e)).collect()))
        .collect();
    let x = x.to_vec();
    let omegas = omegas.to_vec();
    move |t: C| {
        let src = |i: usize| x[i].0 * (omegas[i] * t).cos() + x[i].1 * (omegas[i] * t).sin();
        terms.iter().map(|(c, pp, mono)| *c * t.sin().powi(*pp) * mono.iter().map(|(i, e)| src(*i).powi(*e as i32)).product::<C>()).sum()
    }
}

fn superposition() -> Result<String, String> {
    let (_, v) = ProblemFile::parse(&data("superposition.json")).map_err(|e| e.to_string())?;
    let d = [Scalar::zero(), Scalar::zero(), Scalar::one()];
    let dd = verify_darboux(&v, &d, &Arith::exact()).map_err(|e| e.to_string())?;
    let (w, dd) = normalize_darboux(&v, &dd).map_err(|e| e.to_string())?;
    let chain = build_ve_chain(&w, &dd, 2).map_err(|e| e.to_string())?;
    let free: Vec<usize> = (0..chain.n()).filter(|&i| chain.frame.darboux_index != Some(i)).collect();
    let (a, b, g) = (free[0], free[1], free[0]);
    let pair = extract_ve2_pair(&chain, a, b, g).map_err(|e| e.to_string())?;
    let parts = [
        extract_ve2_alpha(&chain, a, g).map_err(|e| e.to_string())?,
        extract_ve2_alpha(&chain, b, g).map_err(|e| e.to_string())?,
        extract_ex2(&chain, a, b, g).map_err(|e| e.to_string())?,
    ];
    check(parts.iter().all(|p| !p.forcing.is_empty()), "a part has no forcing")?;
    let refs: Vec<&VESystem> = parts.iter().collect();
    let summed = sum_systems(&refs, &Arith::exact()).map_err(|e| e.to_string())?;
    check(summed.forcing == pair.forcing, "summed forcing differs from VE2,(a,b)")?;
    let omegas: Vec<C> = chain.frame.lambdas.iter().map(|l| l.to_c64().sqrt()).collect();
    let lam_g = chain.frame.lambdas[g].to_c64();
    let src = [(C::new(1.0, 0.0), C::new(0.5, 0.0)), (C::new(-0.3, 0.0), C::new(1.0, 0.0))];
    let solve = |s: &VESystem| forced_solution(move |_| lam_g, forcing(s, g, &src, &omegas), 0.5, 2.5, 2000);
    let full = solve(&pair);
    let pieces: Vec<_> = parts.iter().map(solve).collect();
    let mut worst: f64 = 0.0;
    for (i, (_, z, _)) in full.iter().enumerate() {
        let sum: C = pieces.iter().map(|p| p[i].1).sum();
        worst = worst.max((z - sum).norm());
    }
    check(worst < 1e-8, format!("superposition residual {worst:e}"))?;
    Ok(format!("VE2,({0},{1})^{0} = VE2,{0}^{0} + VE2,{1}^{0} + EX2,({0},{1})^{0}; residual {worst:.1e} < 1e-8", a + 1, b + 1))
}

fn determinism() -> Result<String, String> {
    let jobs: [(&str, Cmd); 4] =
        [("oscillator.json", cmd_analyze), ("cubic.json", cmd_analyze), ("radial_km2.json", cmd_km2), ("jordan_km2.json", cmd_km2)];
    let mut compared = 0;
    for (file, cmd) in jobs {
        let reference = run_file(file, cmd, None).to_canonical_json();
        check(Report::from_json(&reference).map_err(|e| e.to_string())?.to_canonical_json() == reference, format!("{file}: round trip"))?;
        for threads in [1, 2, 4] {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
            let again = pool.install(|| run_file(file, cmd, None).to_canonical_json());
            check(again == reference, format!("{file}: report differs with {threads} threads"))?;
            compared += 1;
        }
    }
    let bin = env!("CARGO_BIN_EXE_vega");
    let path = format!("{}/tests/data/cubic.json", env!("CARGO_MANIFEST_DIR"));
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = Command::new(bin).args(["analyze", &path]).env("VEGA_THREADS", threads).output().map_err(|e| e.to_string())?;
        check(out.status.code() == Some(2), format!("binary exit {:?}", out.status.code()))?;
        outputs.push(out.stdout);
    }
    check(outputs[0] == outputs[1], "binary output differs across VEGA_THREADS")?;
    Ok(format!("{compared} in-process reruns and 2 binary runs byte-identical across thread counts"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (1, "oscillator certificate", oscillator_certificate),
        (2, "obstruction detection", obstruction_detection),
        (3, "case table truth tables", case_truth_tables),
        (4, "meromorphy classifier", classifier_agreement),
        (5, "monodromy numerics", monodromy_numerics),
        (6, "k = -2 constructive solutions", km2_containment),
        (7, "superposition identity", superposition),
        (8, "determinism", determinism),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|e| Err(format!("panic: {:?}", e.downcast_ref::<String>())));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{id}] {name} ({secs:.2}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{id}] {name} ({secs:.2}s): {detail}");
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
