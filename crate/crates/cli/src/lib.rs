//! Pipelines behind the `vega` binary. Every command returns a [`Report`];
//! failures become report entries rather than panics.

pub mod problem;
pub mod report;

use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use vega_core::balgebra::{solve_homogeneous, solve_ve_chain_km2, Regime};
use vega_core::darboux::{classify_resonance, normalize_darboux, verify_darboux, DarbouxData, Frequency};
use vega_core::galois::{inductive_analysis, verdict_ve2, Status};
use vega_core::numeric::{commutator_diagnostic, integral_jump, linearize_ve2, monodromy_matrix, monodromy_set, sin_phi};
use vega_core::trig::{classify_meromorphy, laurent_residue, omega_scalar, reduce};
use vega_core::vebuild::{build_ve_chain, ForceJet};
use vega_core::{Error, HomogeneousPotential, Scalar};

pub use problem::{ParseError, ProblemFile, ProblemOptions, RunOptions};
pub use report::{Report, ReportStatus};

type C = Complex64;

/// Sample count for k = −2 numeric residuals.
pub const KM2_SAMPLES: usize = 20;
/// Numeric residual bound for k = −2 containment.
pub const KM2_RESIDUAL_TOL: f64 = 1e-8;

fn status_of(s: Status) -> ReportStatus {
    match s {
        Status::VirtuallyAbelian => ReportStatus::Ok,
        Status::NotVirtuallyAbelian => ReportStatus::Obstruction,
        Status::Inconclusive => ReportStatus::Inconclusive,
    }
}

type StageResult<T> = std::result::Result<T, (&'static str, Error)>;

fn at<T>(stage: &'static str, r: vega_core::Result<T>) -> StageResult<T> {
    r.map_err(|e| (stage, e))
}

fn prepare(v: &HomogeneousPotential, d: &[Scalar], opts: &RunOptions) -> StageResult<(HomogeneousPotential, DarbouxData)> {
    let data = at("verify", verify_darboux(v, d, &opts.arith()))?;
    at("normalize", normalize_darboux(v, &data))
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("report values serialize")
}

/// Runs `per_candidate` over every Darboux candidate and folds the statuses.
fn over_candidates<F>(report: &mut Report, problem: &ProblemFile, mut per_candidate: F)
where
    F: FnMut(&[Scalar]) -> StageResult<(ReportStatus, Value)>,
{
    if problem.darboux_candidates.is_empty() {
        report.error("input", None, "no Darboux candidates given");
        return;
    }
    let mut status = ReportStatus::Ok;
    let mut values = Vec::new();
    for (i, d) in problem.darboux_candidates.iter().enumerate() {
        match per_candidate(d) {
            Ok((s, mut v)) => {
                status = status.combine(s);
                v["index"] = json!(i);
                values.push(v);
            }
            Err((stage, e)) => report.error(stage, Some(i), e.to_string()),
        }
    }
    report.set("candidates", &values);
    report.status = report.status.combine(status);
}

/// k = 2: verify, spectrum, VE₂ verdict, then the inductive analysis up to `p_max`.
pub fn cmd_analyze(problem: &ProblemFile, v: &HomogeneousPotential, opts: &RunOptions) -> Report {
    let mut report = Report::new("analyze", Some(opts));
    if v.k() != 2 {
        report.error("input", None, format!("analyze needs k = 2, got k = {} (use km2 for k = -2)", v.k()));
        return report;
    }
    over_candidates(&mut report, problem, |d| analyze_candidate(v, d, opts));
    report
}

fn analyze_candidate(v: &HomogeneousPotential, d: &[Scalar], opts: &RunOptions) -> StageResult<(ReportStatus, Value)> {
    let (w, data) = prepare(v, d, opts)?;
    let frequencies = data.frequencies();
    let resonance = classify_resonance(&frequencies).with_assertion(opts.assert_independence);
    let frame = at("spectrum", data.frame(false))?;
    let jet = at("couplings", ForceJet::new(&w, &data.d, &frame, 2))?;
    let n = frame.n();
    let mut theta = Vec::new();
    for g in 0..n {
        for a in 0..n {
            for b in a..n {
                let t = jet.derivative(g, &[a, b]);
                if !data.arith.is_zero(&t) {
                    theta.push(json!({"alpha": a + 1, "beta": b + 1, "gamma": g + 1, "value": to_value(&t)}));
                }
            }
        }
    }
    let ve2 = at("verdict_ve2", verdict_ve2(&w, &data))?;
    let mut verdict = ve2.clone();
    let mut certificate = None;
    let mut note = None;
    if ve2.status == Status::VirtuallyAbelian && opts.p_max > 2 {
        match inductive_analysis(&w, &data, opts.p_max, &resonance) {
            Ok((v3, cert)) => {
                verdict = v3;
                certificate = Some(cert);
            }
            Err(e @ (Error::NonResonanceNotEstablished | Error::Unsupported(_))) => {
                verdict.status = Status::Inconclusive;
                note = Some(format!("orders 3..={} not analysed: {e}", opts.p_max));
            }
            Err(e) => return Err(("inductive_analysis", e)),
        }
    }
    let value = json!({
        "d": to_value(&data.d),
        "gamma": to_value(&data.gamma),
        "rescaling": to_value(&data.rescaling),
        "hessian": to_value(&data.hessian),
        "eigenvalues": to_value(&data.eigenvalues()),
        "frequencies": to_value(&frequencies),
        "resonance": to_value(&resonance),
        "theta": theta,
        "verdict_ve2": to_value(&ve2),
        "verdict": to_value(&verdict),
        "certificate": to_value(&certificate),
        "note": note,
    });
    Ok((status_of(verdict.status), value))
}

/// k = −2: solve `VE_1 … VE_{p_max}` in `φ𝓑ⁿ` and check residuals.
pub fn cmd_km2(problem: &ProblemFile, v: &HomogeneousPotential, opts: &RunOptions) -> Report {
    let mut report = Report::new("km2", Some(opts));
    if v.k() != -2 {
        report.error("input", None, format!("km2 needs k = -2, got k = {}", v.k()));
        return report;
    }
    let regime = Regime::from_energy(opts.energy.clone());
    report.set("regime", &regime);
    over_candidates(&mut report, problem, |d| km2_candidate(v, d, opts, &regime));
    report
}

fn km2_candidate(v: &HomogeneousPotential, d: &[Scalar], opts: &RunOptions, regime: &Regime) -> StageResult<(ReportStatus, Value)> {
    let (w, data) = prepare(v, d, opts)?;
    let sol = at("solve", solve_ve_chain_km2(&w, &data, opts.p_max, regime))?;
    let numeric = at("residual", sol.numeric_residual(&regime.sample_points(KM2_SAMPLES)))?;
    let symbolic = sol.all_symbolic_residuals_zero();
    let basis: Vec<Value> = sol
        .lambdas
        .iter()
        .zip(&sol.omegas)
        .map(|(l, o)| json!({"lambda": to_value(l), "omega": to_value(o), "basis": to_value(&solve_homogeneous(l, regime))}))
        .collect();
    let certified = symbolic && numeric < KM2_RESIDUAL_TOL;
    let value = json!({
        "d": to_value(&data.d),
        "hessian": to_value(&data.hessian),
        "homogeneous_basis": basis,
        "solution": to_value(&sol),
        "symbolic_residuals_zero": symbolic,
        "numeric_residual": numeric,
        "numeric_samples": KM2_SAMPLES,
        "containment_certified": certified,
    });
    Ok((if certified { ReportStatus::Ok } else { ReportStatus::Inconclusive }, value))
}

/// `ω` from text: a rational (`3`, `1/2`), `sqrt(q)`, or a decimal.
pub fn parse_frequency(text: &str) -> vega_core::Result<Frequency> {
    let t = text.trim();
    if let Some(inner) = t.strip_prefix("sqrt(").and_then(|s| s.strip_suffix(')')) {
        let lambda = Scalar::from_str(inner)?;
        return Ok(Frequency::from_lambda(&lambda));
    }
    let s = Scalar::from_str(t)?;
    Ok(match s.as_rational() {
        Some(q) => Frequency::rational(q.clone()),
        None => Frequency::Approx(s.to_c64()),
    })
}

/// Classification, reduction and the jump at `t = 0` of `T_n^(ω) = ∫e^{iωt}/sinⁿt`.
pub fn cmd_trig(n: u32, omega: &Frequency) -> Report {
    let mut report = Report::new("trig", None);
    report.set("n", &n);
    report.set("omega", omega);
    let verdict = classify_meromorphy(n, omega);
    let w = omega_scalar(omega);
    match reduce(n, &w) {
        Ok(r) => report.set("reduction", &r),
        Err(e) => report.set("reduction", &json!({"unavailable": e.to_string()})),
    }
    let residue = laurent_residue(n, &w);
    report.set("residue_at_zero", &residue);
    report.set("jump_at_zero", &Scalar::Float(C::new(0.0, 2.0 * PI) * residue.to_c64()));
    if n == 2 && omega.as_surd().is_some_and(|s| s.is_zero()) {
        report.set("note", &"T_2^(0) = -cot t");
    }
    report.status = if verdict.meromorphic { ReportStatus::Ok } else { ReportStatus::Obstruction };
    report.set("verdict", &verdict);
    report
}

/// Parameters of a monodromy experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct MonodromyParams {
    pub singularity: C,
    pub radius: f64,
    pub steps: usize,
}

impl Default for MonodromyParams {
    fn default() -> Self {
        MonodromyParams { singularity: C::new(0.0, 0.0), radius: vega_core::numeric::DEFAULT_RADIUS, steps: vega_core::numeric::DEFAULT_STEPS }
    }
}

/// Numeric monodromy of the linearized `VE₂` along `φ = sin t` (k = 2).
pub fn cmd_monodromy(problem: &ProblemFile, v: &HomogeneousPotential, opts: &RunOptions, params: &MonodromyParams) -> Report {
    let mut report = Report::new("monodromy", Some(opts));
    report.set("params", &json!({"radius": params.radius, "singularity": to_value(&Scalar::Float(params.singularity)), "steps": params.steps}));
    if v.k() != 2 {
        report.error("input", None, format!("monodromy needs k = 2, got k = {}", v.k()));
        return report;
    }
    over_candidates(&mut report, problem, |d| monodromy_candidate(v, d, opts, params));
    report
}

fn monodromy_candidate(v: &HomogeneousPotential, d: &[Scalar], opts: &RunOptions, params: &MonodromyParams) -> StageResult<(ReportStatus, Value)> {
    let (w, data) = prepare(v, d, opts)?;
    let chain = at("build", build_ve_chain(&w, &data, 2))?;
    let system = chain.system(2).expect("order 2 built");
    let n = chain.n();
    let sources: Vec<usize> = (0..n).collect();
    let sings: Vec<C> = (-1..=2).map(|j| C::new(j as f64 * PI, 0.0)).collect();
    let ode = at("linearize", linearize_ve2(system, &sources, Arc::new(sin_phi), sings))?;
    let m = at("integrate", monodromy_matrix(&ode, params.singularity, params.radius, params.steps))?;
    let set = at("integrate", monodromy_set(&ode, &[C::new(0.0, 0.0), C::new(PI, 0.0)], params.radius, params.steps))?;
    let mats: Vec<_> = set.iter().map(|f| f.matrix.clone()).collect();
    let commutator = commutator_diagnostic(&mats, 1e-6);
    let mut defect: f64 = 0.0;
    for i in 0..m.matrix.nrows() {
        for j in 0..m.matrix.ncols() {
            let id = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((m.matrix[(i, j)] - id).norm());
        }
    }
    let jumps: Vec<Value> = data
        .frequencies()
        .iter()
        .map(|om| {
            let wc = om.to_c64();
            let f = move |t: C| (C::i() * wc * t).exp();
            let numeric = integral_jump(f, 0, params.radius, params.steps).map(Scalar::Float);
            json!({
                "omega": to_value(om),
                "numeric": numeric.as_ref().map(to_value).unwrap_or(Value::Null),
                "exact": to_value(&Scalar::Float(vega_core::trig::monodromy_jump(f, 0))),
            })
        })
        .collect();
    let value = json!({
        "d": to_value(&data.d),
        "state_dimension": ode.dim,
        "monodromy": to_value(&m),
        "determinant": to_value(&Scalar::Float(m.determinant())),
        "identity_defect": defect,
        "loop_set": to_value(&set),
        "commutator": to_value(&commutator),
        "integral_jumps": jumps,
    });
    Ok((ReportStatus::Ok, value))
}

/// Parse + run; parse failures become a report with status `Error`.
pub fn run_text<F>(command: &str, text: &str, overrides: F, run: impl Fn(&ProblemFile, &HomogeneousPotential, &RunOptions) -> Report) -> Report
where
    F: Fn(&mut RunOptions),
{
    match ProblemFile::parse(text) {
        Ok((problem, v)) => {
            let mut opts = RunOptions::from_problem(&problem.options);
            overrides(&mut opts);
            run(&problem, &v, &opts)
        }
        Err(e) => {
            let mut report = Report::new(command, None);
            report.set("parse_error", &e);
            report.error("parse", None, e.to_string());
            report
        }
    }
}
