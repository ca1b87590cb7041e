use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use vega_cli::{cmd_analyze, cmd_km2, cmd_monodromy, cmd_trig, parse_frequency, run_text, MonodromyParams, Report, RunOptions};
use vega_core::{Mode, Scalar};

#[derive(Parser, Debug)]
#[command(name = "vega", version, about = "Variational equations along Darboux points: k = 2 obstructions, k = -2 closed-form solutions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Report format on stdout.
    #[arg(long, global = true, value_enum, default_value_t = ReportFormat::Json)]
    report: ReportFormat,
    /// Seed recorded in the report for randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Json,
    Text,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

#[derive(Args, Debug)]
struct ProblemArgs {
    /// Problem file (JSON); `-` reads stdin.
    file: PathBuf,
    /// Highest variational order p_max.
    #[arg(long)]
    order: Option<u32>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Float comparison tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Energy of the particular solution (k = -2 regime), e.g. `0`, `1`, `1/2`.
    #[arg(long)]
    energy: Option<String>,
    /// Assert Z-linear independence of the frequencies.
    #[arg(long)]
    assert_independence: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// k = 2 verdict: VE_2 subsystems, then the inductive analysis.
    Analyze(ProblemArgs),
    /// k = -2 constructive solution of VE_1..VE_p.
    Km2(ProblemArgs),
    /// Meromorphy of T_n^(omega) = ∫ e^{i omega t} / sin^n t dt.
    Trig {
        #[arg(long)]
        n: u32,
        /// `3`, `1/2`, `sqrt(2)` or a decimal.
        #[arg(long, allow_hyphen_values = true)]
        omega: String,
    },
    /// Monodromy of the linearized VE_2 around a singularity of φ = sin t.
    Monodromy {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Singularity as `re` or `re,im`.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        singularity: String,
        #[arg(long, default_value_t = vega_core::numeric::DEFAULT_RADIUS)]
        radius: f64,
        #[arg(long, default_value_t = vega_core::numeric::DEFAULT_STEPS)]
        steps: usize,
    },
}

fn read_input(path: &PathBuf) -> Result<String, String> {
    if path.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin()).map_err(|e| format!("stdin: {e}"))
    } else {
        std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
    }
}

fn overrides(args: &ProblemArgs, seed: u64) -> Result<impl Fn(&mut RunOptions) + '_, String> {
    let energy = args.energy.as_deref().map(Scalar::from_str).transpose().map_err(|e| format!("--energy: {e}"))?;
    Ok(move |o: &mut RunOptions| {
        if let Some(p) = args.order {
            o.p_max = p;
        }
        if let Some(m) = args.mode {
            o.mode = match m {
                ModeArg::Exact => Mode::Exact,
                ModeArg::Float => Mode::Float,
            };
        }
        if let Some(t) = args.tol {
            o.tolerance = t;
        }
        if let Some(e) = &energy {
            o.energy = e.clone();
        }
        o.assert_independence |= args.assert_independence;
        o.seed = seed;
    })
}

fn parse_point(text: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let num = |s: &str| s.parse::<f64>().map_err(|e| format!("--singularity `{text}`: {e}"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("--singularity `{text}`: expected `re` or `re,im`")),
    }
}

fn problem_report(command: &str, args: &ProblemArgs, seed: u64, run: impl Fn(&vega_cli::ProblemFile, &vega_core::HomogeneousPotential, &RunOptions) -> Report) -> Result<Report, String> {
    let text = read_input(&args.file)?;
    let ov = overrides(args, seed)?;
    Ok(run_text(command, &text, ov, run))
}

fn run(cli: &Cli) -> Result<Report, String> {
    match &cli.command {
        Command::Analyze(a) => problem_report("analyze", a, cli.seed, cmd_analyze),
        Command::Km2(a) => problem_report("km2", a, cli.seed, cmd_km2),
        Command::Trig { n, omega } => {
            let w = parse_frequency(omega).map_err(|e| format!("--omega: {e}"))?;
            Ok(cmd_trig(*n, &w))
        }
        Command::Monodromy { problem, singularity, radius, steps } => {
            let params = MonodromyParams { singularity: parse_point(singularity)?, radius: *radius, steps: *steps };
            problem_report("monodromy", problem, cli.seed, |p, v, o| cmd_monodromy(p, v, o, &params))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = std::env::var("VEGA_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("VEGA_THREADS ignored: {e}");
        }
    }
    match run(&cli) {
        Ok(report) => {
            match cli.report {
                ReportFormat::Json => print!("{}", report.to_canonical_json()),
                ReportFormat::Text => print!("{}", report.to_text()),
            }
            for e in &report.errors {
                log::error!("{}: {}", e.stage, e.message);
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(msg) => {
            eprintln!("vega: {msg}");
            ExitCode::from(1)
        }
    }
}
