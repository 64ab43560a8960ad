//! Command-line driver. [`run`] returns the process exit code.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use symcone_core::{solve, verify, CertificateKind, SolverConfig, StopRule};

use crate::format::{self, CertificateFile, ConeEntry, ConeFile, FormatError, ProblemFile};
use crate::generate::{generate, GenOptions, Kind};
use crate::phi_curve::{phi_curve, to_csv};

pub const EXIT_PRIMAL: i32 = 0;
pub const EXIT_DUAL: i32 = 1;
pub const EXIT_EPS_INFEASIBLE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_VERIFY_FAILED: i32 = 65;
/// Numerical failure inside the solver (eigensolver breakdown and the like).
pub const EXIT_INTERNAL: i32 = 70;

#[derive(Debug, Parser)]
#[command(name = "symcone", version, about = "Projection and rescaling for Ax = 0, x in int K")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a problem file and emit a certificate.
    Solve(SolveArgs),
    /// Check a certificate against a problem file.
    Verify(VerifyArgs),
    /// Write a seeded random instance with a known answer.
    Generate(GenerateArgs),
    /// Print samples of exp(-phi(rho)) as CSV.
    PhiCurve(PhiArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BpStop {
    ZZero,
    YMinusZ,
}

#[derive(Debug, Args)]
struct SolveArgs {
    file: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long)]
    max_bp_iters: Option<usize>,
    #[arg(long)]
    max_rescale_iters: Option<usize>,
    #[arg(long, value_enum, default_value = "z-zero")]
    bp_stop: BpStop,
    #[arg(long)]
    tol_interior: Option<f64>,
    #[arg(long)]
    tol_zero: Option<f64>,
    /// Certificate path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    file: PathBuf,
    cert: PathBuf,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Feasible,
    Infeasible,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// JSON file with a `cone` list; alternative to `--cone`.
    #[arg(required_unless_present = "cone", conflicts_with = "cone")]
    specfile: Option<PathBuf>,
    /// Inline cone, e.g. `nonneg:3,soc:4,psd:2`.
    #[arg(long, value_parser = parse_cone_entry, value_delimiter = ',')]
    cone: Option<Vec<ConeEntry>>,
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    seed: u64,
    /// Log10 range of the witness eigenvalues; 0 keeps them near 1.
    #[arg(long, default_value_t = 0.0)]
    spread: f64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the planted witness as a certificate file.
    #[arg(long)]
    witness: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PhiArgs {
    #[arg(long)]
    min: f64,
    #[arg(long)]
    max: f64,
    #[arg(long)]
    steps: usize,
    /// CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn parse_cone_entry(s: &str) -> Result<ConeEntry, String> {
    let (ty, n) = s.split_once(':').ok_or_else(|| format!("expected type:size, got `{s}`"))?;
    let n: usize = n.trim().parse().map_err(|e| format!("bad size in `{s}`: {e}"))?;
    match ty.trim() {
        "nonneg" => Ok(ConeEntry::Nonneg { count: n }),
        "soc" => Ok(ConeEntry::Soc { dim: n }),
        "psd" => Ok(ConeEntry::Psd { order: n }),
        other => Err(format!("unknown cone type `{other}` (nonneg, soc, psd)")),
    }
}

enum Failure {
    Usage(String),
    Verify(String),
    Internal(String),
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::Usage(e.to_string())
    }
}

pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let res = match cli.command {
        Command::Solve(a) => cmd_solve(a, out, err),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Generate(a) => cmd_generate(a, err),
        Command::PhiCurve(a) => cmd_phi(a, out),
    };
    match res {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Verify(m)) => {
            let _ = writeln!(err, "verification failed: {m}");
            EXIT_VERIFY_FAILED
        }
        Err(Failure::Internal(m)) => {
            let _ = writeln!(err, "solver error: {m}");
            EXIT_INTERNAL
        }
    }
}

fn io_err(path: &std::path::Path, e: std::io::Error) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

fn cmd_solve(a: SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let inst = format::load(&a.file)?;
    let defaults = SolverConfig::default();
    let cfg = SolverConfig {
        eps: a.eps,
        max_bp_iters: a.max_bp_iters,
        max_rescale_iters: a.max_rescale_iters,
        bp_stop: match a.bp_stop {
            BpStop::ZZero => StopRule::ZZero,
            BpStop::YMinusZ => StopRule::YMinusZ,
        },
        tol_zero: a.tol_zero.unwrap_or(defaults.tol_zero),
        tol_int: a.tol_interior.unwrap_or(defaults.tol_int),
    };
    if !(cfg.eps > 0.0 && cfg.eps < 1.0) {
        return Err(Failure::Usage(format!("--eps must lie in (0, 1), got {}", cfg.eps)));
    }
    let cert = solve(&inst, &cfg).map_err(|e| Failure::Internal(e.to_string()))?;
    let text = format::to_json(&CertificateFile::from_certificate(inst.spec(), &cert));
    match &a.out {
        Some(p) => std::fs::write(p, &text).map_err(|e| io_err(p, e))?,
        None => out.write_all(text.as_bytes()).map_err(|e| Failure::Internal(e.to_string()))?,
    }
    let (label, code) = match cert.kind {
        CertificateKind::Primal { .. } => ("primal", EXIT_PRIMAL),
        CertificateKind::Dual { .. } => ("dual", EXIT_DUAL),
        CertificateKind::EpsilonInfeasible { .. } => ("epsilon-infeasible", EXIT_EPS_INFEASIBLE),
        CertificateKind::BudgetExceeded => ("budget-exceeded", EXIT_BUDGET),
    };
    let _ = writeln!(
        err,
        "{label}: {} basic-procedure updates, {} rescalings",
        cert.stats.bp_iterations, cert.stats.rescale_iterations
    );
    Ok(code)
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let inst = format::load(&a.file)?;
    let file: CertificateFile = format::read_json(&a.cert)?;
    let cert = file.to_certificate(inst.spec()).map_err(|e| Failure::Verify(e.to_string()))?;
    let report = verify(&inst, &cert, a.tol);
    for c in &report.checks {
        let _ = writeln!(
            out,
            "{} {:<24} residual {:.3e} threshold {:.3e}",
            if c.passed { "ok  " } else { "FAIL" },
            c.name,
            c.residual,
            c.threshold
        );
    }
    if report.passed() {
        Ok(0)
    } else {
        let names: Vec<&str> = report.failures().map(|c| c.name).collect();
        Err(Failure::Verify(names.join(", ")))
    }
}

fn cmd_generate(a: GenerateArgs, err: &mut dyn Write) -> Result<i32, Failure> {
    let entries = match (&a.cone, &a.specfile) {
        (Some(c), _) => c.clone(),
        (None, Some(p)) => format::read_json::<ConeFile>(p)?.cone,
        (None, None) => return Err(Failure::Usage("no cone given".into())),
    };
    let spec = format::cone_spec(&entries)?;
    let kind = match a.kind {
        KindArg::Feasible => Kind::Feasible,
        KindArg::Infeasible => Kind::Infeasible,
    };
    let g = generate(&spec, &GenOptions { kind, m: a.m, seed: a.seed, spread: a.spread })
        .map_err(|e| Failure::Usage(e.to_string()))?;
    format::write_json(&a.out, &ProblemFile::from_instance(&g.instance))?;
    if let Some(p) = &a.witness {
        format::save_certificate(p, &spec, &g.witness.certificate())?;
    }
    let _ = writeln!(err, "wrote {} ({} x {})", a.out.display(), g.instance.m(), spec.dim());
    Ok(0)
}

fn cmd_phi(a: PhiArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let rows = phi_curve(a.min, a.max, a.steps).map_err(|e| Failure::Usage(e.to_string()))?;
    let csv = to_csv(&rows);
    match &a.out {
        Some(p) => std::fs::write(p, csv).map_err(|e| io_err(p, e))?,
        None => out.write_all(csv.as_bytes()).map_err(|e| Failure::Internal(e.to_string()))?,
    }
    Ok(0)
}
