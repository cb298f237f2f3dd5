//! Command-line front end. Exit codes: 0 success, 1 usage error, 2 runtime
//! error. All randomness derives from `--seed`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::evaluation::{binarize, entrywise_error, merge_complexes, write_complexes};
use crate::harness::edgelist::{default_names, ingest_weighted_edgelist, write_weighted_edgelist};
use crate::harness::sweep::{run_sweep, write_sweep_csv, SweepConfig, SweepVariable};
use crate::harness::{format_real, read_matrix_csv, write_matrix_csv};
use crate::lp::{recover_all, RecoveryMode};
use crate::mmsb::{
    build_probability_matrix, default_samples, make_interaction_matrix, sample_adjacency_average,
    sample_theta, InteractionKind, MmsbParams,
};
use crate::rng::seeded;
use crate::theory::{compute_bounds_from_kappa, run_concentration_check, EpsilonChoice};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "splp", version, about = "Overlapping community recovery for MMSB graphs (SP+LP)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample an MMSB graph and write it as a weighted edge list.
    Generate(GenerateArgs),
    /// Recover Θ from a weighted edge list and write it as CSV.
    Recover(RecoverArgs),
    /// Run a synthetic parameter sweep and write summary CSV.
    Sweep(SweepArgs),
    /// Evaluate the sample-size bound of the recovery guarantee.
    CheckBounds(CheckBoundsArgs),
    /// Empirically check the concentration bounds on sampled Θ.
    ConcCheck(ConcCheckArgs),
    /// Detect complexes in a weighted interaction network.
    Ppi(PpiArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Exact,
    Spectral,
}

impl From<ModeArg> for RecoveryMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => RecoveryMode::Exact,
            ModeArg::Spectral => RecoveryMode::Spectral,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BKindArg {
    DeltaBlend,
    DiagRandom,
}

impl From<BKindArg> for InteractionKind {
    fn from(b: BKindArg) -> Self {
        match b {
            BKindArg::DeltaBlend => InteractionKind::DeltaBlend,
            BKindArg::DiagRandom => InteractionKind::DiagRandom,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariableArg {
    N,
    K,
    Alpha,
    Delta,
}

impl From<VariableArg> for SweepVariable {
    fn from(v: VariableArg) -> Self {
        match v {
            VariableArg::N => SweepVariable::N,
            VariableArg::K => SweepVariable::K,
            VariableArg::Alpha => SweepVariable::Alpha,
            VariableArg::Delta => SweepVariable::Delta,
        }
    }
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Averaged samples per entry (default ⌈√n⌉).
    #[arg(long)]
    s: Option<usize>,
    #[arg(long, value_enum, default_value = "diag-random")]
    b_kind: BKindArg,
    /// Off-diagonal weight for `delta-blend`.
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    /// `exact` writes P itself; `spectral` writes the sampled average A.
    #[arg(long, value_enum, default_value = "spectral")]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the ground-truth Θ as CSV.
    #[arg(long)]
    theta_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RecoverArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value = "spectral")]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Ground-truth Θ CSV; prints the permutation-matched entrywise error.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, value_enum)]
    variable: VariableArg,
    /// Comma-separated grid values.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    grid: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 5000)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long, value_enum, default_value = "spectral")]
    mode: ModeArg,
    /// Default: `delta-blend` when sweeping delta, `diag-random` otherwise.
    #[arg(long, value_enum)]
    b_kind: Option<BKindArg>,
    /// Record recovery wall-clock time (trials then run sequentially and the
    /// seconds columns are no longer reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct CheckBoundsArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    alpha: f64,
    /// Condition number of B.
    #[arg(long)]
    kappa: f64,
    /// Target failure probability.
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    /// Near-purity tolerance; default 0.5·min(ε₁, ε₂).
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Args, Debug)]
struct ConcCheckArgs {
    #[arg(long, default_value_t = 5000)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// B for the σ_k bound; `delta-blend` with δ = 0 is the identity.
    #[arg(long, value_enum, default_value = "delta-blend")]
    b_kind: BKindArg,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    /// Also write the report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PpiArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    k: usize,
    /// Membership threshold for binarizing Θ̂.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Overlap score at or above which two complexes are merged.
    #[arg(long, default_value_t = 0.8)]
    merge_threshold: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let mut stdout = std::io::stdout().lock();
    match dispatch(cli.command, &mut stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Generate(a) => generate(a, stdout),
        Command::Recover(a) => recover(a, stdout),
        Command::Sweep(a) => sweep(a, stdout),
        Command::CheckBounds(a) => check_bounds(a, stdout),
        Command::ConcCheck(a) => conc_check(a, stdout),
        Command::Ppi(a) => ppi(a, stdout),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn finish(mut w: BufWriter<File>) -> Result<()> {
    w.flush()?;
    Ok(())
}

fn generate(a: GenerateArgs, stdout: &mut dyn Write) -> Result<()> {
    let mut rng = seeded(a.seed);
    let b = make_interaction_matrix(a.b_kind.into(), a.k, a.delta, &mut rng)?;
    let params = MmsbParams::new(a.n, a.k, a.alpha, b)?;
    let theta = sample_theta(&params, &mut rng);
    let p = build_probability_matrix(&theta, &params.b)?;
    let graph = match a.mode {
        ModeArg::Exact => p,
        ModeArg::Spectral => {
            let s = a.s.unwrap_or_else(|| default_samples(a.n));
            sample_adjacency_average(&p, s, &mut rng)?
        }
    };
    let mut out = create(&a.out)?;
    write_weighted_edgelist(graph.adjacency(), &default_names(a.n), &mut out)?;
    finish(out)?;
    if let Some(path) = &a.theta_out {
        let mut out = create(path)?;
        write_matrix_csv(theta.as_matrix(), &mut out)?;
        finish(out)?;
    }
    writeln!(stdout, "nodes = {}", a.n)?;
    Ok(())
}

fn recover(a: RecoverArgs, stdout: &mut dyn Write) -> Result<()> {
    let edges = ingest_weighted_edgelist(&a.input)?;
    if edges.clamped_weights > 0 {
        eprintln!("warning: {} weights above 1 were clamped to 1", edges.clamped_weights);
    }
    let mut rng = seeded(a.seed);
    let rec = recover_all(&edges.graph, a.k, a.mode.into(), &mut rng)?;
    report_columns(&rec);
    let mut out = create(&a.out)?;
    write_matrix_csv(&rec.theta_hat, &mut out)?;
    finish(out)?;
    if let Some(path) = &a.truth {
        let truth = read_matrix_csv(BufReader::new(File::open(path)?))?;
        let eval = entrywise_error(&rec.theta_hat, &truth)?;
        writeln!(stdout, "error = {}", format_real(eval.error))?;
    }
    Ok(())
}

fn report_columns(rec: &crate::lp::RecoveryResult) {
    for (j, c) in rec.columns.iter().enumerate() {
        if c.status != Some(crate::lp::LpStatus::Optimal) || c.suspect {
            eprintln!(
                "warning: community {j}: status {:?}{}{}",
                c.status,
                if c.suspect { ", unnormalized" } else { "" },
                c.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default()
            );
        }
    }
}

fn sweep(a: SweepArgs, stdout: &mut dyn Write) -> Result<()> {
    let variable: SweepVariable = a.variable.into();
    let mut cfg = SweepConfig::new(variable, a.grid);
    cfg.n = a.n;
    cfg.k = a.k;
    cfg.alpha = a.alpha;
    cfg.delta = a.delta;
    cfg.samples = a.s;
    cfg.repeats = a.repeats;
    cfg.base_seed = a.seed;
    cfg.mode = a.mode.into();
    if let Some(b) = a.b_kind {
        cfg.b_kind = b.into();
    }
    cfg.timing = a.timing;
    let records = run_sweep(&cfg)?;
    for r in &records {
        for t in &r.trials {
            if let Err(msg) = &t.result {
                eprintln!("warning: {}={} repeat {} failed: {msg}", variable.name(), r.value, t.repeat);
            } else if t.degraded {
                eprintln!(
                    "warning: {}={} repeat {}: some LP was not optimal",
                    variable.name(),
                    r.value,
                    t.repeat
                );
            }
        }
    }
    let mut out = create(&a.out)?;
    write_sweep_csv(&records, &mut out)?;
    finish(out)?;
    writeln!(stdout, "records = {}", records.len())?;
    Ok(())
}

fn check_bounds(a: CheckBoundsArgs, stdout: &mut dyn Write) -> Result<()> {
    let eps = match a.epsilon {
        Some(e) => EpsilonChoice::Value(e),
        None => EpsilonChoice::Auto,
    };
    let t = compute_bounds_from_kappa(a.k, a.alpha, a.kappa, a.p, eps)?;
    let mut s = String::new();
    let _ = writeln!(s, "w = {}", format_real(t.w));
    let _ = writeln!(s, "epsilon1 = {}", format_real(t.epsilon1));
    let _ = writeln!(s, "epsilon2 = {}", format_real(t.epsilon2));
    let _ = writeln!(s, "epsilon = {}", format_real(t.epsilon));
    let _ = writeln!(s, "epsilon_in_range = {}", t.epsilon_in_range);
    let _ = writeln!(s, "near_pure_cdf = {}", format_real(t.near_pure_cdf));
    let _ = writeln!(s, "min_n = {}", t.min_n);
    stdout.write_all(s.as_bytes())?;
    Ok(())
}

fn conc_check(a: ConcCheckArgs, stdout: &mut dyn Write) -> Result<()> {
    let mut rng = seeded(a.seed);
    let b = make_interaction_matrix(a.b_kind.into(), a.k, a.delta, &mut rng)?;
    let params = MmsbParams::new(a.n, a.k, a.alpha, b)?;
    let r = run_concentration_check(&params, a.trials, a.seed)?;
    let bp = &r.bound_probabilities;
    let mut s = String::new();
    let _ = writeln!(s, "trials = {}", r.trials);
    let _ = writeln!(s, "c_vector_violations = {}", r.c_vector_violations);
    let _ = writeln!(s, "c_ratio_violations = {}", r.c_ratio_violations);
    let _ = writeln!(s, "theta_norm_violations = {}", r.theta_norm_violations);
    let _ = writeln!(s, "sigma_k_violations = {}", r.sigma_k_violations);
    let _ = writeln!(s, "p1 = {}", format_real(bp.p1));
    let _ = writeln!(s, "p2 = {}", format_real(bp.p2));
    let _ = writeln!(s, "p3 = {}", format_real(bp.p3));
    let _ = writeln!(s, "max_theta_norm_ratio = {}", format_real(r.max_theta_norm_ratio));
    let _ = writeln!(s, "min_sigma_k_ratio = {}", format_real(r.min_sigma_k_ratio));
    let _ = writeln!(s, "within_bounds = {}", r.all_within_bounds());
    stdout.write_all(s.as_bytes())?;
    if let Some(path) = &a.out {
        std::fs::write(path, s)?;
    }
    Ok(())
}

fn ppi(a: PpiArgs, stdout: &mut dyn Write) -> Result<()> {
    if !(0.0..=1.0).contains(&a.threshold) {
        return Err(Error::invalid(format!("threshold {} must lie in [0, 1]", a.threshold)));
    }
    let edges = ingest_weighted_edgelist(&a.input)?;
    if edges.clamped_weights > 0 {
        eprintln!("warning: {} weights above 1 were clamped to 1", edges.clamped_weights);
    }
    let mut rng = seeded(a.seed);
    let rec = recover_all(&edges.graph, a.k, RecoveryMode::Spectral, &mut rng)?;
    report_columns(&rec);
    let complexes = merge_complexes(&binarize(&rec.theta_hat, a.threshold), a.merge_threshold)?;
    let mut out = create(&a.out)?;
    write_complexes(&complexes, &edges.names, &mut out)?;
    finish(out)?;
    writeln!(stdout, "complexes = {}", complexes.len())?;
    Ok(())
}
