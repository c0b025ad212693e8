use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use prime_oracle::nhpp::simulate_replications;
use prime_oracle::nonrecursive::{equivalence_report, DEFAULT_NONREC_CAP};
use prime_oracle::numtheory::{is_prime_u64, lucas_lehmer_with_ceiling, primes_up_to, DEFAULT_LL_CEILING};
use prime_oracle::pipeline::{
    hunt_general, hunt_mersenne, p0_from_results, verify_file, write_comparison, write_equivalence,
    write_simulation, write_trajectory, ConfigFile, HuntPlan, HuntReport, Verdict, FORMAT_HEADER,
};
use prime_oracle::recursive::{model_compare_series, trajectory, Hyper};
use prime_oracle::specialfn::{ErrorBoundModel, IntensityParams};
use prime_oracle::{Error, Result};

#[derive(Parser)]
#[command(name = "prime-oracle", version, about = "Bayesian prime modelling and TMCMC prime hunting")]
struct Cli {
    /// key=value file overriding built-in defaults; flags override the file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hunt for primes above p0 on both general targets.
    Hunt(HuntArgs),
    /// Generate Mersenne exponent candidates after a burn-in.
    Mersenne(MersenneArgs),
    /// Posterior moment trajectory for one error model.
    Diagnose(DiagnoseArgs),
    /// Log predictive ratio of the MT model against x/log x.
    CompareModels(CompareArgs),
    /// Simulate the point process and report normalized counts.
    SimulateNhpp(SimulateArgs),
    /// Recursive against non-recursive posterior means.
    Equivalence(EquivalenceArgs),
    /// Primality verdict for each integer in a file.
    Verify { file: PathBuf },
    /// Lucas–Lehmer sweep over prime exponents.
    LlCheck {
        #[arg(long)]
        max_exponent: u64,
    },
}

#[derive(Args)]
struct Shared {
    /// Base seed; each chain derives its own stream from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Error model: rh-sqrt, rh-eps:<ε>, x-over-log or mt.
    #[arg(long)]
    model: Option<ErrorBoundModel>,
    /// JSONL result store; records go to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Save chain state here on --stop-after and resume from it.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Per-chain step budget for this session.
    #[arg(long)]
    stop_after: Option<u64>,
}

#[derive(Args)]
struct HuntArgs {
    #[arg(long)]
    p0: u64,
    /// Post-burn-in steps per chain and round.
    #[arg(long)]
    iters: u64,
    /// Rounds; each restarts from the largest prime found so far.
    #[arg(long)]
    rounds: Option<u32>,
    #[command(flatten)]
    shared: Shared,
}

#[derive(Args)]
#[group(id = "start", required = true, args = ["p0", "from_results"])]
struct MersenneArgs {
    #[arg(long)]
    p0: Option<u64>,
    /// Use the largest general prime recorded in this file as p0.
    #[arg(long)]
    from_results: Option<PathBuf>,
    /// Steps discarded before candidates are kept.
    #[arg(long)]
    burnin: Option<u64>,
    /// Steps kept after the burn-in.
    #[arg(long, default_value_t = 10_000_000)]
    keep: u64,
    /// Screen 2^p − 1 for factors 2kp + 1 below 2^bits before Lucas–Lehmer.
    #[arg(long)]
    trial_factor_bits: Option<u32>,
    #[command(flatten)]
    shared: Shared,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[arg(long)]
    model: Option<ErrorBoundModel>,
    #[arg(long)]
    limit: u64,
    #[arg(long)]
    hyper: Option<Hyper>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    limit: u64,
    #[arg(long)]
    hyper: Option<Hyper>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    model: Option<ErrorBoundModel>,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    horizon: f64,
    #[arg(long, default_value_t = 1)]
    reps: u64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EquivalenceArgs {
    #[arg(long)]
    kmax: usize,
    #[arg(long)]
    model: Option<ErrorBoundModel>,
    #[arg(long)]
    hyper: Option<Hyper>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Hunt(a) => hunt(&cfg, a),
        Command::Mersenne(a) => mersenne(&cfg, a),
        Command::Diagnose(a) => diagnose(&cfg, a),
        Command::CompareModels(a) => compare(&cfg, a),
        Command::SimulateNhpp(a) => simulate(&cfg, a),
        Command::Equivalence(a) => equivalence(&cfg, a),
        Command::Verify { file } => verify(&file),
        Command::LlCheck { max_exponent } => ll_check(&cfg, max_exponent),
    }
}

/// Destination for a report: the named file, or stdout.
fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn plan_from(cfg: &ConfigFile, p0: u64, iterations: u64, s: &Shared) -> Result<HuntPlan> {
    let mut plan = HuntPlan::new(p0, iterations)?;
    plan.config = cfg.tmcmc(plan.config)?;
    if let Some(seed) = s.seed {
        plan.config.seed = seed;
    }
    if let Some(m) = s.model.or(cfg.model) {
        plan.model = m;
    }
    plan.output = s.out.clone();
    plan.checkpoint = s.checkpoint.clone();
    plan.stop_after = s.stop_after;
    Ok(plan)
}

fn print_report(plan: &HuntPlan, r: &HuntReport) -> Result<()> {
    let mut out = io::stdout().lock();
    if plan.output.is_none() {
        writeln!(out, "{FORMAT_HEADER}")?;
        for rec in &r.records {
            writeln!(out, "{}", rec.to_json_line())?;
        }
    }
    let s = &r.stats;
    let mut err = io::stderr().lock();
    for round in &r.rounds {
        writeln!(
            err,
            "round {}: p0 = {}, k = {}, {} primes, largest {}",
            round.round,
            round.p0,
            round.k,
            round.found,
            round.largest.map_or("-".to_string(), |v| v.to_string())
        )?;
    }
    for (t, set) in &r.found_by_target {
        writeln!(err, "{t}: {} distinct primes", set.len())?;
    }
    if r.found_by_target.len() > 1 {
        writeln!(err, "found by every target: {}", r.intersection().len())?;
    }
    writeln!(
        err,
        "steps {}, acceptance {:.3}, eligible {}, skipped {} small / {} overflow, composite {}, screened {}",
        s.steps,
        s.acceptance_rate(),
        s.eligible,
        s.skipped_small,
        s.skipped_overflow,
        s.composite,
        s.trial_factored
    )?;
    writeln!(err, "{} records, {} new", r.records.len(), r.appended)?;
    if !r.completed {
        writeln!(err, "stopped early; rerun with the same arguments to resume")?;
    }
    Ok(())
}

fn hunt(cfg: &ConfigFile, a: HuntArgs) -> Result<()> {
    let mut plan = plan_from(cfg, a.p0, a.iters, &a.shared)?;
    plan.rounds = a.rounds.or(cfg.rounds).unwrap_or(1);
    let report = hunt_general(&plan)?;
    print_report(&plan, &report)
}

fn mersenne(cfg: &ConfigFile, a: MersenneArgs) -> Result<()> {
    let p0 = match (a.p0, &a.from_results) {
        (Some(p0), _) => p0,
        (None, Some(path)) => p0_from_results(path)?,
        (None, None) => unreachable!("clap requires one of --p0 and --from-results"),
    };
    let mut plan = plan_from(cfg, p0, a.keep, &a.shared)?;
    plan.burn_in = a.burnin.or(cfg.burn_in).unwrap_or(10_000_000);
    plan.trial_factor_bits = a.trial_factor_bits.or(cfg.trial_factor_bits);
    let report = hunt_mersenne(&plan)?;
    print_report(&plan, &report)
}

/// `10, 100, ...` below `limit`, then `limit` itself.
fn decades(limit: u64) -> Vec<u64> {
    let mut v: Vec<u64> = std::iter::successors(Some(10u64), |x| x.checked_mul(10))
        .take_while(|&x| x < limit)
        .collect();
    v.push(limit);
    v
}

fn diagnose(cfg: &ConfigFile, a: DiagnoseArgs) -> Result<()> {
    let model = a.model.or(cfg.model).unwrap_or(ErrorBoundModel::RhSqrt);
    let hyper = a.hyper.or(cfg.hyper).unwrap_or_default();
    if a.limit < 10 {
        return Err(Error::Domain(format!("limit must be at least 10, got {}", a.limit)));
    }
    let table = primes_up_to(a.limit)?;
    let rows = trajectory(model, table.primes(), hyper, &decades(a.limit))?;
    write_trajectory(sink(&a.out)?, &rows)?;
    Ok(())
}

fn compare(cfg: &ConfigFile, a: CompareArgs) -> Result<()> {
    let hyper = a.hyper.or(cfg.hyper).unwrap_or_default();
    let table = primes_up_to(a.limit)?;
    let n = table.len() as u64;
    if n < 12 {
        return Err(Error::Domain(format!("limit {} leaves too few primes to compare", a.limit)));
    }
    let ks: Vec<u64> = decades(n - 1).into_iter().filter(|&k| k >= 10).collect();
    let rows = model_compare_series(table.primes(), hyper, &ks)?;
    write_comparison(sink(&a.out)?, &rows)?;
    Ok(())
}

fn simulate(cfg: &ConfigFile, a: SimulateArgs) -> Result<()> {
    let model = a.model.or(cfg.model).unwrap_or(ErrorBoundModel::RhSqrt);
    let params = IntensityParams::new(a.alpha, a.beta)?;
    if a.horizon.is_nan() || a.horizon <= 10.0 || a.horizon.is_infinite() {
        return Err(Error::Domain(format!("horizon must exceed 10, got {}", a.horizon)));
    }
    let seed = a.seed.or(cfg.seed).unwrap_or(0);
    let seeds: Vec<u64> = (0..a.reps).map(|i| seed.wrapping_add(i)).collect();
    let streams = simulate_replications(model, params, a.horizon, &seeds)?;
    let mut grid: Vec<f64> = std::iter::successors(Some(10.0f64), |x| Some(x * 10.0))
        .take_while(|&x| x < a.horizon)
        .collect();
    grid.push(a.horizon);
    write_simulation(sink(&a.out)?, &streams, &grid)?;
    Ok(())
}

fn equivalence(cfg: &ConfigFile, a: EquivalenceArgs) -> Result<()> {
    let cap = cfg.nonrec_cap.unwrap_or(DEFAULT_NONREC_CAP);
    if a.kmax == 0 || a.kmax > cap {
        return Err(Error::Resource(format!("kmax must lie in 1..={cap}, got {}", a.kmax)));
    }
    let model = a.model.or(cfg.model).unwrap_or(ErrorBoundModel::RhSqrt);
    let hyper = a.hyper.or(cfg.hyper).unwrap_or_default();
    let first = model.first_admissible_prime();
    let primes: Vec<u64> = primes_up_to(1_000)?
        .primes()
        .iter()
        .copied()
        .filter(|&p| p >= first)
        .take(a.kmax)
        .collect();
    // Stages whose posterior is improper under this prior are left out.
    let mut rows = Vec::with_capacity(a.kmax);
    for k in 1..=a.kmax {
        match equivalence_report(&primes, hyper, model, &[k]) {
            Ok(mut r) => rows.append(&mut r),
            Err(Error::Improper(_)) => {}
            Err(e) => return Err(e),
        }
    }
    write_equivalence(sink(&a.out)?, &rows)?;
    Ok(())
}

fn verify(path: &Path) -> Result<()> {
    let report = verify_file(path)?;
    let mut out = io::stdout().lock();
    for l in &report.lines {
        match &l.verdict {
            Verdict::Prime(n) => writeln!(out, "{}: {n} prime", l.line)?,
            Verdict::Composite(n) => writeln!(out, "{}: {n} composite", l.line)?,
            Verdict::Invalid(msg) => writeln!(out, "{}: invalid {msg}", l.line)?,
        }
    }
    writeln!(
        out,
        "total {}, prime {}, composite {}, invalid {}",
        report.total(),
        report.primes,
        report.composites,
        report.invalid
    )?;
    Ok(())
}

fn ll_check(cfg: &ConfigFile, max_exponent: u64) -> Result<()> {
    let ceiling = cfg.ll_ceiling.unwrap_or(DEFAULT_LL_CEILING);
    if max_exponent > ceiling {
        return Err(Error::Resource(format!("exponent ceiling is {ceiling}, got {max_exponent}")));
    }
    let mut out = io::stdout().lock();
    writeln!(out, "{FORMAT_HEADER}")?;
    writeln!(out, "p,mersenne_prime")?;
    for p in (2..=max_exponent).filter(|&p| is_prime_u64(p)) {
        // The test needs an odd exponent; 2^2 - 1 = 3 is settled directly.
        let verdict = if p == 2 { true } else { lucas_lehmer_with_ceiling(p, ceiling)? };
        writeln!(out, "{p},{verdict}")?;
    }
    Ok(())
}
