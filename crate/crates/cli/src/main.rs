use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use semiradius::campaign::{run_campaign, save_extremes, verify, CampaignConfig, CampaignReport};
use semiradius::instance::Instance;
use semiradius::{catalog, parse_check_ids, CheckOptions, Error, Tolerances, Verdict};

const THREADS_ENV: &str = "SEMIRADIUS_THREADS";

#[derive(Parser)]
#[command(name = "semiradius", version, about = "Certified A-numerical radius computations and inequality campaigns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a random campaign over the check catalog.
    Campaign(CampaignArgs),
    /// Re-evaluate every check on a stored instance file.
    Verify {
        file: PathBuf,
    },
    /// Print the version, default tolerances and the check catalog.
    Info,
}

#[derive(Args)]
struct CampaignArgs {
    /// JSON campaign configuration; flags given below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dimensions, e.g. `2,3,4` or `2..6`.
    #[arg(long)]
    dims: Option<String>,
    /// `all` or a list such as `1,2` or `0..2`.
    #[arg(long)]
    ranks: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Initial angle grid of the radius computations.
    #[arg(long)]
    grid: Option<usize>,
    /// Relative target gap of the radius enclosures.
    #[arg(long)]
    gap: Option<f64>,
    /// `all`, a range such as `C1..C23`, or a list such as `C5,C21`.
    #[arg(long)]
    checks: Option<String>,
    /// Standard deviation of operator entries.
    #[arg(long)]
    scale: Option<f64>,
    /// A-unit vectors drawn per trial.
    #[arg(long)]
    vectors: Option<usize>,
    /// Worker threads; defaults to $SEMIRADIUS_THREADS, then to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Use A = I instead of a sampled seed matrix.
    #[arg(long)]
    identity_seed: bool,
    /// Replace every sampled operator by zero.
    #[arg(long)]
    zero_operators: bool,
    /// Report destination; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-check aggregates as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Directory for the instance attaining each check's minimum slack.
    #[arg(long)]
    save_extremes: Option<PathBuf>,
}

fn parse_list(text: &str, what: &str) -> Result<Vec<usize>, Error> {
    let bad = || Error::BadConfig(format!("cannot parse {what} {text:?}"));
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once("..") {
            Some((lo, hi)) => {
                let lo: usize = lo.trim().parse().map_err(|_| bad())?;
                let hi: usize = hi.trim().parse().map_err(|_| bad())?;
                if lo > hi {
                    return Err(bad());
                }
                out.extend(lo..=hi);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

fn build_config(args: &CampaignArgs) -> Result<CampaignConfig, Error> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text).map_err(|e| Error::Parse {
                line: e.line(),
                column: e.column(),
                field: None,
                message: e.to_string(),
            })?
        }
        None => CampaignConfig::default(),
    };
    if let Some(d) = &args.dims {
        config.dims = parse_list(d, "dimensions")?;
    }
    if let Some(r) = &args.ranks {
        config.ranks = match r.trim() {
            "all" => None,
            list => Some(parse_list(list, "ranks")?),
        };
    }
    if let Some(t) = args.trials {
        config.trials = t;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(g) = args.grid {
        config.options.radius.grid = g;
    }
    if let Some(g) = args.gap {
        config.options.radius.gap = g;
    }
    if let Some(c) = &args.checks {
        config.checks = parse_check_ids(c)?.into_iter().map(String::from).collect();
    }
    if let Some(s) = args.scale {
        config.scale = s;
    }
    if let Some(v) = args.vectors {
        config.vectors = v;
    }
    config.identity_seed |= args.identity_seed;
    config.zero_operators |= args.zero_operators;
    config.validate()?;
    Ok(config)
}

fn threads(flag: Option<usize>) -> Result<usize, Error> {
    if let Some(t) = flag {
        return Ok(t);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::BadConfig(format!("{THREADS_ENV} must be a non-negative integer, got {v:?}"))),
        Err(_) => Ok(0),
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.3e}"))
}

fn print_summary(report: &CampaignReport) {
    eprintln!(
        "{:<4} {:>7} {:>7} {:>6} {:>5} {:>6} {:>7} {:>11} {:>11}  argmin",
        "id", "trials", "cert", "uncert", "viol", "diag", "skipped", "min slack", "median"
    );
    for c in &report.checks {
        eprintln!(
            "{:<4} {:>7} {:>7} {:>6} {:>5} {:>6} {:>7} {:>11} {:>11}  {}",
            c.id,
            c.trials,
            c.pass_certified,
            c.pass_uncertified,
            c.violations,
            c.diagnostics,
            c.skipped,
            fmt_opt(c.min_slack),
            fmt_opt(c.median_slack),
            c.argmin_instance.as_deref().unwrap_or("-")
        );
    }
    for d in &report.dominance {
        eprintln!("{}: {}/{} hold, min margin {}", d.name, d.holds, d.trials, fmt_opt(d.min_margin));
    }
    let t = &report.totals;
    eprintln!(
        "{} trials, {} violations, {} uncertified ({:.3}%), {} errors, {:.1}s on {} threads",
        t.trials,
        t.violations,
        t.pass_uncertified,
        100.0 * t.uncertified_rate,
        t.errors,
        report.runtime.wall_time_s,
        report.runtime.threads
    );
}

fn campaign(args: &CampaignArgs) -> Result<u8, Error> {
    let config = build_config(args)?;
    let report = run_campaign(&config, threads(args.threads)?)?;
    match &args.out {
        Some(path) => std::fs::write(path, report.to_json())?,
        None => print!("{}", report.to_json()),
    }
    if let Some(path) = &args.csv {
        std::fs::write(path, report.to_csv()?)?;
    }
    if let Some(dir) = &args.save_extremes {
        let paths = save_extremes(&config, &report, dir)?;
        eprintln!("saved {} instance files to {}", paths.len(), dir.display());
    }
    print_summary(&report);
    Ok(report.exit_code() as u8)
}

/// Recorded and replayed slacks may differ by this much.
const REPLAY_TOL: f64 = 1e-12;

fn verify_file(file: &PathBuf) -> Result<u8, Error> {
    let instance = Instance::read(file)?;
    let outcomes = verify(&instance)?;
    let recorded = instance.meta.map(|m| m.recorded).unwrap_or_default();
    let mut code = 0u8;
    println!("{:<4} {:<18} {:>24} {:>24}  note", "id", "verdict", "slack", "recorded");
    for o in &outcomes {
        match &o.result {
            Ok(r) => {
                let verdict = serde_json::to_value(r.verdict).expect("verdicts serialize");
                let rec = recorded.get(o.id);
                let note = match rec {
                    Some(v) if (v - r.slack).abs() > REPLAY_TOL => {
                        code = code.max(1);
                        format!("replay mismatch {:.3e}", v - r.slack)
                    }
                    _ => r.note.clone().unwrap_or_default(),
                };
                code = code.max(match r.verdict {
                    Verdict::ViolationCandidate => 3,
                    Verdict::PassUncertified => 2,
                    _ => 0,
                });
                println!(
                    "{:<4} {:<18} {:>24.16e} {:>24}  {}",
                    o.id,
                    verdict.as_str().unwrap_or_default(),
                    r.slack,
                    rec.map_or_else(|| "-".into(), |v| format!("{v:.16e}")),
                    note
                );
            }
            Err(Error::PreconditionFailed(why)) => println!("{:<4} {:<18} {:>24} {:>24}  {why}", o.id, "SKIPPED", "-", "-"),
            Err(e) => {
                code = code.max(1);
                println!("{:<4} {:<18} {:>24} {:>24}  {e}", o.id, "ERROR", "-", "-");
            }
        }
    }
    Ok(code)
}

fn info() -> String {
    let tol = Tolerances::default();
    let opts = CheckOptions::default();
    let mut out = format!("semiradius {}\n", env!("CARGO_PKG_VERSION"));
    out += &format!("tolerances: {}\n", serde_json::to_string(&tol).expect("tolerances serialize"));
    out += &format!("check options: {}\n", serde_json::to_string(&opts).expect("options serialize"));
    out += &format!("threads: ${THREADS_ENV}, else all cores\nchecks:\n");
    for d in catalog() {
        out += &format!("  {:<4} {}\n", d.id, d.title);
    }
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Campaign(args) => campaign(args),
        Command::Verify { file } => verify_file(file),
        Command::Info => {
            // A closed pipe (as in `info | head`) is not an error.
            let _ = std::io::stdout().write_all(info().as_bytes());
            Ok(0)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
