//! Thin CLI over the `regenq` library: load a network config, run seeded
//! replications, and emit versioned JSON reports.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use regenq::network::NetworkConfig;
use regenq::regen::RegenMode;
use regenq::run::{
    self, ModeComparison, Report, RunOutcome, RunSpec, SweepRow,
};
use regenq::StateFunctional;

#[derive(Parser)]
#[command(
    name = "regenq",
    about = "Regenerative simulation of multiclass open queueing networks",
    version
)]
struct Cli {
    /// Worker threads for replication fan-out (default: available cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the steady-state mean of a state functional.
    Run(RunArgs),
    /// Re-run the experiment at several exponential-extraction rates.
    SweepLambda(SweepArgs),
    /// Run both regeneration designs on common sample paths.
    CompareModes(RunArgs),
    /// Run the built-in self-verification battery.
    Verify(VerifyArgs),
    /// Check a config against the modeling assumptions, both modes.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Network configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Simulated time horizon.
    #[arg(long, default_value_t = 1_000_000.0)]
    horizon: f64,
    /// Master seed; with --reps, replication r uses substream r.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent replications.
    #[arg(long, default_value_t = 1)]
    reps: u64,
    /// Regeneration design.
    #[arg(long, default_value = "primary")]
    mode: RegenMode,
    /// State functional: total | class:<k> | indicator:<c>.
    #[arg(long = "h", default_value = "total")]
    functional: String,
    /// Two-sided confidence level.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-cycle records as CSV.
    #[arg(long)]
    cycles_csv: Option<PathBuf>,
    /// Run despite stations with traffic intensity >= 1 (no estimator
    /// validity is claimed).
    #[arg(long)]
    allow_unstable: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    base: RunArgs,
    /// Extraction-rate multipliers (each >= 1), e.g. --factors 1,1.5,2.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.5, 2.0])]
    factors: Vec<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Sample size per law-preservation check.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Seed for the check samples.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON verification report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Network configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Write the JSON validation report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
        {
            eprintln!("error: could not size worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::SweepLambda(args) => cmd_sweep(args),
        Command::CompareModes(args) => cmd_compare(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Validate(args) => cmd_validate(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load_config(path: &Path) -> Result<NetworkConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    NetworkConfig::from_json(&text).map_err(|e| e.to_string())
}

fn build_spec(args: &RunArgs) -> Result<RunSpec, String> {
    let config = load_config(&args.config)?;
    let functional = StateFunctional::from_str(&args.functional)?;
    if !args.horizon.is_finite() || args.horizon <= 0.0 {
        return Err(format!("horizon must be positive and finite, got {}", args.horizon));
    }
    if args.reps == 0 {
        return Err("reps must be at least 1".into());
    }
    if !(args.level > 0.0 && args.level < 1.0) {
        return Err(format!("level must lie in (0, 1), got {}", args.level));
    }
    Ok(RunSpec {
        config,
        horizon: args.horizon,
        seed: args.seed,
        replications: args.reps,
        mode: args.mode,
        functional,
        level: args.level,
        allow_unstable: args.allow_unstable,
        record_trace: false,
    })
}

fn emit(out: &Option<PathBuf>, doc: &serde_json::Value) -> Result<(), String> {
    let text = serde_json::to_string_pretty(doc).expect("reports serialize");
    match out {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn write_cycles(path: &Path, outcome: &RunOutcome) -> Result<(), String> {
    std::fs::write(path, run::cycles_to_csv(&outcome.cycles))
        .map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Sibling path with `mode` inserted before the extension.
fn mode_path(path: &Path, mode: RegenMode) -> PathBuf {
    match path.extension() {
        Some(ext) => path.with_extension(format!("{mode}.{}", ext.to_string_lossy())),
        None => path.with_extension(mode.to_string()),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.6e}"))
}

fn summarize(report: &Report) -> String {
    let ci = report
        .ci
        .map_or_else(|| "-".into(), |[lo, hi]| format!("[{lo:.6}, {hi:.6}]"));
    format!(
        "mode={} h={} cycles={} beta={} ci={} tavc={} avsde={}",
        report.mode,
        report.functional,
        report.n_cycles,
        fmt_opt(report.beta),
        ci,
        fmt_opt(report.tavc),
        fmt_opt(report.avsde),
    )
}

fn cmd_run(args: RunArgs) -> Result<ExitCode, String> {
    let spec = build_spec(&args)?;
    let outcome = run::execute(&spec).map_err(|e| e.to_string())?;
    eprintln!("{}", summarize(&outcome.merged));
    for warning in &outcome.merged.warnings {
        eprintln!("warning: {warning}");
    }
    if let Some(path) = &args.cycles_csv {
        write_cycles(path, &outcome)?;
    }
    let doc = serde_json::json!({
        "schema": run::REPORT_SCHEMA,
        "merged": outcome.merged,
        "per_replication": outcome.per_replication,
    });
    emit(&args.out, &doc)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode, String> {
    let spec = build_spec(&args.base)?;
    let rows = run::sweep_lambda(&spec, &args.factors).map_err(|e| e.to_string())?;
    eprintln!(
        "{:>8} {:>10} {:>14} {:>14} {:>14}",
        "factor", "cycles", "beta", "tavc", "avsde"
    );
    for SweepRow { factor, outcome } in &rows {
        let m = &outcome.merged;
        eprintln!(
            "{factor:>8} {:>10} {:>14} {:>14} {:>14}",
            m.n_cycles,
            fmt_opt(m.beta),
            fmt_opt(m.tavc),
            fmt_opt(m.avsde),
        );
    }
    let doc = serde_json::json!({
        "schema": "regenq.sweep.v1",
        "rows": rows
            .iter()
            .map(|row| serde_json::json!({
                "factor": row.factor,
                "merged": row.outcome.merged,
                "per_replication": row.outcome.per_replication,
            }))
            .collect::<Vec<_>>(),
    });
    emit(&args.base.out, &doc)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_compare(args: RunArgs) -> Result<ExitCode, String> {
    let spec = build_spec(&args)?;
    let ModeComparison { primary, alternative } =
        run::compare_modes(&spec).map_err(|e| e.to_string())?;
    eprintln!("{}", summarize(&primary.merged));
    eprintln!("{}", summarize(&alternative.merged));
    if let (Some(kp), Some(ka)) = (primary.merged.avsde, alternative.merged.avsde) {
        let better = if ka < kp { "alternative" } else { "primary" };
        eprintln!("lower variance-of-variance: {better} design");
    }
    if let Some(path) = &args.cycles_csv {
        write_cycles(&mode_path(path, RegenMode::Primary), &primary)?;
        write_cycles(&mode_path(path, RegenMode::Alternative), &alternative)?;
    }
    let doc = serde_json::json!({
        "schema": "regenq.compare.v1",
        "primary": {
            "merged": primary.merged,
            "per_replication": primary.per_replication,
        },
        "alternative": {
            "merged": alternative.merged,
            "per_replication": alternative.per_replication,
        },
    });
    emit(&args.out, &doc)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, String> {
    let report = run::verify_battery(args.samples, args.seed);
    for check in &report.checks {
        let tag = if check.passed { "PASS" } else { "FAIL" };
        println!("{tag} {} — {}", check.name, check.detail);
    }
    let doc = serde_json::to_value(&report).expect("verify report serializes");
    if args.out.is_some() {
        emit(&args.out, &doc)?;
    }
    Ok(if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn cmd_validate(args: ValidateArgs) -> Result<ExitCode, String> {
    let cfg = load_config(&args.config)?;
    let output = run::validation_output(&cfg);
    for report in [&output.primary, &output.alternative] {
        println!("[{} design]", report.mode);
        for check in &report.checks {
            let status = if check.passed {
                "ok  "
            } else {
                match check.severity {
                    regenq::network::Severity::Error => "FAIL",
                    regenq::network::Severity::Warning => "warn",
                    regenq::network::Severity::Info => "note",
                }
            };
            println!("  {status} {} — {}", check.name, check.detail);
        }
        println!(
            "  => {}",
            if report.mode_available() {
                "available"
            } else {
                "unavailable"
            }
        );
    }
    let doc = serde_json::to_value(&output).expect("validation report serializes");
    if args.out.is_some() {
        emit(&args.out, &doc)?;
    }
    // The config is usable if at least the primary design is; the exit code
    // reflects that so scripts can gate on it.
    Ok(if output.primary.mode_available() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
