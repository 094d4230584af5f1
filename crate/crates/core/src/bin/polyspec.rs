use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use polyspec::algebra::Tolerance;
use polyspec::harness::fuzz::fuzz_algebra;
use polyspec::harness::report::{groups_to_csv, summarize_groups};
use polyspec::harness::{self, HarnessError, RunConfig, Sweeps, Verdict};

/// Discretize the Dirichlet polyharmonic eigenproblem, solve it, and check
/// the universal eigenvalue inequalities on the result.
#[derive(Parser)]
#[command(name = "polyspec", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path prefix; overrides the configured one.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Tolerance override, e.g. `--tol bounds=1e-8`. Repeatable.
    #[arg(long = "tol", global = true, value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the spectrum only; prints one eigenvalue per line.
    Solve,
    /// Full pipeline: solve, run every enabled check, write the report.
    Verify,
    /// Check the inequalities on an eigenvalue list (one positive value per line).
    Bounds {
        file: PathBuf,
        /// Operator order.
        #[arg(long, default_value_t = 1)]
        l: u32,
        /// Spatial dimension.
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    /// Randomized checks of the sum inequalities.
    FuzzAlgebra {
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or("expected name=value")?;
    let value: f64 = value.trim().parse().map_err(|e| format!("bad value '{value}': {e}"))?;
    Ok((name.trim().to_string(), value))
}

fn load_config(common: &Common) -> Result<RunConfig, HarnessError> {
    let path = common
        .config
        .as_deref()
        .ok_or_else(|| HarnessError::Config("--config is required for this command".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output = out.clone();
    }
    cfg.tolerances.extend(common.tol.iter().cloned());
    cfg.validate()?;
    Ok(cfg)
}

fn read_eigenvalues(path: &Path) -> Result<Vec<f64>, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
    text.lines()
        .enumerate()
        .map(|(i, line)| (i, line.trim()))
        .filter(|(_, line)| !line.is_empty() && !line.starts_with('#'))
        .map(|(i, line)| {
            line.parse::<f64>()
                .map_err(|e| HarnessError::Config(format!("line {}: '{line}': {e}", i + 1)))
        })
        .collect()
}

fn execute(cli: Cli) -> Result<ExitCode, HarnessError> {
    let common = &cli.common;
    match cli.command {
        Command::Solve => {
            let cfg = load_config(common)?;
            let (_, spectrum) = harness::solve(&cfg)?;
            for v in &spectrum.eigenvalues {
                println!("{v:.17e}");
            }
            if common.out.is_some() {
                let path = format!("{}.spectrum.json", cfg.output);
                let body = serde_json::to_string_pretty(&harness::summarize_spectrum(&spectrum)).expect("serializes");
                std::fs::write(&path, body).map_err(|e| HarnessError::Io(e.to_string()))?;
                eprintln!("wrote {path}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify => {
            let cfg = load_config(common)?;
            let report = harness::run(&cfg)?;
            let (json, csv) = report.write(&cfg.output)?;
            print!("{}", report.summary());
            eprintln!("wrote {} and {}", json.display(), csv.display());
            Ok(match report.verdict {
                Verdict::Pass => ExitCode::SUCCESS,
                Verdict::Fail => ExitCode::from(1),
                Verdict::Aborted => ExitCode::from(3),
            })
        }
        Command::Bounds { file, l, n } => {
            let eigenvalues = read_eigenvalues(&file)?;
            let tolerances: BTreeMap<String, f64> = common.tol.iter().cloned().collect();
            let label = format!("file:{}", file.display());
            let groups = harness::check_eigenvalues(&eigenvalues, l, n, &Sweeps::default(), &tolerances, &label)?;
            print!("{}", summarize_groups(&groups));
            if let Some(out) = &common.out {
                let path = format!("{out}.csv");
                std::fs::write(&path, groups_to_csv(&groups)).map_err(|e| HarnessError::Io(e.to_string()))?;
                eprintln!("wrote {path}");
            }
            let passed = groups.iter().all(|g| g.passed);
            println!("verdict: {}", if passed { "Pass" } else { "Fail" });
            Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::FuzzAlgebra { trials } => {
            let mut tol = Tolerance::default();
            for (name, value) in &common.tol {
                match name.as_str() {
                    "algebra" if *value > 0.0 => tol.relative = *value,
                    _ => return Err(HarnessError::Config(format!("fuzz-algebra accepts only --tol algebra=<positive>, got {name}={value}"))),
                }
            }
            let summary = fuzz_algebra(trials, common.seed.unwrap_or(0), tol);
            for s in &summary.suites {
                println!(
                    "{:<26} {:>8} trials {:>4} violations  worst relative margin {:.3e}",
                    s.name, s.trials, s.violations, s.worst_relative_margin
                );
            }
            Ok(if summary.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
