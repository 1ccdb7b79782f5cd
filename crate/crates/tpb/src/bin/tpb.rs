//! Experiment runner CLI.
//!
//! ```text
//! tpb --config PATH [--out DIR] [--trials N] [--seed S] [--jobs K] [--verbose]
//! ```
//!
//! Flags override config-file values. `--jobs` defaults to the `TPB_JOBS`
//! environment variable, then to 1; results are identical for every jobs
//! count. Exit codes: 0 success, 1 usage/config error, 2 bound violation,
//! 3 internal error.

use std::path::PathBuf;
use std::process::ExitCode;

use tpb::harness::{self, HarnessError};

struct Args {
    config: PathBuf,
    out: PathBuf,
    trials: Option<u64>,
    seed: Option<u64>,
    jobs: usize,
    verbose: bool,
}

const USAGE: &str = "usage: tpb --config PATH [--out DIR] [--trials N] [--seed S] [--jobs K] [--verbose]";

fn parse_args() -> Result<Args, String> {
    let mut config: Option<PathBuf> = None;
    let mut out = PathBuf::from("tpb-out");
    let mut trials = None;
    let mut seed = None;
    let mut jobs: Option<usize> = None;
    let mut verbose = false;
    let mut it = std::env::args().skip(1);
    while let Some(arg) = it.next() {
        let mut value = |flag: &str| {
            it.next().ok_or_else(|| format!("{flag} needs a value\n{USAGE}"))
        };
        match arg.as_str() {
            "--config" => config = Some(PathBuf::from(value("--config")?)),
            "--out" => out = PathBuf::from(value("--out")?),
            "--trials" => {
                trials = Some(
                    value("--trials")?
                        .parse::<u64>()
                        .map_err(|_| "--trials takes an unsigned integer".to_string())?,
                )
            }
            "--seed" => {
                seed = Some(
                    value("--seed")?
                        .parse::<u64>()
                        .map_err(|_| "--seed takes an unsigned integer".to_string())?,
                )
            }
            "--jobs" => {
                jobs = Some(
                    value("--jobs")?
                        .parse::<usize>()
                        .map_err(|_| "--jobs takes an unsigned integer".to_string())?,
                )
            }
            "--verbose" => verbose = true,
            "--help" | "-h" => return Err(USAGE.to_string()),
            other => return Err(format!("unknown flag `{other}`\n{USAGE}")),
        }
    }
    let jobs = jobs
        .or_else(|| std::env::var("TPB_JOBS").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(1)
        .max(1);
    let config = config.ok_or_else(|| format!("--config is required\n{USAGE}"))?;
    Ok(Args { config, out, trials, seed, jobs, verbose })
}

fn main() -> ExitCode {
    let args = match parse_args() {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(1);
        }
    };
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", args.config.display());
            return ExitCode::from(1);
        }
    };
    let mut config = match harness::parse_config(&text) {
        Ok(c) => c,
        Err(errs) => {
            eprintln!("invalid config {}:", args.config.display());
            for e in errs {
                eprintln!("  - {e}");
            }
            return ExitCode::from(1);
        }
    };
    if let Some(t) = args.trials {
        if t == 0 {
            eprintln!("--trials must be >= 1");
            return ExitCode::from(1);
        }
        config.trials = t;
    }
    if let Some(s) = args.seed {
        config.base_seed = s;
    }

    let report = match harness::run_experiment(&config, args.jobs) {
        Ok(r) => r,
        Err(HarnessError::Config(errs)) => {
            for e in errs {
                eprintln!("config: {e}");
            }
            return ExitCode::from(1);
        }
        Err(e @ HarnessError::Build(_)) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(3);
        }
    };

    if let Err(e) = std::fs::create_dir_all(&args.out)
        .and_then(|()| harness::emit_csv(&report, &args.out.join("report.csv")))
        .and_then(|()| harness::emit_curves(&report, &args.out))
    {
        eprintln!("cannot write outputs to {}: {e}", args.out.display());
        return ExitCode::from(3);
    }

    println!(
        "config {} | n={} m={} trials={} seed={}",
        report.config_hash, report.dimension, report.arm_count, report.trials, report.base_seed
    );
    if report.best_set.is_empty() {
        println!("instance: sphere, best per-step value {:.6}", report.best_value);
    } else {
        println!(
            "instance: best arms {:?}, best per-step value {:.6}",
            report.best_set, report.best_value
        );
    }
    if let Some(c) = &report.constants {
        println!(
            "constants: delta={:.6} gamma={:.6} k1={:.6} L'={} k2={:.6} k3={:.6}",
            c.delta, c.gamma, c.k1, c.l_prime, c.k2, c.k3
        );
    }
    if let Some(note) = &report.constants_note {
        println!("note: {note}");
    }
    if args.verbose {
        for curve in &report.curves {
            println!("policy {}", curve.policy);
            for (idx, &t) in report.checkpoints.iter().enumerate() {
                let bound = curve
                    .bound
                    .as_ref()
                    .map(|b| format!(" bound={:.3}", b[idx]))
                    .unwrap_or_default();
                println!(
                    "  t={t:>9} mean={:.4} se={:.4}{bound}",
                    curve.mean_regret[idx], curve.stderr[idx]
                );
            }
        }
    }
    println!("wrote {}", args.out.join("report.csv").display());

    if report.bound_violation {
        eprintln!("BOUND VIOLATION: a mean regret exceeded its theoretical bound");
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}
