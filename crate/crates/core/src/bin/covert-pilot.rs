use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use covert_pilot::config::{Settings, KEYS};
use covert_pilot::detection::classify_regime;
use covert_pilot::montecarlo::{self, McTarget};
use covert_pilot::rates::{solve_lambda_star, theorem1_feasibility};
use covert_pilot::sweep::{run_sweep, write_csv, CSV_HEADER};
use covert_pilot::verify::{run_suite, Suite};
use covert_pilot::Error;

#[derive(Parser)]
#[command(name = "covert-pilot", version, about = "Covert pilot-scaling attack analysis")]
#[command(after_help = after_help())]
struct Cli {
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed for every random draw.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override one configuration key, e.g. --set lambda_a=10. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Feasibility sweep over the (epsilon, lambda_t) grid, written as CSV.
    Sweep,
    /// Run a verification suite: kl, mmse, threshold, regimes, sqrtlaw or all.
    Verify { suite: Suite },
    /// Monte Carlo estimate as JSON: comm-detection, pilot-kl,
    /// estimator-error or sqrt-law.
    Mc {
        target: McTarget,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Feasibility report for one (epsilon, lambda_t) pair, as JSON.
    Rate {
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        lambda_t: Option<f64>,
    },
}

fn after_help() -> String {
    let mut s = format!("Sweep CSV columns, in order:\n  {}\n\nConfiguration keys:\n", CSV_HEADER.join(","));
    for (k, d) in KEYS {
        s.push_str(&format!("  {k:<22} {d}\n"));
    }
    s.push_str("\nExit codes: 0 ok, 1 configuration error, 2 I/O error, 3 verification failure.");
    s
}

enum Failure {
    Lib(Error),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(Error::Config("--threads must be >= 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let mut settings = match &cli.config {
        Some(p) => Settings::from_file(p)?,
        None => Settings::default(),
    };
    for o in &cli.overrides {
        settings.apply_override(o)?;
    }

    match cli.command {
        Command::Sweep => {
            let spec = settings.sweep_spec()?;
            let cells = run_sweep(&spec)?;
            let mut out = output(&cli.out)?;
            write_csv(&cells, &mut out)?;
            out.flush()?;
        }
        Command::Verify { suite } => {
            let checks = run_suite(suite, &settings, cli.seed)?;
            let mut out = output(&cli.out)?;
            for c in &checks {
                writeln!(out, "{c}")?;
            }
            out.flush()?;
            if let Some(first) = checks.iter().find(|c| !c.passed) {
                return Err(Failure::Verification(first.to_string()));
            }
        }
        Command::Mc { target, trials } => {
            if let Some(t) = trials {
                settings.trials = t;
            }
            let doc = run_mc(target, &settings, cli.seed)?;
            let mut out = output(&cli.out)?;
            serde_json::to_writer_pretty(&mut out, &doc).map_err(Error::from)?;
            writeln!(out)?;
            out.flush()?;
        }
        Command::Rate { epsilon, lambda_t } => {
            if let Some(e) = epsilon {
                settings.epsilon = e;
            }
            if let Some(l) = lambda_t {
                settings.lambda_t = l;
            }
            let channel = settings.channel()?;
            let config = settings.system(&channel)?;
            let attack = settings.attack()?;
            let report = theorem1_feasibility(&channel, &attack, &config)?;
            let regime = classify_regime(&channel, &attack, &config)?;
            let lambda_star = if attack.epsilon > 0.0 {
                Some(solve_lambda_star(&channel, &config, attack.epsilon)?.lambda_star)
            } else {
                None
            };
            let doc = json!({
                "epsilon": attack.epsilon,
                "lambda_t": attack.lambda_t,
                "report": report,
                "failing_condition": report.first_failing(),
                "regime": regime,
                "lambda_star": lambda_star,
            });
            let mut out = output(&cli.out)?;
            serde_json::to_writer_pretty(&mut out, &doc).map_err(Error::from)?;
            writeln!(out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn run_mc(target: McTarget, settings: &Settings, seed: u64) -> Result<serde_json::Value, Error> {
    let channel = settings.channel()?;
    let config = settings.system(&channel)?;
    let attack = settings.attack()?;
    let mc = settings.mc_config(target, seed);
    let (result, details) = match target {
        McTarget::CommDetection => {
            let r = montecarlo::mc_comm_error_probs(&channel, &attack, &config, &mc)?;
            let details = json!({
                "p_f": r.p_f,
                "p_m": r.p_m,
                "tau": r.tau,
                "n": mc.n,
                "two_phase": mc.two_phase,
            });
            (r.sum, details)
        }
        McTarget::PilotKl => {
            let r = montecarlo::mc_pilot_kl(&channel, &attack, mc.l, &mc)?;
            (r, json!({ "l": mc.l }))
        }
        McTarget::EstimatorError => {
            let t = montecarlo::mc_estimator_error(&channel, &attack, &settings.l_grid, &mc)?;
            let r = montecarlo::McResult {
                point_estimate: t.slope_h0,
                std_error: f64::NAN,
                trials_used: mc.trials,
                analytic_reference: Some(-1.0),
            };
            (r, json!({ "slope_h0": t.slope_h0, "slope_h1": t.slope_h1, "rows": t.rows }))
        }
        McTarget::SqrtLaw => {
            let rows = montecarlo::mc_sqrt_law(&channel, &config, settings.c, &[mc.n], &mc)?;
            let row = rows[0];
            (row.advantage, json!({ "row": row }))
        }
    };
    Ok(json!({
        "target": target.as_str(),
        "params": settings,
        "point_estimate": result.point_estimate,
        "std_error": result.std_error,
        "analytic_reference": result.analytic_reference,
        "trials": result.trials_used,
        "seed": seed,
        "details": details,
    }))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(first)) => {
            eprintln!("verification failed: {first}");
            ExitCode::from(3)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Io(_) | Error::Csv(_) | Error::Json(_) => 2,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}
