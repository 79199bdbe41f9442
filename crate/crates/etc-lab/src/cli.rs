//! `etc-lab design | masp | check | simulate | batch`.
//!
//! Exit codes: 0 success, 1 invalid input or failed check, 2 divergence.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use etc_lab_core::hybrid_sim::r_monitor;
use etc_lab_core::montecarlo::sample_initial;
use etc_lab_core::systems::check_assumption_sampled;
use etc_lab_core::{masp, simulate, SimError};
use thiserror::Error;

use crate::batch::{run_batch_parallel, ParallelError};
use crate::config::{self, ConfigError, Experiment, RunConfig};
use crate::io::{self, CertificateFile, IoError};

/// Environment variable that replaces the configured seed.
pub const SEED_ENV: &str = "ETC_LAB_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "etc-lab",
    version,
    about = "Event-triggered control with an enforced dwell time"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Design an LMI certificate for a linear loop and write certificate.json.
    Design(Source),
    /// Print the maximum allowable sampling period for (γ, L).
    Masp {
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long = "L")]
        l: Option<f64>,
        /// Take γ and L from the certificate of a configuration instead.
        #[arg(long, conflicts_with_all = ["gamma", "l"])]
        config: Option<PathBuf>,
    },
    /// Sample the certificate inequalities; exit 0 iff none is violated.
    Check {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 50.0)]
        radius: f64,
    },
    /// Simulate one solution and write states, events, R-monitor and plot data.
    Simulate(Source),
    /// Run a seeded batch and write summary.json, events.csv and per_run.csv.
    Batch {
        #[command(flatten)]
        source: Source,
        /// Worker threads (all cores by default); results do not depend on it.
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct Source {
    /// JSON run configuration.
    #[arg(long, conflicts_with = "system")]
    config: Option<PathBuf>,
    /// Built-in system: lorenz, lti-sf-tabuada.
    #[arg(long)]
    system: Option<String>,
    /// Dwell time (sampling period in periodic mode).
    #[arg(long = "T")]
    dwell: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Replace the certificate gain γ.
    #[arg(long)]
    gamma: Option<f64>,
    /// Replace the certificate constant L.
    #[arg(long = "L")]
    l: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    n_runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides output_dir).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{0}")]
    Domain(String),
    #[error("check failed")]
    CheckFailed,
    #[error("{0}")]
    Divergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Divergence(_) => 2,
            _ => 1,
        }
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(CliError::CheckFailed) => 1,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{SEED_ENV} must be an unsigned integer, got `{s}`"))),
        Err(_) => Ok(None),
    }
}

/// The configuration named by `src` with its command-line overrides applied.
fn resolve_config(src: &Source) -> Result<RunConfig, CliError> {
    let mut cfg = match (&src.config, &src.system) {
        (Some(path), _) => config::load(path)?,
        (None, Some(name)) => config::builtin(name)?,
        (None, None) => return Err(CliError::Usage("pass --config FILE or --system NAME".into())),
    };
    if let Some(t) = src.dwell {
        cfg.trigger.dwell = t;
    }
    if let Some(s) = src.sigma {
        cfg.trigger.sigma = Some(s);
    }
    if let Some(h) = src.horizon {
        cfg.sim.horizon = h;
    }
    if let Some(n) = src.n_runs {
        cfg.batch.n_runs = n;
    }
    if let Some(seed) = src.seed {
        cfg.batch.seed = seed;
    }
    if let Some(seed) = env_seed()? {
        cfg.batch.seed = seed;
    }
    if let Some(out) = &src.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn experiment(src: &Source) -> Result<(RunConfig, Experiment), CliError> {
    let cfg = resolve_config(src)?;
    let mut exp = config::build_unchecked(&cfg)?;
    exp.override_gains(src.gamma, src.l);
    exp.refresh_zeta(&cfg)?;
    exp.validate()?;
    Ok((cfg, exp))
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Masp { gamma, l, config } => {
            let (g, l) = match (config, gamma, l) {
                (Some(path), _, _) => {
                    let exp = config::build_unchecked(&config::load(&path)?)?;
                    (exp.cert.gamma(), exp.cert.lipschitz())
                }
                (None, Some(g), Some(l)) => (g, l),
                _ => return Err(CliError::Usage("pass --gamma and --L, or --config FILE".into())),
            };
            let t = masp(g, l).map_err(|e| CliError::Domain(e.to_string()))?;
            println!("{t:.4}");
            Ok(())
        }
        Command::Design(src) => {
            let cfg = resolve_config(&src)?;
            let clm = config::closed_loop_matrices(&cfg.system)?.ok_or_else(|| {
                CliError::Domain("design needs a linear system (lti-sf-tabuada or lti-custom)".into())
            })?;
            let exp = config::build_unchecked(&cfg)?;
            let lmi = exp.design.as_ref().expect("linear systems carry their LMI solution");
            let l = etc_lab_core::linalg::spectral_norm(&clm.b2);
            let t_max = masp(lmi.gamma(), l).map_err(|e| CliError::Domain(e.to_string()))?;
            let path = cfg.output_dir.join("certificate.json");
            io::write_json(&CertificateFile::new(lmi, l, t_max), &path)?;
            println!("gamma = {:.4}  L = {l:.4}  T_max = {t_max:.4}", lmi.gamma());
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Check {
            source,
            samples,
            radius,
        } => {
            let cfg = resolve_config(&source)?;
            let mut exp = config::build_unchecked(&cfg)?;
            exp.override_gains(source.gamma, source.l);
            let rep = check_assumption_sampled(exp.sys.as_ref(), exp.cert.as_ref(), samples, radius, cfg.batch.seed);
            println!("samples            {}", rep.samples);
            println!("radius             {}", rep.radius);
            println!("bounds violation   {:.4e}", rep.bounds_violation);
            println!("V-dot violation    {:.4e}", rep.v_dot_violation);
            println!("W-dot violation    {:.4e}", rep.w_dot_violation);
            if let Some((x, e)) = &rep.worst_v_dot_point {
                println!("worst V-dot point  x = {x:?}, e = {e:?}");
            }
            let pass = rep.passed();
            println!("{}", if pass { "PASS" } else { "FAIL" });
            if pass {
                Ok(())
            } else {
                Err(CliError::CheckFailed)
            }
        }
        Command::Simulate(src) => {
            let (cfg, exp) = experiment(&src)?;
            let q0 = exp
                .initial_state
                .clone()
                .unwrap_or_else(|| sample_initial(&exp.batch, exp.sys.nx(), exp.sys.ne(), 0));
            let dir = &cfg.output_dir;
            let result = simulate(exp.sys.as_ref(), exp.cert.as_ref(), &exp.trigger, &q0, &exp.sim);
            let (sol, diverged) = match result {
                Ok(sol) => (sol, None),
                Err(SimError::Divergence { t, partial }) => (*partial, Some(t)),
                Err(e @ SimError::NonFinite { .. }) => return Err(CliError::Divergence(e.to_string())),
                Err(e) => return Err(CliError::Domain(e.to_string())),
            };
            let r = r_monitor(&sol, exp.cert.as_ref(), &exp.zeta);
            io::emit_solution(&sol, &r, exp.trigger.dwell, dir)?;
            println!(
                "jumps = {}  min gap = {}  mean gap = {}  |x(end)| = {:.4e}",
                sol.n_jumps(),
                display(sol.min_gap()),
                display(sol.mean_gap()),
                etc_lab_core::linalg::norm(&sol.final_state.x),
            );
            println!("wrote {}", dir.display());
            match diverged {
                Some(t) => Err(CliError::Divergence(format!("solution diverged at t = {t:.4}"))),
                None => Ok(()),
            }
        }
        Command::Batch { source, workers } => {
            let (cfg, exp) = experiment(&source)?;
            let rep =
                run_batch_parallel(exp.sys.as_ref(), exp.cert.as_ref(), &exp.batch, workers).map_err(|e| match e {
                    ParallelError::Batch(b) => CliError::Domain(b.to_string()),
                    other => CliError::Domain(other.to_string()),
                })?;
            io::emit_report(&rep, &cfg.output_dir)?;
            println!(
                "runs = {}  events = {}  tau_min = {}  tau_avg = {}  failures = {}",
                rep.n_runs,
                rep.n_events_total,
                display(rep.tau_min),
                display(rep.tau_avg),
                rep.failures.len()
            );
            println!("wrote {}", cfg.output_dir.display());
            if rep.failures.is_empty() {
                Ok(())
            } else {
                Err(CliError::Divergence(format!(
                    "{} run(s) diverged: {:?}",
                    rep.failures.len(),
                    rep.failures
                )))
            }
        }
    }
}

fn display(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"))
}
