//! The `mudflow` command line.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::evolution::{dispersion_fit, growth_rate, multiplier_m, simulate_from, SimState, Termination};
use crate::geometry::PeriodicProfile;
use crate::rheology::{check_conditions, check_effective_conditions, ViscosityModel};
use crate::selftest;

use super::config::{load_config, ParamsConfig, RunConfig};
use super::output::{load_snapshot, write_outputs, RunSummary};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_NUMERICAL: i32 = 5;
pub const EXIT_GUARD: i32 = 6;

#[derive(Debug, Parser)]
#[command(name = "mudflow", version, about = "Mud/water interface simulator")]
pub struct Cli {
    /// Print progress and solver logs to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a simulation and write its outputs.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory; overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Continue from a snapshot. Its configuration is used unless `--config` is given.
        #[arg(long)]
        restart: Option<PathBuf>,
        /// Overrides `run.t_end`.
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Measure decay or growth rates of single modes and compare with the flat-state rates.
    Dispersion {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        k_min: i64,
        #[arg(long, default_value_t = 4)]
        k_max: i64,
        #[arg(long, default_value_t = 1e-4)]
        amplitude: f64,
    },
    /// Print the flat-state symbols `m(k)` and `λ_k`.
    Linearize {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        k_max: i64,
        #[arg(long)]
        json: bool,
    },
    /// Check the structural conditions of a viscosity law.
    CheckViscosity(CheckViscosityArgs),
    /// Run the numerical acceptance checks.
    Selftest,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelKind {
    Newtonian,
    Hectorite,
    Thickening,
}

#[derive(Debug, Args)]
pub struct CheckViscosityArgs {
    /// Read the model from a run configuration.
    #[arg(long, conflicts_with = "model")]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    #[arg(long)]
    mu0: Option<f64>,
    #[arg(long)]
    mu_inf: Option<f64>,
    #[arg(long)]
    tau0: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Upper end of the sampled squared shear rates.
    #[arg(long, default_value_t = 100.0)]
    r_max: f64,
    #[arg(long, default_value_t = 2001)]
    samples: usize,
}

impl CheckViscosityArgs {
    fn params(&self) -> std::result::Result<ParamsConfig, String> {
        if let Some(path) = &self.config {
            return load_config(path).map(|c| c.params).map_err(|e| e.to_string());
        }
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| format!("--{name} is required for this model"));
        let viscosity = match self.model {
            None => return Err("give --config or --model".into()),
            Some(ModelKind::Newtonian) => ViscosityModel::Newtonian {
                mu0: need(self.mu0, "mu0")?,
            },
            Some(ModelKind::Hectorite) => ViscosityModel::Hectorite {
                mu_inf: need(self.mu_inf, "mu-inf")?,
                tau0: need(self.tau0, "tau0")?,
                beta: need(self.beta, "beta")?,
            },
            Some(ModelKind::Thickening) => ViscosityModel::Thickening {
                mu0: need(self.mu0, "mu0")?,
                mu_inf: need(self.mu_inf, "mu-inf")?,
                beta: need(self.beta, "beta")?,
            },
        };
        Ok(ParamsConfig {
            viscosity,
            ..ParamsConfig::default()
        })
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parse { .. } => EXIT_CONFIG,
        Error::Io { .. } => EXIT_IO,
        Error::Guard { .. } => EXIT_GUARD,
        Error::Domain(_) | Error::Shape(_) | Error::NonConvergence { .. } | Error::Singular { .. } => EXIT_NUMERICAL,
    }
}

fn config_or_default(path: Option<&PathBuf>) -> Result<RunConfig> {
    match path {
        Some(p) => load_config(p),
        None => Ok(RunConfig::default()),
    }
}

fn cmd_simulate(
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    restart: Option<PathBuf>,
    t_end: Option<f64>,
    verbose: bool,
) -> Result<i32> {
    let (mut cfg, state) = match (&config, &restart) {
        (None, None) => return Err(Error::Config(vec!["simulate needs --config or --restart".into()])),
        (_, Some(snap)) => {
            let snap = load_snapshot(snap)?;
            let cfg = match &config {
                Some(p) => load_config(p)?,
                None => snap.config,
            };
            if snap.state.f.n() != cfg.grid.nx {
                return Err(Error::Config(vec![format!(
                    "snapshot has {} nodes but grid.nx = {}",
                    snap.state.f.n(),
                    cfg.grid.nx
                )]));
            }
            (cfg, snap.state)
        }
        (Some(p), None) => {
            let cfg = load_config(p)?;
            let state = SimState::initial(cfg.initial_profile()?, cfg.run.dt)?;
            (cfg, state)
        }
    };
    if let Some(t) = t_end {
        cfg.run.t_end = t;
    }
    if let Some(dir) = out {
        cfg.output.dir = dir;
    }
    let mut stepper = cfg.stepper()?;
    if verbose {
        eprintln!(
            "simulating from t = {} to t = {} on {}x({}+{}) nodes",
            state.t, cfg.run.t_end, cfg.grid.nx, cfg.grid.ny_w, cfg.grid.ny_m
        );
    }
    let traj = simulate_from(&mut stepper, state)?;
    let written = write_outputs(&traj, &cfg, &cfg.output.dir)?;
    let summary = RunSummary::of(&traj);
    println!("{}", serde_json::to_string_pretty(&summary).expect("serializable summary"));
    if verbose {
        for p in &written {
            eprintln!("wrote {}", p.display());
        }
    }
    Ok(match traj.termination {
        Termination::Completed => EXIT_OK,
        Termination::Guard { t, reason } => {
            eprintln!("guard triggered at t = {t}: {reason}");
            EXIT_GUARD
        }
    })
}

fn cmd_dispersion(config: Option<PathBuf>, k_min: i64, k_max: i64, amplitude: f64) -> Result<i32> {
    let cfg = config_or_default(config.as_ref())?;
    let nx = cfg.grid.nx as i64;
    if k_min < 1 || k_max < k_min || k_max >= nx / 2 {
        return Err(Error::Config(vec![format!("need 1 <= k-min <= k-max < {}", nx / 2)]));
    }
    if !(amplitude > 0.0 && amplitude < 0.1) {
        return Err(Error::Config(vec![format!("amplitude must lie in (0, 0.1), got {amplitude}")]));
    }
    let params = cfg.params.model_params();
    println!("{:>3} {:>14} {:>14} {:>10}", "k", "measured", "predicted", "rel_err");
    let mut worst = 0.0f64;
    for k in k_min..=k_max {
        let f0 = PeriodicProfile::from_fn(cfg.grid.nx, |x| amplitude * (k as f64 * x).cos())?;
        let mut stepper = cfg.stepper()?;
        let traj = simulate_from(&mut stepper, SimState::initial(f0, cfg.run.dt)?)?;
        if let Termination::Guard { t, reason } = &traj.termination {
            return Err(Error::Guard { t: *t, reason: reason.clone() });
        }
        let measured = dispersion_fit(&traj, k)?;
        let predicted = growth_rate(k, &params);
        let rel = (measured - predicted).abs() / predicted.abs().max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
        println!("{k:>3} {measured:>14.6e} {predicted:>14.6e} {rel:>10.2e}");
    }
    println!("worst relative error {worst:.2e}");
    Ok(EXIT_OK)
}

#[derive(serde::Serialize)]
struct SymbolRow {
    k: i64,
    m: f64,
    lambda: f64,
}

fn cmd_linearize(config: Option<PathBuf>, k_max: i64, json: bool) -> Result<i32> {
    let cfg = config_or_default(config.as_ref())?;
    if k_max < 1 {
        return Err(Error::Config(vec!["k-max must be at least 1".into()]));
    }
    let params = cfg.params.model_params();
    let rows: Vec<SymbolRow> = (1..=k_max)
        .map(|k| SymbolRow {
            k,
            m: multiplier_m(k, &params),
            lambda: growth_rate(k, &params),
        })
        .collect();
    if json {
        println!("{}", serde_json::to_string_pretty(&rows).expect("serializable rows"));
    } else {
        println!("mu_m(0) = {:.10}", params.mu_m0());
        println!("{:>3} {:>16} {:>16}", "k", "m(k)", "lambda_k");
        for r in &rows {
            println!("{:>3} {:>16.10} {:>16.10}", r.k, r.m, r.lambda);
        }
        if !params.stability_ok() {
            println!("flat state is unstable: gamma = 0 and rho_m <= rho_w");
        }
    }
    Ok(EXIT_OK)
}

fn cmd_check_viscosity(args: &CheckViscosityArgs) -> Result<i32> {
    let params = match args.params() {
        Ok(p) => p,
        Err(msg) => return Err(Error::Config(vec![msg])),
    };
    let base = check_conditions(&params.viscosity, args.r_max, args.samples)?;
    let eff = check_effective_conditions(&params.effective_viscosity(), args.r_max, args.samples)?;
    println!("model: {:?}", params.viscosity);
    println!(
        "mu and mu + 2 r mu':       min {:.6e}  max {:.6e}  (tightest at r = {:.4})",
        base.m_hat, base.big_m_hat, base.worst_r
    );
    if let Some(rule) = base.closed_form {
        println!("closed-form rule beta*tau0 < 4 mu_inf: {}", if rule { "satisfied" } else { "violated" });
    }
    println!(
        "mu_m and mu_m - 2 r mu_m': min {:.6e}  max {:.6e}  (tightest at r = {:.4})",
        eff.m_hat, eff.big_m_hat, eff.worst_r
    );
    let ok = base.ok && eff.ok;
    println!("{}", if ok { "admissible" } else { "NOT admissible" });
    Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_selftest() -> i32 {
    let results = selftest::run_all();
    for r in &results {
        println!("{r}");
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            restart,
            t_end,
        } => cmd_simulate(config, out, restart, t_end, cli.verbose),
        Command::Dispersion {
            config,
            k_min,
            k_max,
            amplitude,
        } => cmd_dispersion(config, k_min, k_max, amplitude),
        Command::Linearize { config, k_max, json } => cmd_linearize(config, k_max, json),
        Command::CheckViscosity(args) => cmd_check_viscosity(&args),
        Command::Selftest => Ok(cmd_selftest()),
    }
}

/// Parses `args` (program name first) and runs; returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    if cli.verbose {
        let _ = env_logger::Builder::new().filter_level(log::LevelFilter::Debug).try_init();
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
