//! `plapd`: command-line front end of the p-Laplacian laboratory.
//!
//! Exit status: 0 when every requested gate passes, 1 on numerical
//! non-convergence or a failed gate (reports are still written), 2 on a
//! configuration or usage error.

mod commands;
mod config;
mod error;
mod run;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use plapd_core::nonlinearity::NonlinearitySpec;
use serde::Serialize;

use config::{load_table, resolve, resolve_for, set_path, to_value, CheckName, DomainSpec, RunConfig};
use error::{CliError, EXIT_FAILED, EXIT_SCHEMA};
use run::{sha256_hex, Outcome, RunDir, RunManifest, Versions};

#[derive(Parser)]
#[command(name = "plapd", version, about = "Numerical laboratory for -Δ_p u = f(u) with zero Dirichlet data")]
struct Cli {
    /// Directory receiving this run's artifacts [default: runs/<UTC timestamp>]
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve -Δ_p u = f(u) by the fixed-point map and run the identity gates
    Solve(SolveArgs),
    /// First eigenpair of -Δ_p
    Eigen(EigenArgs),
    /// Re-run identity checks on a stored solution.json
    VerifyIdentities(VerifyArgs),
    /// Classify the growth hypotheses of a nonlinearity
    CheckHypotheses(HypothesesArgs),
    /// Fixed points, continuation, threshold bracket, probes and α-sweeps
    Exist(ExistArgs),
    /// Radial shooting solution on a ball of R^N
    OracleRadial(RadialArgs),
    /// Grid of solves over p and h
    Sweep(SweepArgs),
    /// Run a complete config file; its `command` key selects the subcommand
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct SolveArgs {
    /// TOML config; flags override its keys
    #[arg(long)]
    config: Option<PathBuf>,
    /// Nonlinearity, e.g. `power:q=3` or `log-critical:alpha=3`
    #[arg(long)]
    f: Option<NonlinearitySpec>,
    #[arg(long)]
    p: Option<f64>,
    /// `disc`, `disc:radius=2`, `square`, `hexagon` or `polygon:sides=5`
    #[arg(long)]
    domain: Option<DomainSpec>,
    /// Target mesh size
    #[arg(long)]
    h: Option<f64>,
    /// Comma-separated gates to run
    #[arg(long, value_delimiter = ',')]
    checks: Option<Vec<CheckName>>,
    /// Newton iteration budget of each inner solve
    #[arg(long)]
    max_iter: Option<usize>,
    /// Budget of fixed-point iterations
    #[arg(long)]
    max_outer: Option<usize>,
    /// Seed of randomized checks
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the mesh (plain-text format) under this name
    #[arg(long)]
    mesh_out: Option<String>,
}

#[derive(Args)]
struct EigenArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    domain: Option<DomainSpec>,
    #[arg(long)]
    h: Option<f64>,
    /// Relative change of λ that stops the iteration
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// solution.json written by `solve` or `exist`
    #[arg(long)]
    solution: Option<String>,
    #[arg(long, value_delimiter = ',')]
    checks: Option<Vec<CheckName>>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct HypothesesArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    f: Option<NonlinearitySpec>,
    #[arg(long)]
    p: Option<f64>,
    /// Space dimension
    #[arg(long = "N")]
    n: Option<usize>,
    /// First eigenvalue for the condition at zero [default: unit ball]
    #[arg(long)]
    lambda1: Option<f64>,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("mode").multiple(false))]
struct ExistArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    f: Option<NonlinearitySpec>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    domain: Option<DomainSpec>,
    #[arg(long)]
    h: Option<f64>,
    /// Threshold bracket over `from:to:count`
    #[arg(long, group = "mode", value_name = "FROM:TO:COUNT")]
    lambda_sweep: Option<String>,
    /// Continuation with forcing t·λ₀, given as `lambda0=X`
    #[arg(long, group = "mode", value_name = "lambda0=X")]
    homotopy: Option<String>,
    /// Radial log-critical sweep over comma-separated α
    #[arg(long, group = "mode", value_delimiter = ',')]
    alpha_sweep: Option<Vec<f64>>,
    /// Ray probe on the sphere of this radius
    #[arg(long, group = "mode")]
    probe: Option<f64>,
    /// Dimension of the α-sweep
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    max_outer: Option<usize>,
}

#[derive(Args)]
struct RadialArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    f: Option<NonlinearitySpec>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long = "N")]
    n: Option<usize>,
    /// Ball radius
    #[arg(long = "R")]
    radius: Option<f64>,
    /// Profile file name inside the run directory
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    f: Option<NonlinearitySpec>,
    #[arg(long, value_delimiter = ',')]
    p_values: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    h_values: Option<Vec<f64>>,
    #[arg(long)]
    domain: Option<DomainSpec>,
    #[arg(long)]
    max_iter: Option<usize>,
}

/// Collects flag overrides on top of the config-file table.
struct Overlay {
    table: toml::Table,
    had_file: bool,
}

impl Overlay {
    fn new(path: Option<&PathBuf>) -> Result<Self, CliError> {
        Ok(Overlay { table: load_table(path.map(|p| p.as_path()))?, had_file: path.is_some() })
    }

    fn set<T: Serialize>(&mut self, path: &[&str], value: &Option<T>) -> Result<&mut Self, CliError> {
        if let Some(v) = value {
            set_path(&mut self.table, path, to_value(v)?)?;
        }
        Ok(self)
    }

    fn finish(self, command: &str) -> Result<RunConfig, CliError> {
        resolve_for(command, self.table, self.had_file)
    }
}

fn parse_lambda_sweep(text: &str) -> Result<toml::Value, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || CliError::Config(format!("--lambda-sweep expects FROM:TO:COUNT, got `{text}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let from: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let to: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: i64 = parts[2].trim().parse().map_err(|_| bad())?;
    let mut t = toml::Table::new();
    t.insert("kind".into(), "lambda-sweep".into());
    t.insert("from".into(), from.into());
    t.insert("to".into(), to.into());
    t.insert("count".into(), count.into());
    Ok(toml::Value::Table(t))
}

fn parse_homotopy(text: &str) -> Result<toml::Value, CliError> {
    let value = text
        .split_once('=')
        .filter(|(k, _)| k.trim() == "lambda0")
        .and_then(|(_, v)| v.trim().parse::<f64>().ok())
        .ok_or_else(|| CliError::Config(format!("--homotopy expects lambda0=X, got `{text}`")))?;
    let mut t = toml::Table::new();
    t.insert("kind".into(), "homotopy".into());
    t.insert("lambda0".into(), value.into());
    Ok(toml::Value::Table(t))
}

impl Command {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        match self {
            Command::Run { config } => resolve(load_table(Some(config))?),
            Command::Solve(a) => {
                let mut o = Overlay::new(a.config.as_ref())?;
                o.set(&["f"], &a.f)?
                    .set(&["p"], &a.p)?
                    .set(&["domain"], &a.domain)?
                    .set(&["h"], &a.h)?
                    .set(&["checks"], &a.checks)?
                    .set(&["homotopy", "solver", "max_iter"], &a.max_iter.map(|x| x as i64))?
                    .set(&["homotopy", "max_outer"], &a.max_outer.map(|x| x as i64))?
                    .set(&["gates", "seed"], &a.seed.map(|x| x as i64))?
                    .set(&["mesh_out"], &a.mesh_out)?;
                o.finish("solve")
            }
            Command::Eigen(a) => {
                let mut o = Overlay::new(a.config.as_ref())?;
                o.set(&["p"], &a.p)?.set(&["domain"], &a.domain)?.set(&["h"], &a.h)?.set(&["tol"], &a.tol)?;
                o.finish("eigen")
            }
            Command::VerifyIdentities(a) => {
                let mut o = Overlay::new(a.config.as_ref())?;
                o.set(&["solution"], &a.solution)?
                    .set(&["checks"], &a.checks)?
                    .set(&["gates", "seed"], &a.seed.map(|x| x as i64))?;
                o.finish("verify-identities")
            }
            Command::CheckHypotheses(a) => {
                let mut o = Overlay::new(a.config.as_ref())?;
                o.set(&["f"], &a.f)?
                    .set(&["p"], &a.p)?
                    .set(&["n"], &a.n.map(|x| x as i64))?
                    .set(&["lambda1"], &a.lambda1)?;
                o.finish("check-hypotheses")
            }
            Command::Exist(a) => {
                let mut o = Overlay::new(a.config.as_ref())?;
                o.set(&["f"], &a.f)?
                    .set(&["p"], &a.p)?
                    .set(&["domain"], &a.domain)?
                    .set(&["h"], &a.h)?
                    .set(&["homotopy", "solver", "max_iter"], &a.max_iter.map(|x| x as i64))?
                    .set(&["homotopy", "max_outer"], &a.max_outer.map(|x| x as i64))?;
                let mode = if let Some(s) = &a.lambda_sweep {
                    Some(parse_lambda_sweep(s)?)
                } else if let Some(s) = &a.homotopy {
                    Some(parse_homotopy(s)?)
                } else if let Some(alphas) = &a.alpha_sweep {
                    let mut t = toml::Table::new();
                    t.insert("kind".into(), "alpha-sweep".into());
                    t.insert("alphas".into(), to_value(alphas)?);
                    t.insert("n".into(), (a.n.unwrap_or(3) as i64).into());
                    Some(toml::Value::Table(t))
                } else if let Some(r) = a.probe {
                    let mut t = toml::Table::new();
                    t.insert("kind".into(), "probe".into());
                    t.insert("r".into(), r.into());
                    Some(toml::Value::Table(t))
                } else {
                    None
                };
                if a.n.is_some() && a.alpha_sweep.is_none() {
                    return Err(CliError::Config("--N only applies to --alpha-sweep".into()));
                }
                o.set(&["mode"], &mode)?;
                o.finish("exist")
            }
            Command::OracleRadial(a) => {
                let mut o = Overlay::new(a.config.as_ref())?;
                o.set(&["f"], &a.f)?
                    .set(&["p"], &a.p)?
                    .set(&["n"], &a.n.map(|x| x as i64))?
                    .set(&["radius"], &a.radius)?
                    .set(&["out"], &a.out)?;
                o.finish("oracle-radial")
            }
            Command::Sweep(a) => {
                let mut o = Overlay::new(a.config.as_ref())?;
                o.set(&["f"], &a.f)?
                    .set(&["p_values"], &a.p_values)?
                    .set(&["h_values"], &a.h_values)?
                    .set(&["domain"], &a.domain)?
                    .set(&["homotopy", "solver", "max_iter"], &a.max_iter.map(|x| x as i64))?;
                o.finish("sweep")
            }
        }
    }
}

/// Honour `PLAPD_THREADS`; returns the size of the worker pool.
fn configure_threads() -> Result<usize, CliError> {
    if let Ok(text) = std::env::var("PLAPD_THREADS") {
        let n: usize = text
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("PLAPD_THREADS must be a positive integer, got `{text}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot size thread pool: {e}")))?;
    }
    Ok(rayon::current_num_threads())
}

fn real_main() -> i32 {
    let cli = Cli::parse();
    let threads = match configure_threads() {
        Ok(n) => n,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cfg = match cli.command.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let started_utc = chrono::Utc::now().to_rfc3339();
    let clock = Instant::now();
    let mut dir = match RunDir::create(cli.out_dir.as_deref()) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAILED;
        }
    };
    let prepared = cfg.to_toml().and_then(|text| {
        dir.write_text("config.toml", &text)?;
        Ok(text)
    });
    let config_text = match prepared {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };

    let (outcome, error) = match commands::execute(&cfg, &mut dir) {
        Ok(o) => (o, None),
        Err(e) => {
            let mut o = Outcome::new();
            o.ok = false;
            (o, Some(e))
        }
    };
    let exit_code = match &error {
        Some(e) => e.exit_code(),
        None if outcome.ok => 0,
        None => EXIT_FAILED,
    };
    let status = match (&error, exit_code) {
        (Some(_), _) => "error",
        (None, 0) => "ok",
        _ => "failed",
    };
    let manifest = RunManifest {
        command: cfg.command().to_string(),
        config: serde_json::to_value(&cfg).unwrap_or(serde_json::Value::Null),
        config_sha256: sha256_hex(config_text.as_bytes()),
        versions: Versions::default(),
        mesh: outcome.meshes,
        outputs: dir.outputs().to_vec(),
        started_utc,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        threads,
        seed: outcome.seed,
        checks: outcome.checks,
        status: status.to_string(),
        exit_code,
        error: error.as_ref().map(|e| e.to_string()),
    };
    if let Err(e) = dir.write_json("manifest.json", &manifest) {
        eprintln!("error: cannot write manifest: {e}");
        return EXIT_FAILED.max(exit_code);
    }
    if let Some(e) = &error {
        eprintln!("error: {e}");
    }
    for (name, s) in &manifest.checks {
        println!("{name}: {s}");
    }
    println!("{status}: {}", dir.root().display());
    debug_assert!(exit_code == 0 || exit_code == EXIT_FAILED || exit_code == EXIT_SCHEMA);
    exit_code
}

fn main() {
    std::process::exit(real_main());
}
