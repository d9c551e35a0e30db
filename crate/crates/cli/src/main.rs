use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cqtf::minimizer::{Kappa, SolverConfig};
use cqtf::potentials::{PotentialRecord, PotentialSpec};
use cqtf::run::{exit_code, run, Command, RunConfig};
use cqtf::Error;

/// Ground states of the cubic-quintic Schrödinger energy in a trap and their
/// Thomas-Fermi limit.
#[derive(Parser, Debug)]
#[command(name = "cqtf", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Closed-form Thomas-Fermi constants.
    Tf(Opts),
    /// One ground state at mass N.
    Solve(Opts),
    /// Ground states for an increasing list of masses.
    Sweep(Opts),
    /// Sweep, compare with the large-N asymptotics, and fail on any check.
    Verify(Opts),
}

#[derive(Args, Debug, Default)]
#[command(rename_all = "verbatim")]
struct Opts {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    d: Option<u32>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long = "C0")]
    c0: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "C1")]
    c1: Option<f64>,
    #[arg(long = "C2")]
    c2: Option<f64>,
    /// Sign of the cubic term, 1 or -1.
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<i8>,
    #[arg(long = "N", allow_negative_numbers = true)]
    n: Option<f64>,
    /// Comma-separated, increasing.
    #[arg(long = "Ns", value_delimiter = ',')]
    ns: Option<Vec<f64>>,
    #[arg(long = "grid-n")]
    grid_n: Option<usize>,
    #[arg(long)]
    rmax: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Euler-Lagrange residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

fn build_config(command: Command, o: Opts) -> Result<RunConfig, Error> {
    let mut cfg = match &o.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str::<RunConfig>(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => RunConfig {
            command,
            potential: PotentialSpec::pure_power(1.0, 2.0)?,
            solver: SolverConfig::default(),
            n: None,
            ns: Vec::new(),
            epsilon: None,
            output_dir: PathBuf::from("cqtf-out"),
            seed: 0,
            workers: None,
        },
    };
    cfg.command = command;

    if o.p.is_some() || o.c0.is_some() || o.alpha.is_some() || o.c1.is_some() || o.c2.is_some() {
        let mut rec = PotentialRecord::from(cfg.potential.clone());
        rec.p = o.p.unwrap_or(rec.p);
        rec.c0 = o.c0.unwrap_or(rec.c0);
        rec.alpha = o.alpha.unwrap_or(rec.alpha);
        rec.c1 = o.c1.unwrap_or(rec.c1);
        rec.c2 = o.c2.unwrap_or(rec.c2);
        cfg.potential = PotentialSpec::try_from(rec)?;
    }
    let s = &mut cfg.solver;
    if let Some(d) = o.d {
        s.grid.d = d;
    }
    if let Some(k) = o.kappa {
        s.kappa = Kappa::try_from(k).map_err(Error::Config)?;
    }
    if let Some(n) = o.grid_n {
        s.grid.n = n;
    }
    if let Some(r) = o.rmax {
        s.grid.r_max = Some(r);
    }
    if let Some(dt) = o.dt {
        s.dt = dt;
    }
    if let Some(t) = o.tol {
        s.tol_residual = t;
    }
    if let Some(n) = o.n {
        cfg.n = Some(n);
    }
    if let Some(ns) = o.ns {
        cfg.ns = ns;
    }
    if let Some(e) = o.epsilon {
        cfg.epsilon = Some(e);
    }
    if let Some(w) = o.workers {
        cfg.workers = Some(w);
    }
    if let Some(out) = o.out {
        cfg.output_dir = out;
    }
    if let Some(seed) = o.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, opts) = match cli.command {
        Cmd::Tf(o) => (Command::Tf, o),
        Cmd::Solve(o) => (Command::Solve, o),
        Cmd::Sweep(o) => (Command::Sweep, o),
        Cmd::Verify(o) => (Command::Verify, o),
    };
    let result = build_config(command, opts).and_then(|cfg| run(&cfg));
    match result {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
