//! Run configurations and their on-disk artifacts.
//!
//! A [`RunConfig`] names one of four commands. Every float in an emitted JSON
//! file carries 17 significant digits and no payload contains timestamps, so
//! reruns with the same configuration are byte-identical.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{scaling_report, ConvergenceReport};
use crate::error::{Error, Result};
use crate::io::write_json;
use crate::minimizer::{self, GroundState, GroundStateSummary, SolverConfig};
use crate::oracle::{projected_gradient_minimum, OracleConfig};
use crate::potentials::PotentialSpec;
use crate::thomas_fermi::{energy_limit_constant, TfProfile};
use crate::verify::{oracle_check, sweep_checks, tf_checks, Check};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Tf,
    Solve,
    Sweep,
    Verify,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<f64>,
    #[serde(rename = "Ns", default, skip_serializing_if = "Vec::is_empty")]
    pub ns: Vec<f64>,
    /// Layer parameter; defaults to `σ/2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        match self.command {
            Command::Tf => {}
            Command::Solve => match self.n {
                Some(n) if n > 0.0 && n.is_finite() => {}
                Some(n) => return Err(Error::Config(format!("N must be positive, got {n}"))),
                None => return Err(Error::Config("solve needs N".into())),
            },
            Command::Sweep | Command::Verify => {
                let needed = if self.command == Command::Verify { 3 } else { 1 };
                if self.ns.len() < needed {
                    return Err(Error::Config(format!(
                        "{:?} needs at least {needed} values in Ns",
                        self.command
                    )));
                }
                if self.ns.iter().any(|n| !(*n > 0.0 && n.is_finite()))
                    || self.ns.windows(2).any(|w| !(w[1] > w[0]))
                {
                    return Err(Error::Config("Ns must be positive and strictly increasing".into()));
                }
            }
        }
        if let Some(eps) = self.epsilon {
            let max = self.potential.sigma() / 2.0;
            if !(eps > 0.0 && eps <= max) {
                return Err(Error::Config(format!("epsilon must lie in (0, {max}], got {eps}")));
            }
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(self.potential.sigma() / 2.0)
    }

    fn profile(&self) -> Result<TfProfile> {
        let t = self.potential.tail();
        TfProfile::new(self.solver.grid.d, t.p, t.c0)
    }
}

/// Closed-form Thomas-Fermi constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TfTable {
    pub d: u32,
    pub p: f64,
    #[serde(rename = "C0")]
    pub c0: f64,
    pub mu_tf: f64,
    pub radius: f64,
    pub quintic_norm: f64,
    pub weighted_mass: f64,
    pub e_tf: f64,
    pub limit_constant: f64,
}

pub fn tf_table(d: u32, p: f64, c0: f64) -> Result<TfTable> {
    let profile = TfProfile::new(d, p, c0)?;
    let ints = profile.integrals()?;
    Ok(TfTable {
        d,
        p,
        c0,
        mu_tf: profile.mu_tf,
        radius: profile.radius,
        quintic_norm: ints.quintic_norm,
        weighted_mass: ints.weighted_mass,
        e_tf: ints.tf_energy,
        limit_constant: energy_limit_constant(d, p, c0)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub files: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub report: ConvergenceReport,
    pub checks: Vec<Check>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    /// Human-readable summary for standard output.
    pub summary: String,
    /// False when a verification check failed.
    pub passed: bool,
}

/// Process exit code for a failed run.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NonConvergence { .. } | Error::Instability { .. } => 3,
        Error::Sweep { source, .. } => exit_code(source),
        Error::Io(_) => 1,
        _ => 2,
    }
}

struct Emitter {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Emitter {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Emitter {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.dir.join(name);
        write_json(&path, value)?;
        self.files.push(path);
        Ok(())
    }

    fn with_writer(&mut self, name: &str, f: impl FnOnce(BufWriter<File>) -> Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        f(BufWriter::new(File::create(&path)?))?;
        self.files.push(path);
        Ok(())
    }

    fn state(&mut self, stem: &str, state: &GroundState, p: f64) -> Result<()> {
        let summary: GroundStateSummary = state.summary(p);
        self.json(&format!("{stem}.json"), &summary)?;
        self.with_writer(&format!("field{}.csv", stem.trim_start_matches("ground_state")), |w| {
            state.write_field_csv(w)
        })
    }

    fn manifest(&mut self, config: &RunConfig) -> Result<()> {
        let files = self
            .files
            .iter()
            .filter_map(|p| p.file_name())
            .map(|n| n.to_string_lossy().into_owned())
            .collect();
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            files,
        };
        self.json("manifest.json", &manifest)
    }
}

fn state_stem(index: usize) -> String {
    format!("ground_state_{index:03}")
}

/// Execute `config`, writing its artifacts under `config.output_dir`.
///
/// Solver failures write the partial state before the error is returned.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let mut out = Emitter::new(&config.output_dir)?;
    let p = config.potential.tail().p;
    match config.command {
        Command::Tf => {
            let t = config.potential.tail();
            let table = tf_table(config.solver.grid.d, t.p, t.c0)?;
            out.json("tf.json", &table)?;
            let summary = format!(
                "mu_tf = {:.10}, radius = {:.10}, e_tf = {:.10}, limit constant = {:.10}",
                table.mu_tf, table.radius, table.e_tf, table.limit_constant
            );
            Ok(RunOutcome {
                files: out.files,
                summary,
                passed: true,
            })
        }
        Command::Solve => {
            let n = config.n.expect("validated");
            match minimizer::solve_ground_state(&config.solver, &config.potential, n) {
                Ok(state) => {
                    out.state("ground_state", &state, p)?;
                    Ok(RunOutcome {
                        files: out.files,
                        summary: solve_line(&state),
                        passed: true,
                    })
                }
                Err(e) => {
                    if let Some(partial) = e.partial_state() {
                        out.state("ground_state", partial, p)?;
                    }
                    Err(e)
                }
            }
        }
        Command::Sweep => {
            let states = run_sweep(config, &mut out)?;
            out.manifest(config)?;
            Ok(RunOutcome {
                files: out.files,
                summary: states.iter().map(solve_line).collect::<Vec<_>>().join("\n"),
                passed: true,
            })
        }
        Command::Verify => verify(config, out),
    }
}

fn solve_line(s: &GroundState) -> String {
    format!(
        "N = {:e}: tau = {:.6e}, e_tau = {:.12}, mu_tau = {:.12}, iterations = {}, residuals = {:.2e} / {:.2e}",
        s.n, s.tau, s.e_tau, s.mu_tau, s.iterations, s.el_residual, s.pohozaev_residual
    )
}

fn run_sweep(config: &RunConfig, out: &mut Emitter) -> Result<Vec<GroundState>> {
    let p = config.potential.tail().p;
    match minimizer::sweep(&config.solver, &config.potential, &config.ns, config.workers) {
        Ok(states) => {
            for (i, s) in states.iter().enumerate() {
                out.state(&state_stem(i), s, p)?;
            }
            Ok(states)
        }
        Err(e) => {
            if let (Error::Sweep { index, .. }, Some(partial)) = (&e, e.partial_state()) {
                out.state(&state_stem(*index), partial, p)?;
                out.manifest(config)?;
            }
            Err(e)
        }
    }
}

/// Grid size and mass of the direct-minimization comparison.
pub const ORACLE_GRID_NODES: usize = 64;
pub const ORACLE_MASS: f64 = 100.0;

fn verify(config: &RunConfig, mut out: Emitter) -> Result<RunOutcome> {
    let profile = config.profile()?;
    let states = run_sweep(config, &mut out)?;
    let report = scaling_report(&states, &profile, &config.potential, config.epsilon())?;
    let mut checks = tf_checks(&profile);
    checks.extend(sweep_checks(&report, &states)?);

    let mut small = config.solver;
    small.grid.n = ORACLE_GRID_NODES;
    let flow = minimizer::solve_ground_state(&small, &config.potential, ORACLE_MASS)?;
    let oracle_cfg = OracleConfig {
        seed: config.seed,
        ..OracleConfig::default()
    };
    let direct = projected_gradient_minimum(
        flow.field_w.grid(),
        &config.potential,
        flow.tau,
        small.kappa,
        &oracle_cfg,
    )?;
    checks.push(oracle_check(flow.e_tau, direct.energy));

    let passed = checks.iter().all(|c| c.passed);
    out.json(
        "report.json",
        &VerifyReport {
            report: report.clone(),
            checks: checks.clone(),
            passed,
        },
    )?;
    out.with_writer("report.csv", |w| report.write_csv(w))?;
    out.manifest(config)?;
    let summary = checks
        .iter()
        .map(|c| format!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail))
        .collect::<Vec<_>>()
        .join("\n");
    Ok(RunOutcome {
        files: out.files,
        summary,
        passed,
    })
}
