//! Ground states of the rescaled constrained problem.
//!
//! With `τ = N^{-2/(2d+p)}` and `w(x) = τ^{-d/2} φ(x/τ)` the mass-`N` problem
//! becomes the minimization of
//!
//! ```text
//! I_τ(u) = τ^{p+2}/2 ∫|∇u|² + τ^p/2 ∫V(x/τ)u² + κτ^{p/2}/4 ∫u⁴ + 1/6 ∫u⁶
//! ```
//!
//! over `∫u² = 1`, and `E(N) = τ^{-p} e(τ)`. The support of the minimizer
//! stays of order one for every `N`, so a single grid serves a whole sweep.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{RadialField, RadialGrid};
use crate::potentials::PotentialSpec;
use crate::thomas_fermi::mu_tf;

mod flow;

pub use flow::{BACKTRACK_TOL, FLOOR};
use flow::{Discretization, FlowOutcome, FlowParams};

/// Sign of the cubic term: `+1` defocusing, `-1` focusing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Kappa {
    Defocusing,
    Focusing,
}

impl Kappa {
    pub fn value(self) -> f64 {
        match self {
            Kappa::Defocusing => 1.0,
            Kappa::Focusing => -1.0,
        }
    }
}

impl TryFrom<i8> for Kappa {
    type Error = String;

    fn try_from(k: i8) -> std::result::Result<Self, String> {
        match k {
            1 => Ok(Kappa::Defocusing),
            -1 => Ok(Kappa::Focusing),
            _ => Err(format!("kappa must be +1 or -1, got {k}")),
        }
    }
}

impl From<Kappa> for i8 {
    fn from(k: Kappa) -> i8 {
        match k {
            Kappa::Defocusing => 1,
            Kappa::Focusing => -1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Init {
    SmoothedTF,
    Gaussian,
    WarmStart,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    pub d: u32,
    pub n: usize,
    /// Defaults to twice the Thomas-Fermi radius plus one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub kappa: Kappa,
    pub dt: f64,
    pub tol_energy: f64,
    pub tol_residual: f64,
    pub max_iter: usize,
    pub grid: GridParams,
    pub init: Init,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            kappa: Kappa::Defocusing,
            dt: 1.0,
            tol_energy: 1e-10,
            tol_residual: 1e-6,
            max_iter: 1_000_000,
            grid: GridParams {
                d: 1,
                n: 2048,
                r_max: None,
            },
            init: Init::SmoothedTF,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.dt) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !positive(self.tol_energy) || !positive(self.tol_residual) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if let Some(r) = self.grid.r_max {
            if !positive(r) {
                return Err(Error::Config(format!("r_max must be positive, got {r}")));
            }
        }
        Ok(())
    }
}

/// The four terms of `I_τ`; `quartic` excludes the sign `κ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyParts {
    pub kinetic: f64,
    pub potential: f64,
    pub quartic: f64,
    pub quintic: f64,
}

impl EnergyParts {
    pub fn total(&self, kappa: f64) -> f64 {
        self.kinetic + self.potential + kappa * self.quartic + self.quintic
    }
}

/// Bookkeeping over the accepted steps of a flow run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FlowTrace {
    pub accepted: usize,
    pub rejected: usize,
    /// Largest `|∫u² - 1|` after an accepted step.
    pub max_mass_defect: f64,
    /// Largest relative energy increase over an accepted step.
    pub max_energy_increase: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundState {
    pub n: f64,
    pub tau: f64,
    pub kappa: Kappa,
    pub field_w: RadialField,
    pub mu_tau: f64,
    pub energy_parts: EnergyParts,
    pub e_tau: f64,
    pub iterations: usize,
    pub el_residual: f64,
    pub pohozaev_residual: f64,
    pub tol_residual: f64,
    pub trace: FlowTrace,
}

/// JSON summary of a [`GroundState`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundStateSummary {
    #[serde(rename = "N")]
    pub n: f64,
    pub tau: f64,
    pub kappa: Kappa,
    pub d: u32,
    pub grid_n: usize,
    pub r_max: f64,
    pub mass: f64,
    pub energy_parts: EnergyParts,
    pub e_tau: f64,
    /// `E(N) = τ^{-p} e(τ)`
    pub unscaled_energy: f64,
    pub mu_tau: f64,
    pub el_residual: f64,
    pub pohozaev_residual: f64,
    pub iterations: usize,
    pub trace: FlowTrace,
}

impl GroundState {
    pub fn mass(&self) -> f64 {
        self.field_w.integrate(2, 0.0)
    }

    pub fn d(&self) -> u32 {
        self.field_w.grid().d()
    }

    /// `E(N) = τ^{-p} e(τ)`, given the trap power `p`.
    pub fn unscaled_energy(&self, p: f64) -> f64 {
        self.e_tau / self.tau.powf(p)
    }

    pub fn summary(&self, p: f64) -> GroundStateSummary {
        let g = self.field_w.grid();
        GroundStateSummary {
            n: self.n,
            tau: self.tau,
            kappa: self.kappa,
            d: g.d(),
            grid_n: g.len(),
            r_max: g.r_max(),
            mass: self.mass(),
            energy_parts: self.energy_parts,
            e_tau: self.e_tau,
            unscaled_energy: self.unscaled_energy(p),
            mu_tau: self.mu_tau,
            el_residual: self.el_residual,
            pohozaev_residual: self.pohozaev_residual,
            iterations: self.iterations,
            trace: self.trace,
        }
    }

    /// CSV dump of `(r, w)`.
    pub fn write_field_csv<W: Write>(&self, out: W) -> Result<()> {
        self.field_w.write_csv(out)
    }
}

pub fn tau_of(n: f64, d: u32, p: f64) -> f64 {
    n.powf(-2.0 / (2.0 * f64::from(d) + p))
}

pub fn energy_breakdown(
    field: &RadialField,
    tau: f64,
    spec: &PotentialSpec,
    kappa: Kappa,
) -> Result<EnergyParts> {
    let disc = Discretization::new(field.grid(), spec, tau, kappa.value())?;
    Ok(disc.energy(field.values()))
}

/// `μ_τ = 2e(τ) + κτ^{p/2}/2 ∫w⁴ + 2/3 ∫w⁶`, checked against the Rayleigh
/// quotient of the discrete Euler-Lagrange operator.
pub fn lagrange_multiplier(state: &GroundState, spec: &PotentialSpec) -> Result<f64> {
    let k = state.kappa.value();
    let disc = Discretization::new(state.field_w.grid(), spec, state.tau, k)?;
    let parts = disc.energy(state.field_w.values());
    let mu = multiplier_formula(&parts, k);
    let rayleigh = disc.rayleigh(state.field_w.values());
    if (mu - rayleigh).abs() > 10.0 * state.tol_residual * mu.abs().max(1.0) {
        return Err(Error::Consistency {
            what: "multiplier formula vs Rayleigh quotient",
            lhs: mu,
            rhs: rayleigh,
        });
    }
    Ok(mu)
}

fn multiplier_formula(parts: &EnergyParts, kappa: f64) -> f64 {
    // κτ^{p/2}/2 ∫w⁴ = 2κ·quartic, 2/3 ∫w⁶ = 4·quintic
    2.0 * parts.total(kappa) + 2.0 * kappa * parts.quartic + 4.0 * parts.quintic
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub el_residual: f64,
    pub pohozaev_residual: f64,
}

/// Euler-Lagrange and Pohozaev residuals of `state`.
pub fn residuals(state: &GroundState, spec: &PotentialSpec) -> Result<Residuals> {
    field_residuals(&state.field_w, state.tau, spec, state.kappa, state.mu_tau)
}

/// Residuals of an arbitrary field with multiplier `mu`.
pub fn field_residuals(
    field: &RadialField,
    tau: f64,
    spec: &PotentialSpec,
    kappa: Kappa,
    mu: f64,
) -> Result<Residuals> {
    let k = kappa.value();
    let disc = Discretization::new(field.grid(), spec, tau, k)?;
    let el_residual = disc.el_residual(field.values(), mu);
    Ok(Residuals {
        el_residual,
        pohozaev_residual: pohozaev_residual(field, tau, spec, kappa)?,
    })
}

/// `|A + B - C + D| / max(|A|, |B|, |C|, |D|)` for the virial identity
/// `τ^{p+2}∫|∇w|² + κτ^{p/2}(d/4)∫w⁴ = (τ^p/2)∫(∇V·x)(x/τ)w² - (d/3)∫w⁶`.
pub fn pohozaev_residual(
    field: &RadialField,
    tau: f64,
    spec: &PotentialSpec,
    kappa: Kappa,
) -> Result<f64> {
    let grid = field.grid();
    let d = f64::from(grid.d());
    let parts = energy_breakdown(field, tau, spec, kappa)?;
    let mut virial = 0.0;
    for (j, w) in field.values().iter().enumerate() {
        virial += grid.weight(j) * spec.rescaled_virial(grid.node(j), tau)? * w * w;
    }
    let a = 2.0 * parts.kinetic;
    let b = kappa.value() * d * parts.quartic;
    let c = 0.5 * virial;
    let dd = 2.0 * d * parts.quintic;
    let scale = [a, b, c, dd].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok((a + b - c + dd).abs() / scale)
}

/// The original-variable field `φ_N(r) = τ^{d/2} w(τ r)` on the grid
/// stretched by `1/τ`.
pub fn rescale(state: &GroundState) -> RadialField {
    let g = state.field_w.grid();
    let grid = g
        .scaled(1.0 / state.tau)
        .expect("stretching a valid grid by a positive factor stays valid");
    let s = state.tau.powf(0.5 * f64::from(g.d()));
    RadialField::new(grid, state.field_w.values().iter().map(|w| s * w).collect())
        .expect("scaled finite values stay finite")
}

/// Solve for the ground state at mass `n`.
pub fn solve_ground_state(config: &SolverConfig, spec: &PotentialSpec, n: f64) -> Result<GroundState> {
    solve_from(config, spec, n, None)
}

/// As [`solve_ground_state`], starting from `initial` when the configuration
/// asks for a warm start.
pub fn solve_from(
    config: &SolverConfig,
    spec: &PotentialSpec,
    n: f64,
    initial: Option<&RadialField>,
) -> Result<GroundState> {
    config.validate()?;
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::domain(format!("N must be positive, got {n}")));
    }
    let grid = rescaled_grid(config, spec)?;
    let tau = tau_of(n, grid.d(), spec.tail().p);
    let kappa = config.kappa.value();
    let disc = Discretization::new(&grid, spec, tau, kappa)?;
    let mut u = initial_field(config, spec, &grid, initial)?;
    flow::prepare_initial(&disc, &mut u);
    let params = FlowParams {
        dt: config.dt,
        tol_energy: config.tol_energy,
        tol_residual: config.tol_residual,
        max_iter: config.max_iter,
        check_every: 10,
    };
    let result = flow::run_flow(&disc, &mut u, &params);
    let state = assemble(config, spec, &disc, n, tau, u, result.iterations, result.trace)?;
    match result.outcome {
        FlowOutcome::Converged => Ok(state),
        FlowOutcome::MaxIter => Err(Error::NonConvergence {
            iterations: result.iterations,
            residual: result.residual,
            partial: Box::new(state),
        }),
        FlowOutcome::Unstable => Err(Error::Instability {
            iteration: result.iterations,
            partial: Box::new(state),
        }),
    }
}

/// The rescaled computational grid of a solve.
pub fn rescaled_grid(config: &SolverConfig, spec: &PotentialSpec) -> Result<RadialGrid> {
    let d = config.grid.d;
    let t = spec.tail();
    let r_max = match config.grid.r_max {
        Some(r) => r,
        None => 2.0 * (mu_tf(d, t.p, t.c0)? / t.c0).powf(1.0 / t.p) + 1.0,
    };
    RadialGrid::new(d, config.grid.n, r_max)
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    config: &SolverConfig,
    spec: &PotentialSpec,
    disc: &Discretization,
    n: f64,
    tau: f64,
    u: Vec<f64>,
    iterations: usize,
    trace: FlowTrace,
) -> Result<GroundState> {
    let field_w = RadialField::new(disc.grid, u)?;
    let parts = disc.energy(field_w.values());
    let kappa = disc.kappa;
    let mu_tau = multiplier_formula(&parts, kappa);
    let res = field_residuals(&field_w, tau, spec, config.kappa, mu_tau)?;
    Ok(GroundState {
        n,
        tau,
        kappa: config.kappa,
        field_w,
        mu_tau,
        energy_parts: parts,
        e_tau: parts.total(kappa),
        iterations,
        el_residual: res.el_residual,
        pohozaev_residual: res.pohozaev_residual,
        tol_residual: config.tol_residual,
        trace,
    })
}

fn initial_field(
    config: &SolverConfig,
    spec: &PotentialSpec,
    grid: &RadialGrid,
    warm: Option<&RadialField>,
) -> Result<Vec<f64>> {
    let t = spec.tail();
    let mu = mu_tf(grid.d(), t.p, t.c0)?;
    let radius = (mu / t.c0).powf(1.0 / t.p);
    let smoothed = || -> Vec<f64> {
        grid.nodes()
            .map(|r| (mu - t.c0 * r.powf(t.p)).max(1e-3).powf(0.25))
            .collect()
    };
    Ok(match (config.init, warm) {
        (Init::SmoothedTF, _) | (Init::WarmStart, None) => smoothed(),
        (Init::Gaussian, _) => grid.nodes().map(|r| (-(r / radius).powi(2)).exp()).collect(),
        (Init::WarmStart, Some(prev)) => {
            if prev.grid() == grid {
                prev.values().to_vec()
            } else {
                grid.nodes().map(|r| interpolate(prev, r)).collect()
            }
        }
    })
}

fn interpolate(field: &RadialField, r: f64) -> f64 {
    let g = field.grid();
    if r >= g.r_max() {
        return 0.0;
    }
    let x = r / g.spacing();
    let j = (x.floor() as usize).min(g.len() - 2);
    let t = x - j as f64;
    let v = field.values();
    (1.0 - t) * v[j] + t * v[j + 1]
}

/// One ground state per entry of the increasing list `ns`.
///
/// Solves run in parallel on up to `workers` threads unless the
/// configuration asks for warm starts, which chain the solves in order.
pub fn sweep(
    config: &SolverConfig,
    spec: &PotentialSpec,
    ns: &[f64],
    workers: Option<usize>,
) -> Result<Vec<GroundState>> {
    if ns.is_empty() {
        return Err(Error::Arity { needed: 1, got: 0 });
    }
    if ns.iter().any(|n| !(*n > 0.0 && n.is_finite())) || ns.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("Ns must be positive and strictly increasing".into()));
    }
    let wrap = |index: usize, n: f64| move |e: Error| Error::Sweep {
        index,
        n,
        source: Box::new(e),
    };
    if config.init == Init::WarmStart {
        let mut out: Vec<GroundState> = Vec::with_capacity(ns.len());
        for (i, &n) in ns.iter().enumerate() {
            let prev = out.last().map(|s| &s.field_w);
            out.push(solve_from(config, spec, n, prev).map_err(wrap(i, n))?);
        }
        return Ok(out);
    }
    let solve_all = || {
        ns.par_iter()
            .enumerate()
            .map(|(i, &n)| solve_ground_state(config, spec, n).map_err(wrap(i, n)))
            .collect::<Result<Vec<_>>>()
    };
    match workers {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?
            .install(solve_all),
        None => solve_all(),
    }
}
