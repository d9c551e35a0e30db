//! Discrete energy, operator and the normalized gradient flow.

use crate::error::Result;
use crate::grid::RadialGrid;
use crate::potentials::PotentialSpec;

use super::{EnergyParts, FlowTrace};

/// Values below this are flushed to zero to keep the far tail out of the
/// subnormal range.
pub const FLOOR: f64 = 1e-200;

/// Relative energy increase tolerated on an accepted step.
pub const BACKTRACK_TOL: f64 = 1e-12;

const MAX_HALVINGS: u32 = 10;

/// Precomputed discretization of `I_τ` on a grid.
pub(crate) struct Discretization {
    pub grid: RadialGrid,
    pub m: Vec<f64>,
    pub c: Vec<f64>,
    pub v: Vec<f64>,
    /// `τ^{p+2}`
    pub a: f64,
    /// `τ^{p/2}`
    pub cubic: f64,
    pub kappa: f64,
}

impl Discretization {
    pub fn new(grid: &RadialGrid, spec: &PotentialSpec, tau: f64, kappa: f64) -> Result<Self> {
        let p = spec.tail().p;
        let n = grid.len();
        let v = grid
            .nodes()
            .map(|r| spec.rescaled(r, tau))
            .collect::<Result<Vec<_>>>()?;
        Ok(Discretization {
            grid: *grid,
            m: grid.weights(),
            c: (0..n - 1).map(|j| grid.conductance(j)).collect(),
            v,
            a: tau.powf(p + 2.0),
            cubic: tau.powf(0.5 * p),
            kappa,
        })
    }

    pub fn mass(&self, u: &[f64]) -> f64 {
        self.m.iter().zip(u).map(|(m, x)| m * x * x).sum()
    }

    pub fn energy(&self, u: &[f64]) -> EnergyParts {
        let grad: f64 = self
            .c
            .iter()
            .zip(u.windows(2))
            .map(|(c, w)| c * (w[1] - w[0]).powi(2))
            .sum();
        let (mut pot, mut q4, mut q6) = (0.0, 0.0, 0.0);
        for j in 0..u.len() {
            let u2 = u[j] * u[j];
            pot += self.m[j] * self.v[j] * u2;
            q4 += self.m[j] * u2 * u2;
            q6 += self.m[j] * u2 * u2 * u2;
        }
        EnergyParts {
            kinetic: 0.5 * self.a * grad,
            potential: 0.5 * pot,
            quartic: 0.25 * self.cubic * q4,
            quintic: q6 / 6.0,
        }
    }

    /// `m_j (H u)_j` where `H = -τ^{p+2}Δ + V_τ + κτ^{p/2}u² + u⁴`; the
    /// Dirichlet node is left at zero.
    pub fn apply_weighted(&self, u: &[f64], out: &mut [f64]) {
        let n = u.len();
        let b = self.kappa * self.cubic;
        for j in 0..n - 1 {
            let right = self.c[j] * (u[j + 1] - u[j]);
            let left = if j == 0 { 0.0 } else { self.c[j - 1] * (u[j] - u[j - 1]) };
            let u2 = u[j] * u[j];
            out[j] = self.a * (left - right) + self.m[j] * (self.v[j] + b * u2 + u2 * u2) * u[j];
        }
        out[n - 1] = 0.0;
    }

    pub fn rayleigh(&self, u: &[f64]) -> f64 {
        let mut hu = vec![0.0; u.len()];
        self.apply_weighted(u, &mut hu);
        let num: f64 = hu.iter().zip(u).map(|(h, x)| h * x).sum();
        num / self.mass(u)
    }

    /// `‖Hu - μu‖ / ‖μu‖` in the weighted norm over the free nodes.
    pub fn el_residual(&self, u: &[f64], mu: f64) -> f64 {
        let n = u.len();
        let mut hu = vec![0.0; n];
        self.apply_weighted(u, &mut hu);
        let (mut num, mut den) = (0.0, 0.0);
        for j in 0..n - 1 {
            let r = hu[j] / self.m[j] - mu * u[j];
            num += self.m[j] * r * r;
            den += self.m[j] * (mu * u[j]).powi(2);
        }
        (num / den).sqrt()
    }
}

fn normalize(m: &[f64], u: &mut [f64]) {
    let mass: f64 = m.iter().zip(u.iter()).map(|(m, x)| m * x * x).sum();
    let s = mass.sqrt().recip();
    for x in u.iter_mut() {
        *x *= s;
    }
}

pub(crate) fn prepare_initial(disc: &Discretization, u: &mut [f64]) {
    let n = u.len();
    u[n - 1] = 0.0;
    for x in u.iter_mut() {
        if *x < FLOOR {
            *x = 0.0;
        }
    }
    normalize(&disc.m, u);
}

/// Symmetric tridiagonal solve (Thomas algorithm); `off[j]` couples `j` and
/// `j + 1`. Overwrites `rhs` with the solution.
fn solve_tridiagonal(diag: &[f64], off: &[f64], rhs: &mut [f64], scratch: &mut [f64]) {
    let n = diag.len();
    let mut denom = diag[0];
    scratch[0] = off.first().copied().unwrap_or(0.0) / denom;
    rhs[0] /= denom;
    for j in 1..n {
        denom = diag[j] - off[j - 1] * scratch[j - 1];
        if j < n - 1 {
            scratch[j] = off[j] / denom;
        }
        rhs[j] = (rhs[j] - off[j - 1] * rhs[j - 1]) / denom;
    }
    for j in (0..n - 1).rev() {
        rhs[j] -= scratch[j] * rhs[j + 1];
    }
}

pub(crate) enum FlowOutcome {
    Converged,
    MaxIter,
    Unstable,
}

pub(crate) struct FlowResult {
    pub outcome: FlowOutcome,
    pub iterations: usize,
    pub residual: f64,
    pub trace: FlowTrace,
}

pub(crate) struct FlowParams {
    pub dt: f64,
    pub tol_energy: f64,
    pub tol_residual: f64,
    pub max_iter: usize,
    pub check_every: usize,
}

/// Run the normalized gradient flow on `u` in place.
///
/// One step solves
/// `(M + dt [τ^{p+2} K + M (V_τ + s)]) u* = M u (1 + dt (μ + s - g))`
/// with `K` the stiffness matrix, `g = κτ^{p/2}u² + u⁴` and `s = max(g, 0)`
/// lagged from the current iterate, then rescales `u*` to unit mass. `μ` is
/// the Rayleigh quotient of the current iterate, so fixed points are exactly
/// the discrete Euler-Lagrange solutions.
pub(crate) fn run_flow(disc: &Discretization, u: &mut Vec<f64>, params: &FlowParams) -> FlowResult {
    let n = u.len();
    let free = n - 1;
    let b = disc.kappa * disc.cubic;
    let mut diag = vec![0.0; free];
    let mut off = vec![0.0; free.saturating_sub(1)];
    let mut rhs = vec![0.0; free];
    let mut scratch = vec![0.0; free];
    let mut candidate = vec![0.0; n];

    let mut trace = FlowTrace::default();
    let mut energy = disc.energy(u).total(disc.kappa);
    let mut mu = disc.rayleigh(u);
    let dt_floor = params.dt / f64::from(1u32 << MAX_HALVINGS);
    let mut dt = params.dt;
    let mut last_change = f64::INFINITY;
    let mut residual = disc.el_residual(u, mu);
    let mut iterations = 0;

    while iterations < params.max_iter {
        if residual <= params.tol_residual && last_change <= params.tol_energy {
            return FlowResult {
                outcome: FlowOutcome::Converged,
                iterations,
                residual,
                trace,
            };
        }
        for j in 0..free {
            let u2 = u[j] * u[j];
            let g = b * u2 + u2 * u2;
            let s = g.max(0.0);
            let left = if j == 0 { 0.0 } else { disc.c[j - 1] };
            diag[j] = disc.m[j] * (1.0 + dt * (disc.v[j] + s)) + dt * disc.a * (left + disc.c[j]);
            if j + 1 < free {
                off[j] = -dt * disc.a * disc.c[j];
            }
            rhs[j] = disc.m[j] * u[j] * (1.0 + dt * (mu + s - g));
        }
        solve_tridiagonal(&diag, &off, &mut rhs, &mut scratch);
        for j in 0..free {
            candidate[j] = if rhs[j].abs() < FLOOR { 0.0 } else { rhs[j] };
        }
        candidate[n - 1] = 0.0;
        normalize(&disc.m, &mut candidate);
        let new_energy = disc.energy(&candidate).total(disc.kappa);
        let increase = (new_energy - energy) / energy.abs().max(f64::MIN_POSITIVE);
        if increase > BACKTRACK_TOL {
            trace.rejected += 1;
            dt *= 0.5;
            if dt < dt_floor {
                return FlowResult {
                    outcome: FlowOutcome::Unstable,
                    iterations,
                    residual,
                    trace,
                };
            }
            continue;
        }
        iterations += 1;
        trace.accepted += 1;
        trace.max_mass_defect = trace.max_mass_defect.max((disc.mass(&candidate) - 1.0).abs());
        trace.max_energy_increase = trace.max_energy_increase.max(increase);
        std::mem::swap(u, &mut candidate);
        last_change = (new_energy - energy).abs() / new_energy.abs().max(f64::MIN_POSITIVE);
        energy = new_energy;
        mu = disc.rayleigh(u);
        dt = (dt * 1.25).min(params.dt);
        if iterations % params.check_every == 0 || iterations == params.max_iter {
            residual = disc.el_residual(u, mu);
        }
    }
    let outcome = if residual <= params.tol_residual && last_change <= params.tol_energy {
        FlowOutcome::Converged
    } else {
        FlowOutcome::MaxIter
    };
    FlowResult {
        outcome,
        iterations,
        residual,
        trace,
    }
}
