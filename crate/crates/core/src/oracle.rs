//! Direct projected-gradient minimization of the discrete energy.
//!
//! Independent of the gradient flow: plain steepest descent on the unit
//! sphere with Armijo backtracking, restarted from random positive fields.
//! Intended for small grids, where it serves as a reference value.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{RadialField, RadialGrid};
use crate::minimizer::Kappa;
use crate::potentials::PotentialSpec;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleConfig {
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop when the weighted norm of the projected gradient falls below
    /// this; the energy error is then of order `tol²`.
    pub tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            restarts: 5,
            seed: 0,
            max_iter: 500_000,
            tol: 1e-7,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    /// Lowest energy over all restarts.
    pub energy: f64,
    pub energies: Vec<f64>,
    pub field: RadialField,
}

struct Problem {
    m: Vec<f64>,
    c: Vec<f64>,
    v: Vec<f64>,
    a: f64,
    b: f64,
}

impl Problem {
    fn energy(&self, u: &[f64]) -> f64 {
        let mut e = 0.0;
        for j in 0..u.len() {
            if j + 1 < u.len() {
                let du = u[j + 1] - u[j];
                e += 0.5 * self.a * self.c[j] * du * du;
            }
            let u2 = u[j] * u[j];
            e += self.m[j] * (0.5 * self.v[j] * u2 + 0.25 * self.b * u2 * u2 + u2 * u2 * u2 / 6.0);
        }
        e
    }

    /// Gradient in the weighted inner product, zero at the last node.
    fn gradient(&self, u: &[f64], out: &mut [f64]) {
        let n = u.len();
        for j in 0..n - 1 {
            let mut g = -self.a * self.c[j] * (u[j + 1] - u[j]);
            if j > 0 {
                g += self.a * self.c[j - 1] * (u[j] - u[j - 1]);
            }
            let u2 = u[j] * u[j];
            out[j] = g / self.m[j] + (self.v[j] + self.b * u2 + u2 * u2) * u[j];
        }
        out[n - 1] = 0.0;
    }

    fn dot(&self, x: &[f64], y: &[f64]) -> f64 {
        self.m.iter().zip(x).zip(y).map(|((m, a), b)| m * a * b).sum()
    }

    fn normalize(&self, u: &mut [f64]) {
        let s = self.dot(u, u).sqrt();
        u.iter_mut().for_each(|x| *x /= s);
    }

    fn descend(&self, u: &mut Vec<f64>, cfg: &OracleConfig) -> f64 {
        let n = u.len();
        let mut g = vec![0.0; n];
        let mut trial = vec![0.0; n];
        let mut e = self.energy(u);
        let mut step = 1.0;
        for _ in 0..cfg.max_iter {
            self.gradient(u, &mut g);
            let radial = self.dot(&g, u);
            g.iter_mut().zip(u.iter()).for_each(|(gj, uj)| *gj -= radial * uj);
            let g2 = self.dot(&g, &g);
            if g2.sqrt() < cfg.tol {
                break;
            }
            step *= 2.0;
            let accepted = loop {
                for j in 0..n {
                    trial[j] = u[j] - step * g[j];
                }
                self.normalize(&mut trial);
                let et = self.energy(&trial);
                if et <= e - 1e-4 * step * g2 {
                    e = et;
                    std::mem::swap(u, &mut trial);
                    break true;
                }
                if step < 1e-14 {
                    break false;
                }
                step *= 0.5;
            };
            if !accepted {
                // no decrease representable at this energy
                break;
            }
        }
        e
    }
}

/// Minimize the discrete `I_τ` on `grid` from `cfg.restarts` random starts.
pub fn projected_gradient_minimum(
    grid: &RadialGrid,
    spec: &PotentialSpec,
    tau: f64,
    kappa: Kappa,
    cfg: &OracleConfig,
) -> Result<OracleResult> {
    if cfg.restarts == 0 {
        return Err(Error::Arity { needed: 1, got: 0 });
    }
    let p = spec.tail().p;
    let n = grid.len();
    let v = grid
        .nodes()
        .map(|r| Ok(tau.powf(p) * spec.eval(r / tau)?))
        .collect::<Result<Vec<_>>>()?;
    let problem = Problem {
        m: grid.weights(),
        c: (0..n - 1).map(|j| grid.conductance(j)).collect(),
        v,
        a: tau.powf(p + 2.0),
        b: kappa.value() * tau.powf(0.5 * p),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut energies = Vec::with_capacity(cfg.restarts);
    for _ in 0..cfg.restarts {
        let mut u: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        u[n - 1] = 0.0;
        problem.normalize(&mut u);
        let e = problem.descend(&mut u, cfg);
        energies.push(e);
        if best.as_ref().is_none_or(|(b, _)| e < *b) {
            best = Some((e, u));
        }
    }
    let (energy, values) = best.expect("at least one restart");
    Ok(OracleResult {
        energy,
        energies,
        field: RadialField::new(*grid, values)?,
    })
}
