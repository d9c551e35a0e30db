//! Closed-form Thomas-Fermi limit objects.
//!
//! In the large-mass limit the gradient and cubic terms drop out and the
//! rescaled minimizer approaches the compactly supported profile
//! `u(r) = (μ - C0 r^p)_+^{1/4}`, normalized to unit mass. Everything here is
//! available in closed form through Beta functions; each closed form has a
//! quadrature counterpart used as a cross-check.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{RadialField, RadialGrid};
use crate::quadrature::tanh_sinh;

pub mod special;

pub use special::{beta_fn, beta_quadrature, gamma, ln_gamma};

const CROSS_CHECK_TOL: f64 = 1e-10;

/// Surface measure of the unit sphere in `R^d`.
pub fn omega(d: u32) -> Result<f64> {
    match d {
        1 => Ok(2.0),
        2 => Ok(2.0 * PI),
        3 => Ok(4.0 * PI),
        _ => Err(Error::domain(format!("dimension must be 1, 2 or 3, got {d}"))),
    }
}

fn check_params(d: u32, p: f64, c0: f64) -> Result<()> {
    omega(d)?;
    if !(p >= 2.0) || !p.is_finite() {
        return Err(Error::domain(format!("trap power must satisfy p >= 2, got {p}")));
    }
    if !(c0 > 0.0) || !c0.is_finite() {
        return Err(Error::domain(format!("trap coefficient must be positive, got {c0}")));
    }
    Ok(())
}

/// Beta function, cross-checked once per process against its integral.
fn checked_beta(p: f64, q: f64) -> Result<f64> {
    static SEEN: OnceLock<Mutex<HashMap<(u64, u64), f64>>> = OnceLock::new();
    let key = (p.to_bits(), q.to_bits());
    let cache = SEEN.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().expect("beta cache poisoned").get(&key) {
        return Ok(*v);
    }
    let closed = beta_fn(p, q)?;
    if p > 0.0 && q > 0.0 {
        let quad = beta_quadrature(p, q)?;
        if ((closed - quad) / closed).abs() > CROSS_CHECK_TOL {
            return Err(Error::Consistency {
                what: "Beta closed form vs quadrature",
                lhs: closed,
                rhs: quad,
            });
        }
    }
    cache
        .lock()
        .expect("beta cache poisoned")
        .insert(key, closed);
    Ok(closed)
}

/// The Thomas-Fermi chemical potential, fixed by unit mass of the profile.
pub fn mu_tf(d: u32, p: f64, c0: f64) -> Result<f64> {
    check_params(d, p, c0)?;
    let df = f64::from(d);
    let b = checked_beta(df / p, 1.5)?;
    let base = p / (omega(d)? * c0.powf(-df / p) * b);
    Ok(base.powf(2.0 * p / (2.0 * df + p)))
}

/// Limit of `E(N) / N^{2p/(2d+p)}`, evaluated from its Beta-function form.
///
/// Cross-checked against [`TfIntegrals::tf_energy`]; a mismatch beyond
/// `1e-10` relative is reported as a consistency error.
pub fn energy_limit_constant(d: u32, p: f64, c0: f64) -> Result<f64> {
    let profile = TfProfile::new(d, p, c0)?;
    let df = f64::from(d);
    let b = checked_beta((df + p) / p, 1.5)?;
    let value = profile.omega_d * (2.0 * df + p) * c0.powf(-df / p)
        * profile.mu_tf.powf((2.0 * df + 3.0 * p) / (2.0 * p))
        / (4.0 * p * df)
        * b;
    let energy = profile.integrals()?.tf_energy;
    if ((value - energy) / energy).abs() > CROSS_CHECK_TOL {
        return Err(Error::Consistency {
            what: "energy limit constant vs TF energy",
            lhs: value,
            rhs: energy,
        });
    }
    Ok(value)
}

/// Integrals of the Thomas-Fermi profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TfIntegrals {
    /// `∫ u²`
    pub mass: f64,
    /// `∫ u⁶`
    pub quintic_norm: f64,
    /// `∫ |x|^p u²`, without the `C0 / 2` factor.
    pub weighted_mass: f64,
    /// `((2d + p) / 6p) ∫ u⁶`, the minimal Thomas-Fermi energy.
    pub tf_energy: f64,
}

/// The Thomas-Fermi minimizer for a pure-power tail `C0 r^p` in dimension `d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TfProfile {
    pub d: u32,
    pub p: f64,
    pub c0: f64,
    pub mu_tf: f64,
    /// Support edge `(μ / C0)^{1/p}`.
    pub radius: f64,
    pub omega_d: f64,
}

impl TfProfile {
    pub fn new(d: u32, p: f64, c0: f64) -> Result<Self> {
        let mu = mu_tf(d, p, c0)?;
        Ok(TfProfile {
            d,
            p,
            c0,
            mu_tf: mu,
            radius: (mu / c0).powf(1.0 / p),
            omega_d: omega(d)?,
        })
    }

    /// `μ - C0 r^p`, accurate near the support edge.
    fn gap(&self, r: f64) -> f64 {
        let dist = self.radius - r;
        if dist < 0.5 * self.radius {
            // C0 R^p (1 - (1 - dist/R)^p)
            -self.mu_tf * (self.p * (-dist / self.radius).ln_1p()).exp_m1()
        } else {
            self.mu_tf - self.c0 * r.powf(self.p)
        }
    }

    /// Profile value `(μ - C0 r^p)_+^{1/4}`.
    pub fn value(&self, r: f64) -> f64 {
        if r >= self.radius {
            0.0
        } else {
            self.gap(r).max(0.0).powf(0.25)
        }
    }

    /// Radial Laplacian `u'' + (d-1) u' / r` of the profile inside its support.
    pub fn laplacian(&self, r: f64) -> f64 {
        if r >= self.radius {
            return f64::NAN;
        }
        let (p, c0) = (self.p, self.c0);
        let f = self.gap(r);
        let df = -p * c0 * r.powf(p - 1.0);
        let d2f = -p * (p - 1.0) * c0 * r.powf(p - 2.0);
        let u1 = 0.25 * f.powf(-0.75) * df;
        let u2 = 0.25 * f.powf(-0.75) * d2f - 3.0 / 16.0 * f.powf(-1.75) * df * df;
        if r == 0.0 {
            // u'(r)/r → u''(0) as r → 0 (u'' is finite only for p >= 2)
            f64::from(self.d) * u2
        } else {
            u2 + f64::from(self.d - 1) * u1 / r
        }
    }

    /// The profile sampled on the nodes of `grid`.
    pub fn sample(&self, grid: &RadialGrid) -> RadialField {
        RadialField::from_fn(grid, |r| self.value(r))
    }

    /// Closed-form integrals, each verified against quadrature.
    pub fn integrals(&self) -> Result<TfIntegrals> {
        let closed = self.integrals_closed_form()?;
        let quad = self.integrals_by_quadrature();
        let pairs = [
            ("mass", closed.mass, quad.mass),
            ("quintic norm", closed.quintic_norm, quad.quintic_norm),
            ("weighted mass", closed.weighted_mass, quad.weighted_mass),
        ];
        for (what, a, b) in pairs {
            if ((a - b) / a).abs() > CROSS_CHECK_TOL {
                return Err(Error::Consistency { what, lhs: a, rhs: b });
            }
        }
        Ok(closed)
    }

    pub fn integrals_closed_form(&self) -> Result<TfIntegrals> {
        let d = f64::from(self.d);
        let (p, c0, mu) = (self.p, self.c0, self.mu_tf);
        let a = self.omega_d * c0.powf(-d / p) / p;
        let mass = a * mu.powf((2.0 * d + p) / (2.0 * p)) * checked_beta(d / p, 1.5)?;
        let high = mu.powf((2.0 * d + 3.0 * p) / (2.0 * p));
        let quintic_norm = a * high * checked_beta(d / p, 2.5)?;
        let weighted_mass = a / c0 * high * checked_beta((d + p) / p, 1.5)?;
        Ok(TfIntegrals {
            mass,
            quintic_norm,
            weighted_mass,
            tf_energy: (2.0 * d + p) / (6.0 * p) * quintic_norm,
        })
    }

    pub fn integrals_by_quadrature(&self) -> TfIntegrals {
        let d = f64::from(self.d);
        let (p, r_edge) = (self.p, self.radius);
        let radial = |extra_power: f64, gap_power: f64| {
            let q = tanh_sinh(
                |r, _, to_edge| {
                    let gap = if to_edge < 0.5 * r_edge {
                        -self.mu_tf * (p * (-to_edge / r_edge).ln_1p()).exp_m1()
                    } else {
                        self.mu_tf - self.c0 * r.powf(p)
                    };
                    r.powf(d - 1.0 + extra_power) * gap.max(0.0).powf(gap_power)
                },
                0.0,
                r_edge,
                1e-14,
            );
            self.omega_d * q.value
        };
        let quintic_norm = radial(0.0, 1.5);
        TfIntegrals {
            mass: radial(0.0, 0.5),
            quintic_norm,
            weighted_mass: radial(p, 0.5),
            tf_energy: (2.0 * d + p) / (6.0 * p) * quintic_norm,
        }
    }
}

pub fn tf_profile(d: u32, p: f64, c0: f64) -> Result<TfProfile> {
    TfProfile::new(d, p, c0)
}

pub fn tf_integrals(profile: &TfProfile) -> Result<TfIntegrals> {
    profile.integrals()
}
