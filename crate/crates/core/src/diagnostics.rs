//! Scaling fits and Thomas-Fermi comparisons over a sweep of ground states.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RadialField;
use crate::io::fmt_f64;
use crate::minimizer::{GroundState, FLOOR};
use crate::potentials::PotentialSpec;
use crate::thomas_fermi::TfProfile;

/// Least-squares fit of `ln y = log_prefactor + exponent · ln x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub log_prefactor: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<ScalingFit> {
    if xs.len() != ys.len() {
        return Err(Error::domain(format!(
            "{} abscissas for {} ordinates",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(Error::Arity {
            needed: 3,
            got: xs.len(),
        });
    }
    if let Some(v) = xs.iter().chain(ys).find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::domain(format!("power-law fit needs positive data, got {v}")));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (slope, intercept, r_squared) = linear_fit(&lx, &ly)?;
    Ok(ScalingFit {
        exponent: slope,
        log_prefactor: intercept,
        r_squared,
        n_points: xs.len(),
    })
}

fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx <= 1e-300 {
        return Err(Error::domain("fit abscissas are all equal"));
    }
    let slope = sxy / sxx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - my - slope * (a - mx)).powi(2))
        .sum();
    let r2 = if syy <= 1e-300 { 1.0 } else { (1.0 - sse / syy).clamp(0.0, 1.0) };
    Ok((slope, my - slope * mx, r2))
}

/// Errors of a rescaled field against the Thomas-Fermi profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionErrors {
    pub l2: f64,
    pub l6: f64,
    /// Sup error over `|x| ≤ R/2`.
    pub sup_compact: f64,
    /// Sup error over `|x| < R - (τ|ln τ|)^ε`.
    pub sup_inner: f64,
    /// Largest value of the field beyond `R + τ^{p/2-ε}|ln τ|^{-ε}`.
    pub max_outside: f64,
    pub inner_radius: f64,
    pub outer_radius: f64,
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("layer widths need 0 < τ < 1, got {tau}")))
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon <= 0.5 {
        Ok(())
    } else {
        Err(Error::domain(format!("layer parameter must lie in (0, 1/2], got {epsilon}")))
    }
}

/// Width `τ^{p/2-ε}|ln τ|^{-ε}` of the exterior part of the corner layer.
pub fn outer_layer(tau: f64, p: f64, epsilon: f64) -> f64 {
    tau.powf(0.5 * p - epsilon) * tau.ln().abs().powf(-epsilon)
}

/// Width `(τ|ln τ|)^ε` of the interior part of the corner layer.
pub fn inner_layer(tau: f64, epsilon: f64) -> f64 {
    (tau * tau.ln().abs()).powf(epsilon)
}

pub fn region_errors(
    field: &RadialField,
    tau: f64,
    profile: &TfProfile,
    epsilon: f64,
) -> Result<RegionErrors> {
    check_tau(tau)?;
    check_epsilon(epsilon)?;
    let g = field.grid();
    let radius = profile.radius;
    let inner_radius = radius - inner_layer(tau, epsilon);
    let outer_radius = radius + outer_layer(tau, profile.p, epsilon);
    let (mut l2, mut l6) = (0.0, 0.0);
    let (mut sup_compact, mut sup_inner, mut max_outside) = (0.0f64, 0.0f64, 0.0f64);
    for (j, w) in field.values().iter().enumerate() {
        let r = g.node(j);
        let diff = (w - profile.value(r)).abs();
        let m = g.weight(j);
        l2 += m * diff * diff;
        l6 += m * diff.powi(6);
        if r <= 0.5 * radius {
            sup_compact = sup_compact.max(diff);
        }
        if r < inner_radius {
            sup_inner = sup_inner.max(diff);
        }
        if r > outer_radius {
            max_outside = max_outside.max(w.abs());
        }
    }
    Ok(RegionErrors {
        l2: l2.sqrt(),
        l6: l6.powf(1.0 / 6.0),
        sup_compact,
        sup_inner,
        max_outside,
        inner_radius,
        outer_radius,
    })
}

pub fn tf_comparison(state: &GroundState, profile: &TfProfile, epsilon: f64) -> Result<RegionErrors> {
    region_errors(&state.field_w, state.tau, profile, epsilon)
}

/// Default constant `c` in the exterior decay test `slope ≤ -c τ^{-(p+4)/4}`.
pub const DECAY_CONSTANT: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayCheck {
    pub passes: bool,
    /// `-2 · slope · τ^{(p+4)/4}`; infinite when the band is below the floor.
    pub decay_beta: f64,
    /// Fitted slope of `ln(r^{(d-1)/2} w)` against `r`.
    pub slope: f64,
    pub band: (f64, f64),
    pub points: usize,
}

/// Fit the exponential decay rate of `field` on the exterior band
/// `[R + layer, min(R + 3 layer, r_max - 5h)]`.
pub fn exterior_decay(
    field: &RadialField,
    tau: f64,
    profile: &TfProfile,
    epsilon: f64,
    c: f64,
) -> Result<DecayCheck> {
    check_tau(tau)?;
    check_epsilon(epsilon)?;
    let g = field.grid();
    let layer = outer_layer(tau, profile.p, epsilon);
    let lo = profile.radius + layer;
    let hi = (profile.radius + 3.0 * layer).min(g.r_max() - 5.0 * g.spacing());
    if !(hi > lo) {
        return Err(Error::domain(format!(
            "exterior band [{lo}, {hi}] is empty; enlarge r_max"
        )));
    }
    let half = 0.5 * f64::from(g.d() - 1);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (j, w) in field.values().iter().enumerate() {
        let r = g.node(j);
        if r >= lo && r <= hi && *w > FLOOR {
            xs.push(r);
            ys.push(half * r.ln() + w.ln());
        }
    }
    let scale = tau.powf(0.25 * (profile.p + 4.0));
    if xs.is_empty() {
        return Ok(DecayCheck {
            passes: true,
            decay_beta: f64::INFINITY,
            slope: f64::NEG_INFINITY,
            band: (lo, hi),
            points: 0,
        });
    }
    if xs.len() < 2 {
        return Err(Error::Arity {
            needed: 2,
            got: xs.len(),
        });
    }
    let (slope, _, _) = linear_fit(&xs, &ys)?;
    Ok(DecayCheck {
        passes: slope <= -c / scale,
        decay_beta: -2.0 * slope * scale,
        slope,
        band: (lo, hi),
        points: xs.len(),
    })
}

pub fn exterior_decay_check(state: &GroundState, profile: &TfProfile, epsilon: f64) -> Result<DecayCheck> {
    exterior_decay(&state.field_w, state.tau, profile, epsilon, DECAY_CONSTANT)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaplacianBound {
    /// Sup of `|Δw|` over the nodes inside the Thomas-Fermi radius.
    pub sup_laplacian: f64,
    /// `sup_laplacian · τ^{(3p+6)/4}`
    pub bound_ratio: f64,
    /// `sup_laplacian · τ^{(p+10)/4}`
    pub bound_ratio_alt: f64,
}

pub fn laplacian_bound(field: &RadialField, tau: f64, profile: &TfProfile) -> LaplacianBound {
    let g = field.grid();
    let lap = field.laplacian();
    let sup = lap
        .values()
        .iter()
        .enumerate()
        .take(g.len() - 1)
        .filter(|(j, _)| g.node(*j) < profile.radius)
        .fold(0.0f64, |m, (_, v)| m.max(v.abs()));
    let p = profile.p;
    LaplacianBound {
        sup_laplacian: sup,
        bound_ratio: sup * tau.powf(0.25 * (3.0 * p + 6.0)),
        bound_ratio_alt: sup * tau.powf(0.25 * (p + 10.0)),
    }
}

pub fn laplacian_bound_check(state: &GroundState, profile: &TfProfile) -> LaplacianBound {
    laplacian_bound(&state.field_w, state.tau, profile)
}

/// One ground state of a sweep, measured against the Thomas-Fermi limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    #[serde(rename = "N")]
    pub n: f64,
    pub tau: f64,
    pub e_tau: f64,
    pub err_energy: f64,
    pub mu_tau: f64,
    pub err_mu: f64,
    /// `E(N) = τ^{-p} e(τ)`
    pub energy: f64,
    /// `sup φ_N = τ^{d/2} sup w`
    pub sup_phi: f64,
    /// `∫φ_N⁶ = τ^{2d} ∫w⁶`
    pub sextic_phi: f64,
    /// `∫V|φ_N|²`
    pub potential_phi: f64,
    /// `∫|∇w|²`
    pub gradient_energy: f64,
    pub sup_w: f64,
    pub regions: RegionErrors,
    pub laplacian: LaplacianBound,
    pub decay: DecayCheck,
    pub mass: f64,
    pub el_residual: f64,
    pub pohozaev_residual: f64,
}

/// How a fitted exponent is compared with its target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bound {
    Equal,
    AtLeast,
    AtMost,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackedFit {
    pub quantity: String,
    pub target: f64,
    pub bound: Bound,
    pub fit: Option<ScalingFit>,
}

impl TrackedFit {
    pub fn within(&self, tol: f64) -> bool {
        match self.fit {
            None => false,
            Some(f) => match self.bound {
                Bound::Equal => (f.exponent - self.target).abs() <= tol,
                Bound::AtLeast => f.exponent >= self.target - tol,
                Bound::AtMost => f.exponent <= self.target + tol,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub d: u32,
    pub p: f64,
    pub c0: f64,
    pub sigma: f64,
    pub epsilon: f64,
    pub mu_tf: f64,
    pub e_tf: f64,
    pub rows: Vec<ReportRow>,
    pub fits: Vec<TrackedFit>,
}

/// Quantities tracked by [`scaling_report`], in the order of its fits.
pub const FIT_ENERGY: &str = "energy vs N";
pub const FIT_SUP: &str = "sup phi vs N";
pub const FIT_SEXTIC: &str = "int phi^6 vs N";
pub const FIT_MU_GAP: &str = "|mu - mu_tf| vs tau";
pub const FIT_ENERGY_GAP: &str = "|e - e_tf| vs tau";
pub const FIT_GRADIENT: &str = "int |grad w|^2 vs tau";
pub const FIT_POTENTIAL: &str = "int V phi^2 vs N";
pub const FIT_SUP_COMPACT: &str = "sup error on K vs tau";

impl ConvergenceReport {
    pub fn fit(&self, quantity: &str) -> Option<&TrackedFit> {
        self.fits.iter().find(|f| f.quantity == quantity)
    }

    pub const CSV_HEADER: &'static str =
        "N,tau,e_tau,err_energy,mu_tau,err_mu,l2_err,l6_err,sup_K,sup_inner,max_outside";

    /// The per-row table with the fixed column set of [`Self::CSV_HEADER`].
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for r in &self.rows {
            let cols = [
                r.n,
                r.tau,
                r.e_tau,
                r.err_energy,
                r.mu_tau,
                r.err_mu,
                r.regions.l2,
                r.regions.l6,
                r.regions.sup_compact,
                r.regions.sup_inner,
                r.regions.max_outside,
            ];
            let line: Vec<String> = cols.iter().map(|v| fmt_f64(*v)).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Per-state measurements and exponent fits over a sweep of at least three
/// ground states. Rows are ordered by decreasing `τ`.
pub fn scaling_report(
    states: &[GroundState],
    profile: &TfProfile,
    spec: &PotentialSpec,
    epsilon: f64,
) -> Result<ConvergenceReport> {
    if states.len() < 3 {
        return Err(Error::Arity {
            needed: 3,
            got: states.len(),
        });
    }
    let tf = profile.integrals()?;
    let p = profile.p;
    let mut ordered: Vec<&GroundState> = states.iter().collect();
    ordered.sort_by(|a, b| b.tau.total_cmp(&a.tau));
    let mut rows = Vec::with_capacity(states.len());
    for s in ordered {
        let d = f64::from(s.d());
        let w = &s.field_w;
        let sup_w = w.max_abs();
        rows.push(ReportRow {
            n: s.n,
            tau: s.tau,
            e_tau: s.e_tau,
            err_energy: (s.e_tau - tf.tf_energy).abs(),
            mu_tau: s.mu_tau,
            err_mu: (s.mu_tau - profile.mu_tf).abs(),
            energy: s.unscaled_energy(p),
            sup_phi: s.tau.powf(0.5 * d) * sup_w,
            sextic_phi: s.tau.powf(2.0 * d) * w.integrate(6, 0.0),
            potential_phi: 2.0 * s.energy_parts.potential / s.tau.powf(p),
            gradient_energy: w.gradient_energy(),
            sup_w,
            regions: tf_comparison(s, profile, epsilon)?,
            laplacian: laplacian_bound_check(s, profile),
            decay: exterior_decay_check(s, profile, epsilon)?,
            mass: s.mass(),
            el_residual: s.el_residual,
            pohozaev_residual: s.pohozaev_residual,
        });
    }
    let d = f64::from(profile.d);
    let sigma = spec.sigma();
    let ns: Vec<f64> = rows.iter().map(|r| r.n).collect();
    let taus: Vec<f64> = rows.iter().map(|r| r.tau).collect();
    let col = |f: &dyn Fn(&ReportRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let tracked = |quantity: &str, xs: &[f64], ys: Vec<f64>, target: f64, bound: Bound| TrackedFit {
        quantity: quantity.to_string(),
        target,
        bound,
        fit: fit_power_law(xs, &ys).ok(),
    };
    let fits = vec![
        tracked(FIT_ENERGY, &ns, col(&|r| r.energy), 2.0 * p / (2.0 * d + p), Bound::Equal),
        tracked(FIT_SUP, &ns, col(&|r| r.sup_phi), -d / (2.0 * d + p), Bound::Equal),
        tracked(FIT_SEXTIC, &ns, col(&|r| r.sextic_phi), -4.0 * d / (2.0 * d + p), Bound::Equal),
        tracked(FIT_MU_GAP, &taus, col(&|r| r.err_mu), sigma, Bound::AtLeast),
        tracked(FIT_ENERGY_GAP, &taus, col(&|r| r.err_energy), sigma, Bound::AtLeast),
        tracked(FIT_GRADIENT, &taus, col(&|r| r.gradient_energy), sigma - p - 2.0, Bound::AtLeast),
        tracked(FIT_POTENTIAL, &ns, col(&|r| r.potential_phi), 2.0 * p / (2.0 * d + p), Bound::AtMost),
        tracked(FIT_SUP_COMPACT, &taus, col(&|r| r.regions.sup_compact), sigma, Bound::AtLeast),
    ];
    Ok(ConvergenceReport {
        d: profile.d,
        p,
        c0: profile.c0,
        sigma,
        epsilon,
        mu_tf: profile.mu_tf,
        e_tf: tf.tf_energy,
        rows,
        fits,
    })
}
