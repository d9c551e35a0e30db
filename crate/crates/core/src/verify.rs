//! Pass/fail checks over a sweep report.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    ConvergenceReport, FIT_ENERGY, FIT_SEXTIC, FIT_SUP, FIT_SUP_COMPACT,
};
use crate::error::Result;
use crate::minimizer::{GroundState, BACKTRACK_TOL};
use crate::thomas_fermi::{energy_limit_constant, TfProfile};

/// Exponents recovered from three-point fits must lie this close to target.
pub const EXPONENT_TOL: f64 = 0.05;
/// Relative tolerance on the leading energy constant at the largest `N`.
pub const ENERGY_CONSTANT_TOL: f64 = 0.10;
/// Allowed growth per sweep step of a quantity expected to be non-increasing.
pub const MONOTONE_SLACK: f64 = 0.05;
/// A ratio "stays bounded" when it never exceeds this multiple of its value
/// at the largest `τ`.
pub const RATIO_GROWTH: f64 = 1.25;
/// Slack on one-sided fitted rates.
pub const RATE_TOL: f64 = 0.1;
/// `sup w` must stay within these multiples of `μ_TF^{1/4}`.
pub const SUP_INTERVAL: (f64, f64) = (0.5, 2.0);
pub const L6_AT_LARGEST_N: f64 = 5e-2;
pub const MASS_TOL: f64 = 1e-10;
pub const POHOZAEV_TOL: f64 = 1e-3;
pub const ORACLE_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn sci(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn non_increasing(xs: &[f64], slack: f64) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0] * (1.0 + slack))
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn bounded_ratio(xs: &[f64]) -> bool {
    xs.iter().all(|r| *r <= RATIO_GROWTH * xs[0])
}

/// Field-level solver invariants of one converged state.
pub fn state_invariants(state: &GroundState) -> (bool, String) {
    let w = state.field_w.values();
    let top = state.field_w.max_abs();
    let non_negative = w.iter().all(|v| *v >= 0.0);
    let non_increasing = w.windows(2).all(|p| p[1] <= p[0] + 1e-14 * top);
    let mass_ok = (state.mass() - 1.0).abs() <= MASS_TOL && state.trace.max_mass_defect <= MASS_TOL;
    let energy_ok = state.trace.max_energy_increase <= BACKTRACK_TOL;
    let el_ok = state.el_residual <= state.tol_residual;
    let poh_ok = state.pohozaev_residual <= POHOZAEV_TOL;
    let ok = non_negative && non_increasing && mass_ok && energy_ok && el_ok && poh_ok;
    let detail = format!(
        "N={:e}: mass defect {:.1e}, max energy increase {:.1e}, el {:.1e}, pohozaev {:.1e}, \
         non-negative {non_negative}, non-increasing {non_increasing}",
        state.n,
        state.trace.max_mass_defect,
        state.trace.max_energy_increase,
        state.el_residual,
        state.pohozaev_residual,
    );
    (ok, detail)
}

/// Checks of the Thomas-Fermi closed forms for `profile`.
pub fn tf_checks(profile: &TfProfile) -> Vec<Check> {
    let closed = profile.integrals_closed_form();
    let quad = profile.integrals_by_quadrature();
    let limit = energy_limit_constant(profile.d, profile.p, profile.c0);
    let mut out = Vec::new();
    match (closed, limit) {
        (Ok(c), Ok(l)) => {
            let rel = |a: f64, b: f64| ((a - b) / b).abs();
            let worst = rel(c.mass, 1.0)
                .max(rel(c.quintic_norm, quad.quintic_norm))
                .max(rel(c.weighted_mass, quad.weighted_mass))
                .max(rel(l, quad.tf_energy));
            out.push(check(
                "thomas-fermi closed forms",
                worst <= 1e-10,
                format!("mu_tf {:.12}, limit constant {:.12}, worst relative gap {worst:.1e}", profile.mu_tf, l),
            ));
            let d = f64::from(profile.d);
            let id1 = rel(2.0 * c.tf_energy + 2.0 / 3.0 * c.quintic_norm, profile.mu_tf);
            let id2 = rel(0.5 * profile.p * profile.c0 * c.weighted_mass, d / 3.0 * c.quintic_norm);
            out.push(check(
                "thomas-fermi identities",
                id1.max(id2) <= 1e-10,
                format!("multiplier identity {id1:.1e}, virial identity {id2:.1e}"),
            ));
        }
        (Err(e), _) | (_, Err(e)) => out.push(check("thomas-fermi closed forms", false, e.to_string())),
    }
    out
}

/// Pass/fail checks of a sweep report against the large-`N` asymptotics.
pub fn sweep_checks(report: &ConvergenceReport, states: &[GroundState]) -> Result<Vec<Check>> {
    let rows = &report.rows;
    let last = rows.last().expect("reports have at least three rows");
    let d = f64::from(report.d);
    let p = report.p;
    let sigma = report.sigma;
    let eps = report.epsilon;
    let mut out = Vec::new();

    let fit_line = |name: &str| -> (bool, String) {
        match report.fit(name) {
            Some(f) => (
                f.within(EXPONENT_TOL),
                match f.fit {
                    Some(s) => format!("exponent {:.4} (target {:.4}), r² {:.5}", s.exponent, f.target, s.r_squared),
                    None => "fit failed".to_string(),
                },
            ),
            None => (false, "missing fit".to_string()),
        }
    };

    let limit = energy_limit_constant(report.d, p, report.c0)?;
    let ratio = last.energy / last.n.powf(2.0 * p / (2.0 * d + p));
    let (ok, detail) = fit_line(FIT_ENERGY);
    let const_ok = ((ratio - limit) / limit).abs() <= ENERGY_CONSTANT_TOL;
    out.push(check(
        "energy scaling",
        ok && const_ok,
        format!("{detail}; E(N)/N^(2p/(2d+p)) = {ratio:.6} vs {limit:.6}"),
    ));

    let (ok, detail) = fit_line(FIT_SUP);
    let scale = report.mu_tf.powf(0.25);
    let scaled: Vec<f64> = rows.iter().map(|r| r.sup_w).collect();
    let inside = scaled
        .iter()
        .all(|s| *s >= SUP_INTERVAL.0 * scale && *s <= SUP_INTERVAL.1 * scale);
    out.push(check(
        "sup-norm vanishing",
        ok && inside,
        format!("{detail}; N^(d/(2d+p)) sup phi = {scaled:.4?}"),
    ));

    let (ok, detail) = fit_line(FIT_SEXTIC);
    out.push(check("sextic-norm rate", ok, detail));

    let gaps: Vec<f64> = rows.iter().map(|r| r.err_mu).collect();
    let ratios: Vec<f64> = rows.iter().map(|r| r.err_mu / r.tau.powf(sigma)).collect();
    out.push(check(
        "multiplier gap",
        non_increasing(&gaps, 0.0) && bounded_ratio(&ratios),
        format!("|mu - mu_tf| = {}, over tau^sigma = {ratios:.4?}", sci(&gaps)),
    ));

    let energy_gaps: Vec<f64> = rows.iter().map(|r| r.err_energy).collect();
    out.push(check(
        "monotone convergence",
        non_increasing(&energy_gaps, MONOTONE_SLACK) && non_increasing(&gaps, MONOTONE_SLACK),
        format!("|e - e_tf| = {}", sci(&energy_gaps)),
    ));

    let l2: Vec<f64> = rows.iter().map(|r| r.regions.l2).collect();
    let l6: Vec<f64> = rows.iter().map(|r| r.regions.l6).collect();
    out.push(check(
        "profile convergence",
        strictly_decreasing(&l2) && strictly_decreasing(&l6) && last.regions.l6 < L6_AT_LARGEST_N,
        format!("L2 {}, L6 {}", sci(&l2), sci(&l6)),
    ));

    let sup_k: Vec<f64> = rows.iter().map(|r| r.regions.sup_compact).collect();
    let k_ratio: Vec<f64> = rows.iter().map(|r| r.regions.sup_compact / r.tau.powf(sigma)).collect();
    let inner_ratio: Vec<f64> = rows
        .iter()
        .map(|r| r.regions.sup_inner / (r.tau.powf(sigma - eps) * r.tau.ln().abs().powf(-eps)))
        .collect();
    let k_rate_ok = report
        .fit(FIT_SUP_COMPACT)
        .is_some_and(|f| f.within(RATE_TOL));
    out.push(check(
        "corner layer",
        strictly_decreasing(&sup_k) && k_rate_ok && bounded_ratio(&k_ratio) && bounded_ratio(&inner_ratio),
        format!(
            "sup on K {} (over tau^sigma {k_ratio:.4?}); inner ball ratio {inner_ratio:.4?}",
            sci(&sup_k)
        ),
    ));

    let rates: Vec<f64> = rows.iter().map(|r| -r.decay.slope).collect();
    let all_pass = rows.iter().all(|r| r.decay.passes);
    out.push(check(
        "exterior decay",
        all_pass && rates.windows(2).all(|w| w[1] > w[0]),
        format!(
            "passes {:?}, decay rates {rates:.1?}, beta {:.3?}",
            rows.iter().map(|r| r.decay.passes).collect::<Vec<_>>(),
            rows.iter().map(|r| r.decay.decay_beta).collect::<Vec<_>>()
        ),
    ));

    let mut ok = true;
    let mut details = Vec::new();
    for s in states {
        let (pass, detail) = state_invariants(s);
        ok &= pass;
        details.push(detail);
    }
    out.push(check("solver invariants", ok, details.join("; ")));
    Ok(out)
}

/// Agreement of the flow energy with the direct minimization.
pub fn oracle_check(flow_energy: f64, oracle_energy: f64) -> Check {
    let gap = (flow_energy - oracle_energy).abs();
    check(
        "oracle equivalence",
        gap <= ORACLE_TOL,
        format!("flow {flow_energy:.12}, direct {oracle_energy:.12}, gap {gap:.1e}"),
    )
}
