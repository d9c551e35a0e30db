use std::f64::consts::PI;

use cqtf::grid::{RadialField, RadialGrid};
use cqtf::minimizer::{
    energy_breakdown, field_residuals, lagrange_multiplier, rescale, residuals, solve_from,
    solve_ground_state, sweep, tau_of, EnergyParts, Init, Kappa, SolverConfig,
};
use cqtf::potentials::{PotentialSpec, TailConstants};
use cqtf::thomas_fermi::TfProfile;
use cqtf::Error;

fn harmonic() -> PotentialSpec {
    PotentialSpec::pure_power(1.0, 2.0).unwrap()
}

fn config(n: usize) -> SolverConfig {
    let mut cfg = SolverConfig::default();
    cfg.grid.n = n;
    cfg
}

#[test]
fn zero_field_has_zero_energy() {
    let grid = RadialGrid::new(1, 100, 3.0).unwrap();
    let parts = energy_breakdown(&RadialField::zeros(&grid), 0.1, &harmonic(), Kappa::Defocusing).unwrap();
    assert_eq!(parts, EnergyParts::default());
}

#[test]
fn thomas_fermi_profile_in_the_formal_limit() {
    let profile = TfProfile::new(1, 2.0, 1.0).unwrap();
    let grid = RadialGrid::new(1, 200_001, 2.0 * profile.radius + 1.0).unwrap();
    let u = profile.sample(&grid);
    let parts = energy_breakdown(&u, 1e-8, &harmonic(), Kappa::Defocusing).unwrap();
    assert!((parts.potential - 0.25 / PI).abs() < 1e-6, "{parts:?}");
    assert!((parts.quintic - 0.25 / PI).abs() < 1e-6, "{parts:?}");
    assert!(parts.kinetic < 1e-20);
    assert!((parts.total(1.0) - 0.5 / PI).abs() < 1e-6);
}

#[test]
fn kappa_enters_linearly() {
    let grid = RadialGrid::new(2, 300, 2.5).unwrap();
    let u = RadialField::from_fn(&grid, |r| (-r * r).exp());
    let plus = energy_breakdown(&u, 0.2, &harmonic(), Kappa::Defocusing).unwrap();
    let minus = energy_breakdown(&u, 0.2, &harmonic(), Kappa::Focusing).unwrap();
    let gap = plus.total(1.0) - minus.total(-1.0);
    assert!((gap - 2.0 * plus.quartic).abs() < 1e-15);
}

#[test]
fn reference_state_at_ten_thousand() {
    let state = solve_ground_state(&config(2048), &harmonic(), 1e4).unwrap();
    assert!((state.tau - 0.01).abs() < 1e-15);
    assert!(((state.e_tau - 0.5 / PI) / (0.5 / PI)).abs() < 0.1);
    let peak = state.field_w.values()[0];
    let expected = (2.0 / PI).powf(0.25);
    assert!(((peak - expected) / expected).abs() < 0.1);
    assert!((state.mass() - 1.0).abs() < 1e-10);
    assert!(state.el_residual <= 1e-6);
    assert!(state.pohozaev_residual <= 1e-3);
    let parts = state.energy_parts;
    assert!((state.e_tau - parts.total(1.0)).abs() < 1e-15);
}

#[test]
fn multiplier_formula_and_rayleigh_quotient_agree() {
    let spec = harmonic();
    for kappa in [Kappa::Defocusing, Kappa::Focusing] {
        let mut cfg = config(512);
        cfg.kappa = kappa;
        let state = solve_ground_state(&cfg, &spec, 1e3).unwrap();
        let mu = lagrange_multiplier(&state, &spec).unwrap();
        assert!((mu - state.mu_tau).abs() < 1e-12);
        let res = residuals(&state, &spec).unwrap();
        assert!(res.el_residual <= cfg.tol_residual);
        assert!(res.pohozaev_residual <= 1e-3);
    }
}

#[test]
fn multiplier_gap_between_signs() {
    let spec = harmonic();
    let state = solve_ground_state(&config(512), &spec, 1e3).unwrap();
    let mut flipped = state.clone();
    flipped.kappa = Kappa::Focusing;
    flipped.tol_residual = 1.0;
    let mu_minus = lagrange_multiplier(&flipped, &spec).unwrap();
    let quartic_norm = state.field_w.integrate(4, 0.0);
    // κ enters once through 2e(τ) and once through the explicit quartic term
    let gap = state.mu_tau - mu_minus;
    assert!((gap - 2.0 * state.tau * quartic_norm).abs() < 1e-12);
}

#[test]
fn off_constraint_field_fails_the_multiplier_check() {
    let spec = harmonic();
    let mut state = solve_ground_state(&config(256), &spec, 1e3).unwrap();
    state.field_w = state.field_w.map(|_, v| 1.5 * v);
    assert!(matches!(lagrange_multiplier(&state, &spec), Err(Error::Consistency { .. })));
}

#[test]
fn thomas_fermi_profile_residual_shrinks_with_tau() {
    let spec = harmonic();
    let profile = TfProfile::new(1, 2.0, 1.0).unwrap();
    let grid = RadialGrid::new(1, 4001, 2.0 * profile.radius + 1.0).unwrap();
    let u = profile.sample(&grid);
    let mass = u.integrate(2, 0.0).sqrt();
    let u = u.map(|_, v| v / mass);
    let res = |tau: f64| {
        field_residuals(&u, tau, &spec, Kappa::Defocusing, profile.mu_tf)
            .unwrap()
            .el_residual
    };
    let (a, b) = (res(0.1), res(0.01));
    assert!(a > 0.0 && b > 0.0);
    assert!(b < a, "{a} {b}");
}

#[test]
fn sweep_orders_tau_and_keeps_mass() {
    let states = sweep(&config(512), &harmonic(), &[1e2, 1e3, 1e4], Some(2)).unwrap();
    assert_eq!(states.len(), 3);
    assert!(states.windows(2).all(|w| w[1].tau < w[0].tau));
    for s in &states {
        assert!((s.mass() - 1.0).abs() < 1e-10);
    }
    // the energy decreases toward its limit
    assert!(states.windows(2).all(|w| w[1].e_tau < w[0].e_tau));
    assert!(states.iter().all(|s| s.e_tau > 0.5 / PI));
}

#[test]
fn sweep_rejects_unordered_masses() {
    let err = sweep(&config(128), &harmonic(), &[1e3, 1e2, 1e4], None).unwrap_err();
    assert!(matches!(err, Error::Config(_)));
}

#[test]
fn warm_start_reaches_the_same_states() {
    let mut warm = config(512);
    warm.init = Init::WarmStart;
    let ns = [1e2, 1e3, 1e4];
    let chained = sweep(&warm, &harmonic(), &ns, None).unwrap();
    let cold = sweep(&config(512), &harmonic(), &ns, None).unwrap();
    for (a, b) in chained.iter().zip(&cold) {
        assert!((a.e_tau - b.e_tau).abs() < 1e-9);
    }
}

#[test]
fn initialization_does_not_change_the_minimum() {
    let mut gauss = config(512);
    gauss.init = Init::Gaussian;
    let a = solve_ground_state(&gauss, &harmonic(), 1e3).unwrap();
    let b = solve_ground_state(&config(512), &harmonic(), 1e3).unwrap();
    assert!((a.e_tau - b.e_tau).abs() < 1e-9);
}

#[test]
fn warm_start_interpolates_across_grids() {
    let coarse = solve_ground_state(&config(256), &harmonic(), 1e3).unwrap();
    let mut warm = config(1024);
    warm.init = Init::WarmStart;
    let fine = solve_from(&warm, &harmonic(), 1e3, Some(&coarse.field_w)).unwrap();
    assert!((fine.mass() - 1.0).abs() < 1e-10);
    assert!((fine.e_tau - coarse.e_tau).abs() < 1e-3);
}

#[test]
fn states_are_positive_and_radially_decreasing() {
    let trap = PotentialSpec::magnetic_trap(0.5, 1.0).unwrap();
    let sum = PotentialSpec::polynomial_sum(
        &[(1.0, 2.0), (0.5, 4.0)],
        TailConstants { c0: 0.5, p: 4.0, alpha: 2.0, c1: 2.0, c2: 1.0 },
    )
    .unwrap();
    for (d, spec, kappa) in [
        (1, trap.clone(), Kappa::Defocusing),
        (2, trap, Kappa::Focusing),
        (3, sum.clone(), Kappa::Defocusing),
        (2, sum, Kappa::Focusing),
    ] {
        let mut cfg = config(512);
        cfg.grid.d = d;
        cfg.kappa = kappa;
        let s = solve_ground_state(&cfg, &spec, 1e3).unwrap();
        let w = s.field_w.values();
        assert!(w.iter().all(|v| *v >= 0.0));
        assert!(w.windows(2).all(|p| p[1] <= p[0]), "d={d}");
        assert_eq!(s.field_w.max_abs(), w[0]);
        assert!(s.trace.max_mass_defect < 1e-10);
        assert!(s.pohozaev_residual < 1e-3, "d={d}: {}", s.pohozaev_residual);
    }
}

#[test]
fn max_iter_yields_a_partial_state() {
    let mut cfg = config(512);
    cfg.max_iter = 3;
    match solve_ground_state(&cfg, &harmonic(), 1e4) {
        Err(Error::NonConvergence { iterations, partial, .. }) => {
            assert_eq!(iterations, 3);
            assert!((partial.mass() - 1.0).abs() < 1e-10);
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

#[test]
fn invalid_requests() {
    assert!(solve_ground_state(&config(512), &harmonic(), 0.0).is_err());
    let mut cfg = config(512);
    cfg.dt = -1.0;
    assert!(matches!(solve_ground_state(&cfg, &harmonic(), 1e3), Err(Error::Config(_))));
    assert!(solve_ground_state(&config(16), &harmonic(), 1e3).is_err());
}

#[test]
fn rescaling_to_original_variables() {
    let s = solve_ground_state(&config(512), &harmonic(), 1e3).unwrap();
    let phi = rescale(&s);
    assert!((phi.integrate(2, 0.0) - 1.0).abs() < 1e-10);
    let expected = s.tau.sqrt() * s.field_w.max_abs();
    assert!((phi.max_abs() - expected).abs() < 1e-15);
    assert!((phi.grid().r_max() - s.field_w.grid().r_max() / s.tau).abs() < 1e-9);
    // E(N) = τ^{-p} e(τ)
    assert!((s.unscaled_energy(2.0) - s.e_tau / (s.tau * s.tau)).abs() < 1e-9);
    assert!((tau_of(1e3, 1, 2.0) - s.tau).abs() < 1e-16);
}

#[test]
fn summary_round_trips_through_json() {
    let s = solve_ground_state(&config(256), &harmonic(), 1e2).unwrap();
    let summary = s.summary(2.0);
    let text = serde_json::to_string(&summary).unwrap();
    assert!(text.contains("\"N\""));
    let back: cqtf::minimizer::GroundStateSummary = serde_json::from_str(&text).unwrap();
    assert_eq!(back, summary);
    let cfg: SolverConfig = serde_json::from_str(r#"{"kappa": -1, "dt": 0.5}"#).unwrap();
    assert_eq!(cfg.kappa, Kappa::Focusing);
    assert!(serde_json::from_str::<SolverConfig>(r#"{"kappa": 2}"#).is_err());
}
