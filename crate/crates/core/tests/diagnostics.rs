use cqtf::diagnostics::{
    exterior_decay, fit_power_law, laplacian_bound, region_errors, scaling_report, Bound,
    FIT_ENERGY, FIT_SEXTIC, FIT_SUP,
};
use cqtf::grid::{RadialField, RadialGrid};
use cqtf::minimizer::{sweep, SolverConfig};
use cqtf::potentials::PotentialSpec;
use cqtf::thomas_fermi::TfProfile;
use cqtf::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn noisy_power_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let xs: Vec<f64> = (0..20).map(|k| 10f64.powf(k as f64 / 5.0)).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|x| 5.0 * x.powf(1.5) * (1.0 + 0.01 * rng.gen_range(-1.0..1.0)))
        .collect();
    let fit = fit_power_law(&xs, &ys).unwrap();
    assert!((fit.exponent - 1.5).abs() < 0.05);
    assert!(fit.r_squared > 0.999);
    assert_eq!(fit.n_points, 20);
}

proptest! {
    #[test]
    fn exponent_ignores_the_prefactor(scale in 1e-6f64..1e6, e in -3.0f64..3.0) {
        let xs = [1.0, 3.0, 7.0, 20.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| x.powf(e) * (1.0 + 0.1 * x.sin())).collect();
        let scaled: Vec<f64> = ys.iter().map(|y| scale * y).collect();
        let a = fit_power_law(&xs, &ys).unwrap();
        let b = fit_power_law(&xs, &scaled).unwrap();
        prop_assert!((a.exponent - b.exponent).abs() < 1e-9);
        prop_assert!((b.log_prefactor - a.log_prefactor - scale.ln()).abs() < 1e-9);
    }
}

fn harmonic_profile() -> TfProfile {
    TfProfile::new(1, 2.0, 1.0).unwrap()
}

#[test]
fn exact_profile_has_no_region_error() {
    let profile = harmonic_profile();
    let grid = RadialGrid::new(1, 1000, 2.0 * profile.radius + 1.0).unwrap();
    let u = profile.sample(&grid);
    let e = region_errors(&u, 0.01, &profile, 0.5).unwrap();
    assert_eq!((e.l2, e.l6, e.sup_compact, e.sup_inner, e.max_outside), (0.0, 0.0, 0.0, 0.0, 0.0));
    assert!(e.inner_radius < profile.radius && e.outer_radius > profile.radius);
}

#[test]
fn degenerate_layer_parameters() {
    let profile = harmonic_profile();
    let grid = RadialGrid::new(1, 100, 3.0).unwrap();
    let u = profile.sample(&grid);
    assert!(matches!(region_errors(&u, 1.0, &profile, 0.5), Err(Error::Domain(_))));
    assert!(region_errors(&u, 0.1, &profile, 0.0).is_err());
}

#[test]
fn synthetic_exponential_decay() {
    let profile = harmonic_profile();
    let tau: f64 = 0.05;
    let grid = RadialGrid::new(1, 4000, 2.0 * profile.radius + 1.0).unwrap();
    let rate = 0.75 * tau.powf(-1.5);
    let w = RadialField::from_fn(&grid, |r| (-rate * r).exp());
    let check = exterior_decay(&w, tau, &profile, 0.5, 0.5).unwrap();
    assert!(check.passes, "{check:?}");
    assert!((check.slope + rate).abs() < 1e-9 * rate);
    assert!((check.decay_beta - 1.5).abs() < 1e-9, "{check:?}");

    let slow = RadialField::from_fn(&grid, |r| (-0.25 * tau.powf(-1.5) * r).exp());
    assert!(!exterior_decay(&slow, tau, &profile, 0.5, 0.5).unwrap().passes);
}

#[test]
fn polynomial_decay_fails() {
    let profile = harmonic_profile();
    let grid = RadialGrid::new(1, 4000, 2.0 * profile.radius + 1.0).unwrap();
    let w = RadialField::from_fn(&grid, |r| 1.0 / (1.0 + r * r));
    assert!(!exterior_decay(&w, 0.05, &profile, 0.5, 0.5).unwrap().passes);
}

#[test]
fn vanishing_exterior_counts_as_decay() {
    let profile = harmonic_profile();
    let grid = RadialGrid::new(1, 4000, 2.0 * profile.radius + 1.0).unwrap();
    let check = exterior_decay(&profile.sample(&grid), 0.05, &profile, 0.5, 0.5).unwrap();
    assert!(check.passes);
    assert!(check.decay_beta.is_infinite());
}

#[test]
fn laplacian_of_the_profile_matches_the_analytic_form() {
    let profile = TfProfile::new(3, 2.0, 1.0).unwrap();
    let grid = RadialGrid::new(3, 4001, 2.0 * profile.radius + 1.0).unwrap();
    let lap = profile.sample(&grid).laplacian();
    for j in (100..1000).step_by(100) {
        let r = grid.node(j);
        let exact = profile.laplacian(r);
        assert!((lap.values()[j] - exact).abs() < 1e-4 * exact.abs(), "r = {r}");
    }
    let constant = RadialField::from_fn(&grid, |_| 0.3);
    assert_eq!(laplacian_bound(&constant, 0.01, &profile).sup_laplacian, 0.0);
}

#[test]
fn report_over_a_coarse_sweep() {
    let spec = PotentialSpec::pure_power(1.0, 2.0).unwrap();
    let mut cfg = SolverConfig::default();
    cfg.grid.n = 1024;
    let states = sweep(&cfg, &spec, &[1e3, 1e4, 1e5], None).unwrap();
    let report = scaling_report(&states, &harmonic_profile(), &spec, 0.5).unwrap();
    assert!(report.rows.windows(2).all(|w| w[1].tau < w[0].tau));
    for name in [FIT_ENERGY, FIT_SUP, FIT_SEXTIC] {
        let fit = report.fit(name).unwrap();
        assert_eq!(fit.bound, Bound::Equal);
        assert!(fit.within(0.05), "{name}: {fit:?}");
    }
    assert!(scaling_report(&states[..2], &harmonic_profile(), &spec, 0.5).is_err());
    let mut csv = Vec::new();
    report.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "N,tau,e_tau,err_energy,mu_tau,err_mu,l2_err,l6_err,sup_K,sup_inner,max_outside");
    assert_eq!(text.lines().count(), 4);
}
