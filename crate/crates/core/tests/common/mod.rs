//! Reference quadrature shared by the integration tests.
//!
//! Composite Gauss-Legendre on panels that halve in width toward both
//! endpoints, so algebraic endpoint singularities are integrated to near
//! machine precision without any change of variables.

#![allow(dead_code)]

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// `∫_a^b f` with dyadic grading toward both ends.
pub fn graded_integral(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let rule = gauss_legendre(24);
    let panel = |lo: f64, hi: f64| {
        let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        rule.iter().map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
    };
    let mid = 0.5 * (a + b);
    let half = mid - a;
    let mut total = 0.0;
    for k in 0..200 {
        let outer = half * 0.5f64.powi(k);
        let inner = 0.5 * outer;
        total += panel(a + inner, a + outer);
        total += panel(b - outer, b - inner);
    }
    total
}

/// Root of an increasing function on `[lo, hi]` by bisection.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi.abs() {
            break;
        }
    }
    0.5 * (lo + hi)
}

pub fn omega(d: u32) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        _ => 4.0 * std::f64::consts::PI,
    }
}

/// Thomas-Fermi chemical potential from the mass normalization alone.
pub fn tf_mu_by_root_finding(d: u32, p: f64, c0: f64) -> f64 {
    let mass = |mu: f64| {
        let r_edge = (mu / c0).powf(1.0 / p);
        let df = f64::from(d);
        omega(d)
            * graded_integral(
                |r| r.powf(df - 1.0) * (mu - c0 * r.powf(p)).max(0.0).sqrt(),
                0.0,
                r_edge,
            )
    };
    bisect(|mu| mass(mu) - 1.0, 1e-6, 1e3)
}

/// `∫ (C0/2)|x|^p u² + u⁶/6` for `u = (μ - C0 r^p)_+^{1/4}`.
pub fn tf_energy_by_quadrature(d: u32, p: f64, c0: f64, mu: f64) -> f64 {
    let r_edge = (mu / c0).powf(1.0 / p);
    let df = f64::from(d);
    omega(d)
        * graded_integral(
            |r| {
                let g = (mu - c0 * r.powf(p)).max(0.0);
                r.powf(df - 1.0) * (0.5 * c0 * r.powf(p) * g.sqrt() + g.powf(1.5) / 6.0)
            },
            0.0,
            r_edge,
        )
}
