//! Radial trapping potentials.
//!
//! A potential is admissible when it is non-negative and non-decreasing in
//! `r`, and its tail is described by declared constants: `∇V·x / (p r^p) → C0`,
//! `(∇V·x - C0 p r^p) / r^α → C1` and `(V - C0 r^p) / r^α → C2`. The constants
//! are declared by the caller, never inferred; [`verify_tail_conditions`]
//! audits a declaration numerically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Declared tail constants of a potential.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailConstants {
    #[serde(rename = "C0")]
    pub c0: f64,
    pub p: f64,
    pub alpha: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
}

impl TailConstants {
    /// Leading behaviour `C0 r^p` with no subleading correction.
    pub fn leading(c0: f64, p: f64) -> Self {
        TailConstants {
            c0,
            p,
            alpha: 0.0,
            c1: 0.0,
            c2: 0.0,
        }
    }

    /// Convergence exponent `σ = min(p - α, 1)`.
    pub fn sigma(&self) -> f64 {
        (self.p - self.alpha).min(1.0)
    }

    fn validate(&self) -> Result<()> {
        let TailConstants { c0, p, alpha, c1, c2 } = *self;
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(Error::Inadmissible(format!("C0 must be positive, got {c0}")));
        }
        if !(p >= 2.0 && p.is_finite()) {
            return Err(Error::Inadmissible(format!("p must be at least 2, got {p}")));
        }
        if !(alpha >= 0.0 && alpha < p) {
            return Err(Error::Inadmissible(format!("alpha must lie in [0, p), got {alpha}")));
        }
        if !(c1 >= 0.0 && c2 >= 0.0) {
            return Err(Error::Inadmissible(format!(
                "C1 and C2 must be non-negative, got {c1} and {c2}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerTerm {
    pub coef: f64,
    pub power: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PotentialKind {
    PurePower,
    PolynomialSum(Vec<PowerTerm>),
    /// `r² + a exp(-b r²)`
    MagneticTrap { a: f64, b: f64 },
    Tabulated(MonotoneCubic),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KindTag {
    PurePower,
    PolynomialSum,
    MagneticTrap,
    Tabulated,
}

/// An admissible radial potential together with its declared tail constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialRecord", into = "PotentialRecord")]
pub struct PotentialSpec {
    kind: PotentialKind,
    tail: TailConstants,
}

impl PotentialSpec {
    /// `V(r) = C0 r^p`.
    pub fn pure_power(c0: f64, p: f64) -> Result<Self> {
        let tail = TailConstants::leading(c0, p);
        tail.validate()?;
        Ok(PotentialSpec {
            kind: PotentialKind::PurePower,
            tail,
        })
    }

    /// `V(r) = Σ a_i r^{p_i}` with caller-declared tail constants.
    pub fn polynomial_sum(terms: &[(f64, f64)], tail: TailConstants) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Inadmissible("polynomial potential without terms".into()));
        }
        for &(a, p) in terms {
            if !(a > 0.0) || !(p >= 2.0) {
                return Err(Error::Inadmissible(format!(
                    "polynomial term {a} r^{p} needs a > 0 and p >= 2"
                )));
            }
        }
        tail.validate()?;
        let terms = terms
            .iter()
            .map(|&(coef, power)| PowerTerm { coef, power })
            .collect();
        Ok(PotentialSpec {
            kind: PotentialKind::PolynomialSum(terms),
            tail,
        })
    }

    /// The laser-dressed magnetic trap `r² + a exp(-b r²)`, declared with
    /// `C0 = 1, p = 2, α = 0, C1 = C2 = 0` (the correction decays faster than
    /// any power).
    pub fn magnetic_trap(a: f64, b: f64) -> Result<Self> {
        Self::magnetic_trap_with_tail(a, b, TailConstants::leading(1.0, 2.0))
    }

    fn magnetic_trap_with_tail(a: f64, b: f64, tail: TailConstants) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::Inadmissible(format!(
                "magnetic trap needs a, b > 0, got a = {a}, b = {b}"
            )));
        }
        // V'(r) = 2r (1 - ab exp(-b r²)) is non-negative iff ab <= 1
        if a * b > 1.0 {
            return Err(Error::Inadmissible(format!(
                "magnetic trap with ab = {} > 1 is not monotone",
                a * b
            )));
        }
        tail.validate()?;
        Ok(PotentialSpec {
            kind: PotentialKind::MagneticTrap { a, b },
            tail,
        })
    }

    /// Monotone piecewise-cubic interpolation of `(r, V)` samples starting at
    /// `r = 0`.
    pub fn tabulated(r: Vec<f64>, v: Vec<f64>, tail: TailConstants) -> Result<Self> {
        tail.validate()?;
        let table = MonotoneCubic::new(r, v)?;
        Ok(PotentialSpec {
            kind: PotentialKind::Tabulated(table),
            tail,
        })
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn tail(&self) -> &TailConstants {
        &self.tail
    }

    pub fn sigma(&self) -> f64 {
        self.tail.sigma()
    }

    /// `V(r)`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        Ok(match &self.kind {
            PotentialKind::PurePower => self.tail.c0 * r.powf(self.tail.p),
            PotentialKind::PolynomialSum(terms) => {
                terms.iter().map(|t| t.coef * r.powf(t.power)).sum()
            }
            PotentialKind::MagneticTrap { a, b } => r * r + a * (-b * r * r).exp(),
            PotentialKind::Tabulated(table) => table.value(r)?,
        })
    }

    /// `∇V(x)·x = r V'(r)`.
    pub fn radial_virial(&self, r: f64) -> Result<f64> {
        Ok(self.virial_sample(r)?.value)
    }

    /// `r V'(r)` together with a flag telling whether the derivative had to be
    /// taken numerically.
    pub fn virial_sample(&self, r: f64) -> Result<VirialSample> {
        check_radius(r)?;
        let exact = |value| VirialSample {
            value,
            numerical_fallback: false,
        };
        Ok(match &self.kind {
            PotentialKind::PurePower => exact(self.tail.p * self.tail.c0 * r.powf(self.tail.p)),
            PotentialKind::PolynomialSum(terms) => exact(
                terms
                    .iter()
                    .map(|t| t.power * t.coef * r.powf(t.power))
                    .sum(),
            ),
            PotentialKind::MagneticTrap { a, b } => {
                let r2 = r * r;
                exact(2.0 * r2 * (1.0 - a * b * (-b * r2).exp()))
            }
            PotentialKind::Tabulated(table) => table.virial(r)?,
        })
    }

    /// `τ^p V(r / τ)`, the potential seen by the rescaled problem.
    pub fn rescaled(&self, r: f64, tau: f64) -> Result<f64> {
        match &self.kind {
            PotentialKind::PurePower => {
                check_radius(r)?;
                Ok(self.tail.c0 * r.powf(self.tail.p))
            }
            _ => Ok(tau.powf(self.tail.p) * self.eval(r / tau)?),
        }
    }

    /// `τ^p (∇V·x)(r / τ)`, the virial term of the rescaled problem.
    pub fn rescaled_virial(&self, r: f64, tau: f64) -> Result<f64> {
        match &self.kind {
            PotentialKind::PurePower => {
                check_radius(r)?;
                Ok(self.tail.p * self.tail.c0 * r.powf(self.tail.p))
            }
            _ => Ok(tau.powf(self.tail.p) * self.radial_virial(r / tau)?),
        }
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r >= 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("radius must be non-negative and finite, got {r}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VirialSample {
    pub value: f64,
    pub numerical_fallback: bool,
}

pub fn eval(spec: &PotentialSpec, r: f64) -> Result<f64> {
    spec.eval(r)
}

pub fn radial_virial(spec: &PotentialSpec, r: f64) -> Result<f64> {
    spec.radial_virial(r)
}

/// Empirical tail limits at the largest sample radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub r: f64,
    /// `(∇V·x) / (p r^p)`, expected `C0`.
    pub virial_ratio: f64,
    /// `(∇V·x - C0 p r^p) / r^α`, expected `C1`.
    pub virial_subleading: f64,
    /// `(V - C0 r^p) / r^α`, expected `C2`.
    pub value_subleading: f64,
    pub tolerance: f64,
    pub virial_ratio_ok: bool,
    pub virial_subleading_ok: bool,
    pub value_subleading_ok: bool,
}

impl ConditionReport {
    pub fn passes(&self) -> bool {
        self.virial_ratio_ok && self.virial_subleading_ok && self.value_subleading_ok
    }
}

/// Audit the declared tail constants of `spec` at the largest of `r_samples`.
pub fn verify_tail_conditions(
    spec: &PotentialSpec,
    r_samples: &[f64],
    tolerance: f64,
) -> Result<ConditionReport> {
    let r = r_samples
        .iter()
        .copied()
        .fold(f64::NAN, f64::max);
    if !(r > 0.0) {
        return Err(Error::domain("tail audit needs at least one positive sample"));
    }
    let TailConstants { c0, p, alpha, c1, c2 } = *spec.tail();
    let v = spec.eval(r)?;
    let vx = spec.radial_virial(r)?;
    let rp = r.powf(p);
    let ra = r.powf(alpha);
    let virial_ratio = vx / (p * rp);
    let virial_subleading = (vx - c0 * p * rp) / ra;
    let value_subleading = (v - c0 * rp) / ra;
    let close = |x: f64, target: f64| (x - target).abs() <= tolerance * target.abs().max(1.0);
    Ok(ConditionReport {
        r,
        virial_ratio,
        virial_subleading,
        value_subleading,
        tolerance,
        virial_ratio_ok: close(virial_ratio, c0),
        virial_subleading_ok: close(virial_subleading, c1),
        value_subleading_ok: close(value_subleading, c2),
    })
}

/// Shape-preserving (Fritsch–Carlson) cubic Hermite interpolant.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(Error::Inadmissible(
                "table needs at least two (r, V) pairs of equal length".into(),
            ));
        }
        if x[0] != 0.0 {
            return Err(Error::Inadmissible("table must start at r = 0".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Inadmissible("table radii must increase strictly".into()));
        }
        if y.iter().any(|v| !(*v >= 0.0)) || y.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Inadmissible(
                "tabulated potential must be non-negative and non-decreasing".into(),
            ));
        }
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut m = vec![0.0; n];
        if n == 2 {
            m[0] = delta[0];
            m[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                let (d0, d1) = (delta[k - 1], delta[k]);
                if d0 * d1 > 0.0 {
                    let (h0, h1) = (h[k - 1], h[k]);
                    let w1 = 2.0 * h1 + h0;
                    let w2 = h1 + 2.0 * h0;
                    m[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
                }
            }
            m[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            m[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(MonotoneCubic { x, y, slopes: m })
    }

    fn locate(&self, r: f64) -> Result<usize> {
        let (lo, hi) = (self.x[0], *self.x.last().expect("non-empty"));
        if r < lo || r > hi {
            return Err(Error::Extrapolation { r, lo, hi });
        }
        let k = self.x.partition_point(|&x| x <= r);
        Ok(k.saturating_sub(1).min(self.x.len() - 2))
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        let k = self.locate(r)?;
        let h = self.x[k + 1] - self.x[k];
        let t = (r - self.x[k]) / h;
        let (t2, t3) = (t * t, t * t * t);
        Ok((2.0 * t3 - 3.0 * t2 + 1.0) * self.y[k]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[k]
            + (-2.0 * t3 + 3.0 * t2) * self.y[k + 1]
            + (t3 - t2) * h * self.slopes[k + 1])
    }

    pub fn derivative(&self, r: f64) -> Result<f64> {
        let k = self.locate(r)?;
        let h = self.x[k + 1] - self.x[k];
        let t = (r - self.x[k]) / h;
        let t2 = t * t;
        Ok((6.0 * t2 - 6.0 * t) / h * self.y[k]
            + (3.0 * t2 - 4.0 * t + 1.0) * self.slopes[k]
            + (-6.0 * t2 + 6.0 * t) / h * self.y[k + 1]
            + (3.0 * t2 - 2.0 * t) * self.slopes[k + 1])
    }

    fn virial(&self, r: f64) -> Result<VirialSample> {
        let last = *self.x.last().expect("non-empty");
        if r == last {
            // no right neighbourhood at the table edge: backward difference
            let step = 1e-6 * (last - self.x[self.x.len() - 2]);
            let slope = (self.value(r)? - self.value(r - step)?) / step;
            return Ok(VirialSample {
                value: r * slope,
                numerical_fallback: true,
            });
        }
        Ok(VirialSample {
            value: r * self.derivative(r)?,
            numerical_fallback: false,
        })
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

/// On-disk form of a [`PotentialSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialRecord {
    pub kind: KindTag,
    #[serde(rename = "C0")]
    pub c0: f64,
    pub p: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(rename = "C1", default)]
    pub c1: f64,
    #[serde(rename = "C2", default)]
    pub c2: f64,
    #[serde(default)]
    pub params: PotentialParams,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PotentialParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<f64>>,
}

impl TryFrom<PotentialRecord> for PotentialSpec {
    type Error = Error;

    fn try_from(rec: PotentialRecord) -> Result<Self> {
        let tail = TailConstants {
            c0: rec.c0,
            p: rec.p,
            alpha: rec.alpha,
            c1: rec.c1,
            c2: rec.c2,
        };
        let missing = |what: &str| Error::Config(format!("{:?} potential needs params.{what}", rec.kind));
        match rec.kind {
            KindTag::PurePower => {
                if tail.c1 != 0.0 || tail.c2 != 0.0 || tail.alpha != 0.0 {
                    return Err(Error::Inadmissible(
                        "a pure power has alpha = C1 = C2 = 0".into(),
                    ));
                }
                PotentialSpec::pure_power(tail.c0, tail.p)
            }
            KindTag::PolynomialSum => {
                let terms = rec.params.terms.ok_or_else(|| missing("terms"))?;
                let terms: Vec<(f64, f64)> = terms.iter().map(|t| (t[0], t[1])).collect();
                PotentialSpec::polynomial_sum(&terms, tail)
            }
            KindTag::MagneticTrap => {
                let a = rec.params.a.ok_or_else(|| missing("a"))?;
                let b = rec.params.b.ok_or_else(|| missing("b"))?;
                PotentialSpec::magnetic_trap_with_tail(a, b, tail)
            }
            KindTag::Tabulated => {
                let r = rec.params.r.ok_or_else(|| missing("r"))?;
                let v = rec.params.v.ok_or_else(|| missing("v"))?;
                PotentialSpec::tabulated(r, v, tail)
            }
        }
    }
}

impl From<PotentialSpec> for PotentialRecord {
    fn from(spec: PotentialSpec) -> Self {
        let TailConstants { c0, p, alpha, c1, c2 } = spec.tail;
        let (kind, params) = match spec.kind {
            PotentialKind::PurePower => (KindTag::PurePower, PotentialParams::default()),
            PotentialKind::PolynomialSum(terms) => (
                KindTag::PolynomialSum,
                PotentialParams {
                    terms: Some(terms.iter().map(|t| [t.coef, t.power]).collect()),
                    ..Default::default()
                },
            ),
            PotentialKind::MagneticTrap { a, b } => (
                KindTag::MagneticTrap,
                PotentialParams {
                    a: Some(a),
                    b: Some(b),
                    ..Default::default()
                },
            ),
            PotentialKind::Tabulated(table) => (
                KindTag::Tabulated,
                PotentialParams {
                    r: Some(table.x),
                    v: Some(table.y),
                    ..Default::default()
                },
            ),
        };
        PotentialRecord {
            kind,
            c0,
            p,
            alpha,
            c1,
            c2,
            params,
        }
    }
}
