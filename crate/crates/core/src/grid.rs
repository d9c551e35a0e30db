//! Uniform radial grids, dimension-weighted quadrature and the radial
//! Laplacian for `d = 1, 2, 3`.
//!
//! Nodes are `r_j = j h`, `j = 0..n-1`, with `h = r_max / (n - 1)`. Integrals
//! `∫ f(|x|) dx` become `Σ_j m_j f(r_j)` with trapezoid weights
//! `m_j = ω_d r_j^{d-1} h` (halved at `r_max`). At the origin the weight is the
//! volume of the half cell `ω_d (h/2)^d / d`, which coincides with the
//! trapezoid weight for `d = 1` and keeps the discrete Laplacian symmetric
//! for `d = 2, 3`.
//!
//! The Laplacian is stored as edge conductances `c_{j+1/2}` so that
//! `(Δu)_j = [c_{j+1/2}(u_{j+1} - u_j) - c_{j-1/2}(u_j - u_{j-1})] / m_j`.
//! Away from the origin this is the central stencil
//! `u'' + (d-1) u' / r`; at the origin it is `d u''(0)` with `u'(0) = 0`.
//! The matching gradient energy `Σ c_{j+1/2} (u_{j+1} - u_j)²` satisfies
//! `⟨-Δu, u⟩ = ∫|∇u|²` exactly for fields vanishing at `r_max`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::thomas_fermi::omega;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    d: u32,
    n: usize,
    r_max: f64,
}

impl RadialGrid {
    pub const MIN_NODES: usize = 64;

    pub fn new(d: u32, n: usize, r_max: f64) -> Result<Self> {
        omega(d)?;
        if n < Self::MIN_NODES {
            return Err(Error::domain(format!(
                "grid needs at least {} nodes, got {n}",
                Self::MIN_NODES
            )));
        }
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(Error::domain(format!("r_max must be positive, got {r_max}")));
        }
        Ok(RadialGrid { d, n, r_max })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn spacing(&self) -> f64 {
        self.r_max / (self.n - 1) as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        if j == self.n - 1 {
            self.r_max
        } else {
            j as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |j| self.node(j))
    }

    pub fn omega(&self) -> f64 {
        omega(self.d).expect("dimension validated on construction")
    }

    /// Quadrature weight of node `j`.
    pub fn weight(&self, j: usize) -> f64 {
        let h = self.spacing();
        let w = self.omega();
        let d = self.d as i32;
        if j == 0 {
            w * (0.5 * h).powi(d) / f64::from(self.d)
        } else if j == self.n - 1 {
            0.5 * w * self.r_max.powi(d - 1) * h
        } else {
            w * self.node(j).powi(d - 1) * h
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.weight(j)).collect()
    }

    /// Conductance of the edge between nodes `j` and `j + 1`.
    pub fn conductance(&self, j: usize) -> f64 {
        let h = self.spacing();
        let jf = j as f64;
        let shape = match self.d {
            1 => 1.0,
            2 => jf + 0.5,
            _ if j == 0 => 0.25,
            _ => jf * (jf + 1.0),
        };
        self.omega() * h.powi(self.d as i32 - 2) * shape
    }

    /// The same node count and dimension over `[0, factor · r_max]`.
    pub fn scaled(&self, factor: f64) -> Result<RadialGrid> {
        RadialGrid::new(self.d, self.n, self.r_max * factor)
    }
}

/// Samples of a radial function on a [`RadialGrid`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialField {
    grid: RadialGrid,
    values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::domain(format!(
                "field has {} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite field value at node {j}")));
        }
        Ok(RadialField { grid, values })
    }

    pub fn zeros(grid: &RadialGrid) -> Self {
        RadialField {
            grid: *grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: &RadialGrid, f: impl Fn(f64) -> f64) -> Self {
        RadialField {
            grid: *grid,
            values: grid.nodes().map(f).collect(),
        }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `∫ |u|^power |x|^weight_p dx`.
    pub fn integrate(&self, power: u32, weight_p: f64) -> f64 {
        self.integrate_real(f64::from(power), weight_p)
    }

    pub fn integrate_real(&self, power: f64, weight_p: f64) -> f64 {
        let g = &self.grid;
        self.values
            .iter()
            .enumerate()
            .map(|(j, u)| {
                let r = g.node(j);
                let radial = if weight_p == 0.0 { 1.0 } else { r.powf(weight_p) };
                g.weight(j) * u.abs().powf(power) * radial
            })
            .sum()
    }

    /// `L^q` norm; `q = f64::INFINITY` gives the maximum modulus.
    pub fn lq_norm(&self, q: f64) -> f64 {
        if q.is_infinite() {
            self.max_abs()
        } else {
            self.integrate_real(q, 0.0).powf(1.0 / q)
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `∫ |∇u|²` from forward differences weighted by the edge conductances.
    pub fn gradient_energy(&self) -> f64 {
        self.values
            .windows(2)
            .enumerate()
            .map(|(j, w)| self.grid.conductance(j) * (w[1] - w[0]).powi(2))
            .sum()
    }

    pub fn laplacian(&self) -> RadialField {
        let g = &self.grid;
        let n = g.len();
        let h = g.spacing();
        let u = &self.values;
        let mut out = vec![0.0; n];
        for j in 0..n - 1 {
            let right = g.conductance(j) * (u[j + 1] - u[j]);
            let left = if j == 0 {
                0.0
            } else {
                g.conductance(j - 1) * (u[j] - u[j - 1])
            };
            out[j] = (right - left) / g.weight(j);
        }
        // Dirichlet ghost value 0 beyond r_max
        let last = n - 1;
        let r = g.node(last);
        out[last] = (u[last - 1] - 2.0 * u[last]) / (h * h)
            - f64::from(g.d() - 1) / r * u[last - 1] / (2.0 * h);
        RadialField {
            grid: *g,
            values: out,
        }
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> RadialField {
        RadialField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(j, &v)| f(self.grid.node(j), v))
                .collect(),
        }
    }

    /// Write the field as CSV with columns `r,value`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "r,value")?;
        for (j, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", fmt_f64(self.grid.node(j)), fmt_f64(*v))?;
        }
        Ok(())
    }
}

pub fn integrate(field: &RadialField, power: u32, weight_p: f64) -> f64 {
    field.integrate(power, weight_p)
}

pub fn lq_norm(field: &RadialField, q: f64) -> f64 {
    field.lq_norm(q)
}

pub fn apply_radial_laplacian(field: &RadialField) -> RadialField {
    field.laplacian()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn nodes_span_the_interval() {
        let g = RadialGrid::new(2, 101, 2.5).unwrap();
        assert_eq!(g.node(0), 0.0);
        assert_eq!(g.node(100), 2.5);
        assert!(g.nodes().collect::<Vec<_>>().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn rejects_small_or_degenerate_grids() {
        assert!(RadialGrid::new(1, 10, 1.0).is_err());
        assert!(RadialGrid::new(1, 100, 0.0).is_err());
        assert!(RadialGrid::new(5, 100, 1.0).is_err());
        let g = RadialGrid::new(1, 100, 1.0).unwrap();
        assert!(RadialField::new(g, vec![0.0; 99]).is_err());
        let mut vals = vec![0.0; 100];
        vals[3] = f64::NAN;
        assert!(RadialField::new(g, vals).is_err());
    }

    #[test]
    fn constant_field_in_one_dimension() {
        let g = RadialGrid::new(1, 128, 1.0).unwrap();
        let f = RadialField::from_fn(&g, |_| 1.0);
        assert!((f.integrate(2, 0.0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn linear_field_in_three_dimensions() {
        let exact = 4.0 * PI / 5.0;
        let err = |n| {
            let g = RadialGrid::new(3, n, 1.0).unwrap();
            (RadialField::from_fn(&g, |r| r).integrate(2, 0.0) - exact).abs()
        };
        let (e1, e2) = (err(101), err(201));
        assert!(e1 < 1e-3);
        // second order
        assert!(e1 / e2 > 3.5, "{e1} {e2}");
    }

    #[test]
    fn zero_field_norms() {
        let g = RadialGrid::new(2, 64, 1.0).unwrap();
        let z = RadialField::zeros(&g);
        for q in [1.0, 2.0, 6.0, f64::INFINITY] {
            assert_eq!(z.lq_norm(q), 0.0);
        }
    }

    #[test]
    fn laplacian_of_quadratic_in_three_dimensions() {
        let g = RadialGrid::new(3, 200, 1.0).unwrap();
        let lap = RadialField::from_fn(&g, |r| r * r).laplacian();
        // exact at the origin and from the second interior node on
        assert!((lap.values()[0] - 6.0).abs() < 1e-9);
        for j in 2..g.len() - 1 {
            assert!((lap.values()[j] - 6.0).abs() < 1e-8, "node {j}: {}", lap.values()[j]);
        }
    }

    #[test]
    fn laplacian_of_constant_vanishes_in_interior() {
        for d in 1..=3 {
            let g = RadialGrid::new(d, 80, 3.0).unwrap();
            let lap = RadialField::from_fn(&g, |_| 1.0).laplacian();
            for j in 0..g.len() - 1 {
                assert_eq!(lap.values()[j], 0.0);
            }
        }
    }

    #[test]
    fn laplacian_of_cosine_at_pi() {
        let err = |n: usize| {
            let g = RadialGrid::new(1, n, 2.0 * PI).unwrap();
            let j = (n - 1) / 2;
            assert!((g.node(j) - PI).abs() < 1e-12);
            (RadialField::from_fn(&g, f64::cos).laplacian().values()[j] - 1.0).abs()
        };
        let (e1, e2) = (err(101), err(201));
        assert!(e1 < 1e-2);
        assert!(e1 / e2 > 3.5);
    }

    #[test]
    fn laplacian_is_symmetric_for_dirichlet_fields() {
        for d in 1..=3 {
            let g = RadialGrid::new(d, 150, 2.0).unwrap();
            let u = RadialField::from_fn(&g, |r| (1.0 - r * r / 4.0) * (-r).exp());
            let v = RadialField::from_fn(&g, |r| (4.0 - r * r) * (1.0 + r).cos());
            let w = g.weights();
            let (lu, lv) = (u.laplacian(), v.laplacian());
            // exclude the Dirichlet node
            let a: f64 = (0..g.len() - 1).map(|j| w[j] * lu.values()[j] * v.values()[j]).sum();
            let b: f64 = (0..g.len() - 1).map(|j| w[j] * lv.values()[j] * u.values()[j]).sum();
            assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "d={d}: {a} vs {b}");
            // and ⟨-Δu, u⟩ is the gradient energy
            let ke: f64 = -(0..g.len() - 1).map(|j| w[j] * lu.values()[j] * u.values()[j]).sum::<f64>();
            assert!((ke - u.gradient_energy()).abs() < 1e-10 * ke.abs());
        }
    }

    #[test]
    fn csv_layout() {
        let g = RadialGrid::new(1, 64, 1.0).unwrap();
        let mut buf = Vec::new();
        RadialField::zeros(&g).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("r,value"));
        assert_eq!(text.lines().count(), 65);
    }
}
