//! Radial grids with product-integration weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre, CompensatedSum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum GridLaw {
    Logarithmic { r_min: f64, r_max: f64 },
    /// Logarithmic up to `r_max/2`, then quadratically clustered toward `r_max`.
    LogGradedEnd { r_min: f64, r_max: f64 },
    UniformInRSquared { r_max: f64 },
    /// Gauss–Legendre panels on `[0, radius]`, geometrically graded toward `radius`.
    GradedPanels { radius: f64, order: usize, levels: usize },
    Custom,
}

/// Nodes and weights for `∫₀^{r_max} g(r) r^{d-1} dr`.
///
/// The weights integrate a cubic interpolant of `g` against `r^{d-1}` exactly on
/// every interval, so polynomial `g` up to degree three is reproduced to rounding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    dim: u32,
    law: GridLaw,
}

impl RadialGrid {
    /// Log-stretched grid for atoms (`d = 3`).
    pub fn logarithmic(r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        if !(r_min > 0.0) || !(r_max > r_min) || n < 4 {
            return Err(Error::invalid(format!(
                "log grid needs 0 < r_min < r_max and n >= 4 (got {r_min}, {r_max}, {n})"
            )));
        }
        let ratio = (r_max / r_min).ln();
        let nodes: Vec<f64> = (0..n)
            .map(|i| {
                if i == n - 1 {
                    r_max
                } else {
                    r_min * (ratio * i as f64 / (n - 1) as f64).exp()
                }
            })
            .collect();
        Self::with_law(nodes, 3, GridLaw::Logarithmic { r_min, r_max })
    }

    /// Grid for an ion whose density ends at `r_max`: logarithmic to `r_max/2`,
    /// then nodes at `r_max − (r_max/2)(1−t)²` so the kink at the edge is resolved.
    pub fn log_graded_end(r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        let mid = 0.5 * r_max;
        if !(mid > 10.0 * r_min) || n < 16 {
            return Self::logarithmic(r_min, r_max, n);
        }
        let span = (mid / r_min).ln();
        let mut n2 = n / 10;
        for _ in 0..4 {
            let h = span / (n - n2 - 1) as f64;
            n2 = ((2.0 / h).round() as usize).clamp(4, n / 2);
        }
        let n1 = n - n2;
        let mut nodes: Vec<f64> = (0..n1).map(|i| r_min * (span * i as f64 / (n1 - 1) as f64).exp()).collect();
        nodes[n1 - 1] = mid;
        for k in 1..=n2 {
            let t = k as f64 / n2 as f64;
            nodes.push(r_max - mid * (1.0 - t) * (1.0 - t));
        }
        *nodes.last_mut().unwrap() = r_max;
        Self::with_law(nodes, 3, GridLaw::LogGradedEnd { r_min, r_max })
    }

    /// Default atom grid: `r ∈ [1e-6, 1e4]` with 2000 nodes.
    pub fn atom_default() -> Self {
        Self::logarithmic(1e-6, 1e4, 2000).expect("static grid parameters")
    }

    /// Grid uniform in `r²` for dots (`d = 2`).
    pub fn uniform_in_r_squared(r_max: f64, n: usize) -> Result<Self> {
        if !(r_max > 0.0) || n < 4 {
            return Err(Error::invalid("uniform-in-r² grid needs r_max > 0 and n >= 4"));
        }
        let nodes = (0..n).map(|i| r_max * ((i as f64 + 1.0) / n as f64).sqrt()).collect();
        Self::with_law(nodes, 2, GridLaw::UniformInRSquared { r_max })
    }

    /// Arbitrary strictly increasing positive nodes.
    pub fn custom(nodes: Vec<f64>, dim: u32) -> Result<Self> {
        Self::with_law(nodes, dim, GridLaw::Custom)
    }

    /// Nodes with precomputed weights (used by panel discretisations).
    pub(crate) fn from_parts(nodes: Vec<f64>, weights: Vec<f64>, dim: u32, law: GridLaw) -> Self {
        debug_assert_eq!(nodes.len(), weights.len());
        Self { nodes, weights, dim, law }
    }

    fn with_law(nodes: Vec<f64>, dim: u32, law: GridLaw) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::invalid(format!("grid dimension must be 2 or 3, got {dim}")));
        }
        if nodes.len() < 4 {
            return Err(Error::invalid("grid needs at least four nodes"));
        }
        if !(nodes[0] > 0.0) || nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("grid nodes must be positive and strictly increasing"));
        }
        let weights = product_weights(&nodes, dim, !matches!(law, GridLaw::Logarithmic { .. } | GridLaw::LogGradedEnd { .. }));
        Ok(Self { nodes, weights, dim, law })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn law(&self) -> GridLaw {
        self.law
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.nodes.last().expect("non-empty grid")
    }

    /// `Σ w_i g_i ≈ ∫₀^{r_max} g(r) r^{d-1} dr`.
    ///
    /// On logarithmic grids the piece below the first node is extrapolated as a
    /// power law fitted to the first two samples, which is exact for `r^β`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.nodes.len());
        let mut acc: CompensatedSum = self.weights.iter().zip(values).map(|(w, v)| w * v).collect();
        acc.add(self.origin_piece(values, self.dim - 1));
        acc.value()
    }

    fn log_law(&self) -> bool {
        matches!(self.law, GridLaw::Logarithmic { .. } | GridLaw::LogGradedEnd { .. })
    }

    /// `∫₀^{r_0} g r^power dr` for logarithmic grids (zero otherwise; the
    /// weights already carry it).
    fn origin_piece(&self, values: &[f64], power: u32) -> f64 {
        if !self.log_law() {
            return 0.0;
        }
        let (r0, r1) = (self.nodes[0], self.nodes[1]);
        let (g0, g1) = (values[0], values[1]);
        let p1 = power as f64 + 1.0;
        if g0 == 0.0 {
            return 0.0;
        }
        if g1 / g0 > 0.0 {
            let beta = (g1 / g0).ln() / (r1 / r0).ln();
            if p1 + beta > 0.05 {
                return g0 * r0.powf(p1) / (p1 + beta);
            }
        }
        g0 * r0.powf(p1) / p1
    }

    /// Integral of `g(r) r^{d-1}` from 0 up to every node (cumulative).
    pub fn cumulative(&self, values: &[f64]) -> Vec<f64> {
        self.cumulative_with_power(values, self.dim - 1)
    }

    /// Integral of `g(r) r^{power}` from each node to `r_max`.
    pub fn tail_cumulative(&self, values: &[f64], power: u32) -> Vec<f64> {
        let n = self.nodes.len();
        let increments = interval_integrals(&self.nodes, values, power);
        let mut out = vec![0.0; n];
        let mut acc = CompensatedSum::new();
        for i in (0..n - 1).rev() {
            acc.add(increments[i]);
            out[i] = acc.value();
        }
        out
    }

    /// Integral of `g(r) r^{power}` from 0 up to every node.
    pub fn cumulative_with_power(&self, values: &[f64], power: u32) -> Vec<f64> {
        let log = self.log_law();
        let mut out = cumulative_product(&self.nodes, values, power, !log);
        let extra = self.origin_piece(values, power);
        out.iter_mut().for_each(|v| *v += extra);
        out
    }
}

/// Four-point Lagrange stencil start for interval `i`.
fn stencil(i: usize, n: usize) -> usize {
    i.saturating_sub(1).min(n - 4)
}

fn lagrange(ts: &[f64; 4], k: usize, t: f64) -> f64 {
    let mut l = 1.0;
    for j in 0..4 {
        if j != k {
            l *= (t - ts[j]) / (ts[k] - ts[j]);
        }
    }
    l
}

/// For each interval, `∫_{r_i}^{r_{i+1}} p(r) r^power dr` with `p` the local cubic interpolant.
fn interval_contributions(nodes: &[f64], power: u32) -> Vec<([f64; 4], usize)> {
    let n = nodes.len();
    let (gx, gw) = gauss_legendre(4);
    let mut out = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let j0 = stencil(i, n);
        let r0 = nodes[i];
        let h = nodes[i + 1] - r0;
        let ts = [
            (nodes[j0] - r0) / h,
            (nodes[j0 + 1] - r0) / h,
            (nodes[j0 + 2] - r0) / h,
            (nodes[j0 + 3] - r0) / h,
        ];
        let mut w = [0.0; 4];
        for (x, wg) in gx.iter().zip(&gw) {
            let t = 0.5 * (x + 1.0);
            let rp = (r0 + h * t).powi(power as i32);
            for (k, wk) in w.iter_mut().enumerate() {
                *wk += 0.5 * wg * h * rp * lagrange(&ts, k, t);
            }
        }
        out.push((w, j0));
    }
    out
}

fn interval_integrals(nodes: &[f64], values: &[f64], power: u32) -> Vec<f64> {
    interval_contributions(nodes, power)
        .into_iter()
        .map(|(w, j0)| (0..4).map(|k| w[k] * values[j0 + k]).sum())
        .collect()
}

/// Integral over `[0, r_0]` by cubic extrapolation, or nothing when the caller
/// handles that piece separately.
fn origin_weights(nodes: &[f64], power: u32, include: bool) -> [f64; 4] {
    let r0 = nodes[0];
    if !include {
        return [0.0; 4];
    }
    let (gx, gw) = gauss_legendre(4);
    let ts = [nodes[0], nodes[1], nodes[2], nodes[3]];
    let mut w = [0.0; 4];
    for (x, wg) in gx.iter().zip(&gw) {
        let r = 0.5 * (x + 1.0) * r0;
        let rp = r.powi(power as i32);
        for (k, wk) in w.iter_mut().enumerate() {
            *wk += 0.5 * wg * r0 * rp * lagrange(&ts, k, r);
        }
    }
    w
}

fn product_weights(nodes: &[f64], dim: u32, with_origin: bool) -> Vec<f64> {
    let n = nodes.len();
    let power = dim - 1;
    let mut weights = vec![0.0; n];
    let ow = origin_weights(nodes, power, with_origin);
    for k in 0..4 {
        weights[k] += ow[k];
    }
    for (w, j0) in interval_contributions(nodes, power) {
        for k in 0..4 {
            weights[j0 + k] += w[k];
        }
    }
    weights
}

fn cumulative_product(nodes: &[f64], values: &[f64], power: u32, with_origin: bool) -> Vec<f64> {
    let n = nodes.len();
    assert_eq!(values.len(), n);
    let ow = origin_weights(nodes, power, with_origin);
    let mut acc = CompensatedSum::new();
    acc.add((0..4).map(|k| ow[k] * values[k]).sum());
    let mut out = vec![0.0; n];
    out[0] = acc.value();
    for (i, inc) in interval_integrals(nodes, values, power).into_iter().enumerate() {
        acc.add(inc);
        out[i + 1] = acc.value();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_polynomials(grid: &RadialGrid) {
        let rm = grid.r_max();
        let p = (grid.dim() - 1) as i32;
        for deg in 0..=3 {
            let vals: Vec<f64> = grid.nodes().iter().map(|r| r.powi(deg)).collect();
            let exact = rm.powi(deg + p + 1) / (deg + p + 1) as f64;
            let got = grid.integrate(&vals);
            assert!(((got - exact) / exact).abs() < 1e-10, "deg {deg}: {got} vs {exact}");
        }
    }

    #[test]
    fn log_grid_reproduces_cubics() {
        check_polynomials(&RadialGrid::atom_default());
        check_polynomials(&RadialGrid::logarithmic(1e-3, 50.0, 300).unwrap());
    }

    #[test]
    fn r_squared_grid_reproduces_cubics() {
        check_polynomials(&RadialGrid::uniform_in_r_squared(2.0, 200).unwrap());
    }

    #[test]
    fn cumulative_matches_total() {
        let g = RadialGrid::logarithmic(1e-4, 10.0, 400).unwrap();
        let vals: Vec<f64> = g.nodes().iter().map(|r| (-r).exp()).collect();
        let cum = g.cumulative(&vals);
        assert!((cum.last().unwrap() - g.integrate(&vals)).abs() < 1e-12);
        // ∫_r^10 e^{-s} s ds at the first node past r = 1; cubic pieces, so
        // doubling the node density cuts the error about sixteenfold.
        let err = |n: usize| {
            let g = RadialGrid::logarithmic(1e-4, 10.0, n).unwrap();
            let vals: Vec<f64> = g.nodes().iter().map(|r| (-r).exp()).collect();
            let tail = g.tail_cumulative(&vals, 1);
            let i1 = g.nodes().iter().position(|&r| r >= 1.0).unwrap();
            let r = g.nodes()[i1];
            (tail[i1] - ((1.0 + r) * (-r).exp() - 11.0 * (-10.0f64).exp())).abs()
        };
        let (e1, e2) = (err(400), err(799));
        assert!(e1 < 5e-6 && e1 / e2 > 10.0, "{e1} {e2}");
    }

    #[test]
    fn rejects_bad_nodes() {
        assert!(RadialGrid::custom(vec![0.0, 1.0, 2.0, 3.0], 3).is_err());
        assert!(RadialGrid::custom(vec![1.0, 0.5, 2.0, 3.0], 3).is_err());
        assert!(RadialGrid::logarithmic(1.0, 0.5, 10).is_err());
    }
}
