//! Angular-averaged Coulomb kernel in the plane and a panel Nyström layer for
//! radial integral operators on `[0, 1]`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{
    elliptic_k_complement, gauss_legendre, integrate_1d_singular, EndpointSingularity,
    QuadratureSpec, Singularities,
};

/// `∫₀^{2π} dθ / |x − y|` for `|x| = r`, `|y| = s`: `4K(m)/(r+s)`, `m = 4rs/(r+s)²`.
#[inline]
pub fn coulomb_kernel_2d(r: f64, s: f64) -> f64 {
    let sum = r + s;
    let ratio = (r - s) / sum;
    4.0 / sum * elliptic_k_complement(ratio * ratio)
}

/// `∫ d²y f(|y|)/|x−y|` for a radial profile supported on `[0, radius]`, at `|x| = r`.
pub fn coulomb_radial_2d<F>(f: F, radius: f64, r: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if r < 0.0 || !r.is_finite() {
        return Err(Error::domain(format!("radius must be nonnegative, got {r}")));
    }
    if !(radius > 0.0) {
        return Ok(0.0);
    }
    let g = |s: f64| if s > 0.0 { s * f(s) * coulomb_kernel_2d(r, s) } else { 2.0 * PI * f(0.0) };
    let log = EndpointSingularity::Log;
    if r > 0.0 && r < radius {
        let inner = integrate_1d_singular(g, 0.0, r, Singularities::upper(log), spec)?;
        let outer = integrate_1d_singular(g, r, radius, Singularities::lower(log), spec)?;
        Ok(inner.value + outer.value)
    } else if r == radius {
        Ok(integrate_1d_singular(g, 0.0, radius, Singularities::upper(log), spec)?.value)
    } else {
        Ok(integrate_1d_singular(g, 0.0, radius, Singularities::NONE, spec)?.value)
    }
}

/// Gauss–Legendre panels on `[0, 1]`, uniform on `[0, ½]` and geometrically
/// graded toward 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelSet {
    breaks: Vec<f64>,
    order: usize,
    ref_nodes: Vec<f64>,
    bary: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl PanelSet {
    pub fn graded(order: usize, levels: usize) -> Self {
        let mut breaks = vec![0.0, 0.25, 0.5];
        for k in 1..=levels {
            breaks.push(1.0 - 0.5 * 0.5f64.powi(k as i32));
        }
        breaks.push(1.0);
        Self::from_breaks(breaks, order)
    }

    pub fn from_breaks(breaks: Vec<f64>, order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let mut nodes = Vec::with_capacity(order * (breaks.len() - 1));
        let mut weights = Vec::with_capacity(nodes.capacity());
        for p in breaks.windows(2) {
            let (a, b) = (p[0], p[1]);
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(a + 0.5 * (b - a) * (xi + 1.0));
                weights.push(0.5 * (b - a) * wi);
            }
        }
        // Barycentric weights for Legendre nodes on [-1, 1].
        let bary: Vec<f64> = (0..order)
            .map(|j| {
                let mut p = 1.0;
                for k in 0..order {
                    if k != j {
                        p *= x[j] - x[k];
                    }
                }
                1.0 / p
            })
            .collect();
        Self { breaks, order, ref_nodes: x, bary, nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Plain Gauss–Legendre weights for `∫₀¹ g(σ) dσ`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n_panels(&self) -> usize {
        self.breaks.len() - 1
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn panel_of(&self, t: f64) -> usize {
        let n = self.n_panels();
        match self.breaks.binary_search_by(|b| b.total_cmp(&t)) {
            Ok(i) => i.min(n - 1),
            Err(i) => i.saturating_sub(1).min(n - 1),
        }
    }

    /// Lagrange basis of panel `p` at `t` (may lie outside the panel).
    fn basis(&self, p: usize, t: f64, out: &mut [f64]) {
        let (a, b) = (self.breaks[p], self.breaks[p + 1]);
        let x = (2.0 * t - a - b) / (b - a);
        for (j, xj) in self.ref_nodes.iter().enumerate() {
            if x == *xj {
                out.iter_mut().for_each(|o| *o = 0.0);
                out[j] = 1.0;
                return;
            }
        }
        let mut ell = 1.0;
        for xj in &self.ref_nodes {
            ell *= x - xj;
        }
        for j in 0..self.order {
            out[j] = ell * self.bary[j] / (x - self.ref_nodes[j]);
        }
    }

    /// Derivative of the Lagrange basis of panel `p` at `t`, with respect to `t`.
    fn basis_derivative(&self, p: usize, t: f64, out: &mut [f64]) {
        let (a, b) = (self.breaks[p], self.breaks[p + 1]);
        let x = (2.0 * t - a - b) / (b - a);
        let scale = 2.0 / (b - a);
        let n = self.order;
        for j in 0..n {
            // d/dx Π_{k≠j}(x − x_k) · bary_j
            let mut sum = 0.0;
            for k in 0..n {
                if k == j {
                    continue;
                }
                let mut prod = 1.0;
                for l in 0..n {
                    if l != j && l != k {
                        prod *= x - self.ref_nodes[l];
                    }
                }
                sum += prod;
            }
            out[j] = sum * self.bary[j] * scale;
        }
    }

    /// Piecewise-polynomial interpolant of node values at `t ∈ [0, 1]`.
    pub fn interpolate(&self, values: &[f64], t: f64) -> f64 {
        let p = self.panel_of(t.clamp(0.0, 1.0));
        let mut l = vec![0.0; self.order];
        self.basis(p, t, &mut l);
        l.iter().zip(&values[p * self.order..(p + 1) * self.order]).map(|(a, b)| a * b).sum()
    }

    /// Derivative of the interpolant.
    pub fn interpolate_derivative(&self, values: &[f64], t: f64) -> f64 {
        let p = self.panel_of(t.clamp(0.0, 1.0));
        let mut l = vec![0.0; self.order];
        self.basis_derivative(p, t, &mut l);
        l.iter().zip(&values[p * self.order..(p + 1) * self.order]).map(|(a, b)| a * b).sum()
    }

    /// Second derivative of the interpolant, by differencing the first derivative
    /// along the panel's own polynomial.
    pub fn interpolate_second_derivative(&self, values: &[f64], t: f64) -> f64 {
        let p = self.panel_of(t.clamp(0.0, 1.0));
        let local: Vec<f64> = (0..self.order)
            .map(|j| self.interpolate_derivative(values, self.nodes[p * self.order + j]))
            .collect();
        let mut l = vec![0.0; self.order];
        self.basis_derivative(p, t, &mut l);
        l.iter().zip(&local).map(|(a, b)| a * b).sum()
    }

    /// Row of weights `w_j` with `Σ w_j g(σ_j) ≈ ∫₀¹ K(ρ, σ) σ g(σ) dσ`.
    ///
    /// Panels close to `ρ` are integrated against the local Lagrange basis with
    /// quadrature graded toward the logarithmic singularity.
    pub fn operator_row(&self, rho: f64) -> Vec<f64> {
        let n = self.order;
        let mut row = vec![0.0; self.len()];
        let mut basis = vec![0.0; n];
        for p in 0..self.n_panels() {
            let (a, b) = (self.breaks[p], self.breaks[p + 1]);
            let width = b - a;
            let dist = if rho < a { a - rho } else if rho > b { rho - b } else { 0.0 };
            let slot = &mut row[p * n..(p + 1) * n];
            if dist >= width {
                for j in 0..n {
                    let s = self.nodes[p * n + j];
                    slot[j] = self.weights[p * n + j] * coulomb_kernel_2d(rho, s) * s;
                }
                continue;
            }
            let mut accumulate = |s: f64, w: f64| {
                if s <= 0.0 || s == rho {
                    return;
                }
                self.basis(p, s, &mut basis);
                let k = w * coulomb_kernel_2d(rho, s) * s;
                for j in 0..n {
                    slot[j] += k * basis[j];
                }
            };
            let pivot = rho.clamp(a, b);
            if pivot > a {
                graded_segment(pivot, a, dist, &mut accumulate);
            }
            if pivot < b {
                graded_segment(pivot, b, dist, &mut accumulate);
            }
        }
        row
    }

    /// Dense operator matrix at the nodes.
    pub fn operator_matrix(&self) -> Vec<Vec<f64>> {
        use rayon::prelude::*;
        self.nodes.par_iter().map(|&rho| self.operator_row(rho)).collect()
    }
}

const GRADED_ORDER: usize = 16;

/// Quadrature on the segment from `pivot` to `far`, dyadically graded toward
/// `pivot`, where the integrand may have a logarithmic singularity at distance
/// `offset` beyond the pivot.
pub(crate) fn graded_segment(pivot: f64, far: f64, offset: f64, f: &mut impl FnMut(f64, f64)) {
    let (x, w) = gl16();
    let len = (far - pivot).abs();
    let dir = (far - pivot).signum();
    let floor = (offset * 0.25).max(len * 1e-15);
    let mut hi = len;
    loop {
        let lo = if hi * 0.5 <= floor { 0.0 } else { hi * 0.5 };
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (xi, wi) in x.iter().zip(w.iter()) {
            f(pivot + dir * (mid + half * xi), half * wi);
        }
        if lo == 0.0 {
            break;
        }
        hi = lo;
    }
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    use std::sync::OnceLock;
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GRADED_ORDER))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_at_origin() {
        for s in [0.1, 1.0, 3.0] {
            assert!((coulomb_kernel_2d(0.0, s) - 2.0 * PI / s).abs() < 1e-14 / s);
        }
    }

    #[test]
    fn kernel_is_symmetric() {
        assert!((coulomb_kernel_2d(0.3, 0.7) - coulomb_kernel_2d(0.7, 0.3)).abs() < 1e-14);
    }

    #[test]
    fn uniform_disk_center_and_far_field() {
        let spec = QuadratureSpec::default();
        let (sigma, r) = (0.7, 1.3);
        let c = coulomb_radial_2d(|_| sigma, r, 0.0, &spec).unwrap();
        assert!((c - 2.0 * PI * sigma * r).abs() < 1e-10);
        let far = coulomb_radial_2d(|_| sigma, r, 2.0 * r, &spec).unwrap();
        // In-plane multipole series (πR²σ/d)(1 + x/8 + 3x²/64 + ...), x = (R/d)².
        let x: f64 = 0.25;
        let series = PI * r * r * sigma / (2.0 * r) * (1.0 + x / 8.0 + 3.0 * x * x / 64.0);
        assert!((far / series - 1.0).abs() < 2e-3, "{far} vs {series}");
        // Exact: potential of a uniform disk on its rim is 4σR.
        let rim = coulomb_radial_2d(|_| sigma, r, r, &spec).unwrap();
        assert!((rim - 4.0 * sigma * r).abs() < 1e-9, "{rim}");
    }

    #[test]
    fn narrow_ring_at_center() {
        let spec = QuadratureSpec::default();
        // Smooth bump (1 − u²)² of half-width w: ∫ = 16w/15, potential 2π·16w/15.
        let (s0, w) = (0.8, 0.05);
        let f = |s: f64| {
            let u = (s - s0) / w;
            if u.abs() < 1.0 { (1.0 - u * u).powi(2) } else { 0.0 }
        };
        let got = coulomb_radial_2d(f, 1.0, 0.0, &spec).unwrap();
        let exact = 2.0 * PI * 16.0 * w / 15.0;
        assert!((got / exact - 1.0).abs() < 1e-6, "{got} vs {exact}");
    }

    #[test]
    fn negative_radius_rejected() {
        assert!(coulomb_radial_2d(|_| 1.0, 1.0, -0.1, &QuadratureSpec::default()).is_err());
    }

    #[test]
    fn nystrom_row_matches_adaptive() {
        let panels = PanelSet::graded(16, 12);
        let g = |s: f64| 1.0 - s * s + 0.3 * s.powi(3);
        let vals: Vec<f64> = panels.nodes().iter().map(|&s| g(s)).collect();
        let spec = QuadratureSpec::with_tol(1e-12, 1e-14);
        for rho in [0.0, 0.1, 0.5, panels.nodes()[20], 0.999, 1.0, 1.3] {
            let row = panels.operator_row(rho);
            let got: f64 = row.iter().zip(&vals).map(|(a, b)| a * b).sum();
            let exact = coulomb_radial_2d(g, 1.0, rho, &spec).unwrap();
            assert!((got - exact).abs() < 1e-11, "rho {rho}: {got} vs {exact}");
        }
    }

    #[test]
    fn interpolation_is_exact_for_polynomials() {
        let panels = PanelSet::graded(12, 5);
        let vals: Vec<f64> = panels.nodes().iter().map(|&s| s.powi(5) - s).collect();
        for t in [0.0, 0.33, 0.9, 1.0] {
            assert!((panels.interpolate(&vals, t) - (t.powi(5) - t)).abs() < 1e-12);
            let d = 5.0 * t.powi(4) - 1.0;
            assert!((panels.interpolate_derivative(&vals, t) - d).abs() < 1e-9);
            let d2 = 20.0 * t.powi(3);
            assert!((panels.interpolate_second_derivative(&vals, t) - d2).abs() < 1e-6);
        }
    }
}
