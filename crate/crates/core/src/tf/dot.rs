//! Radially confined two-dimensional dots.
//!
//! On the support `[0, R]` the self-consistent equation is linear in `μ₊`:
//! `μ₊ + (1/2π) ∫ μ₊(y)/|x−y| d²y = μ − V`. In the unit variable `ρ = r/R`
//! the Coulomb operator is `R·A₁`, so for each trial `R` two linear solves give
//! `μ₊ = μ φ₁ − φ_V`, the normalization fixes `μ`, and `R` is the root of
//! `μ₊(R) = 0`.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::coulomb::{coulomb_kernel_2d, coulomb_radial_2d, PanelSet};
use super::grid::{GridLaw, RadialGrid};
use super::TfProfile;
use crate::error::{Error, Result};
use crate::numerics::{CubicSpline, QuadratureSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ConfinementKind {
    /// `V(r) = strength · r^exponent`.
    PowerLaw { exponent: f64, strength: f64 },
    /// Natural cubic spline through samples, extended linearly past the last one.
    Tabulated { r: Vec<f64>, v: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfinementSpec {
    pub kind: ConfinementKind,
    pub description: String,
}

impl ConfinementSpec {
    pub fn power_law(exponent: f64, strength: f64) -> Result<Self> {
        let spec = Self {
            kind: ConfinementKind::PowerLaw { exponent, strength },
            description: format!("{strength} r^{exponent}"),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn harmonic() -> Self {
        Self::power_law(2.0, 1.0).expect("valid")
    }

    pub fn quartic() -> Self {
        Self::power_law(4.0, 1.0).expect("valid")
    }

    pub fn tabulated(r: Vec<f64>, v: Vec<f64>, description: impl Into<String>) -> Result<Self> {
        let spec = Self { kind: ConfinementKind::Tabulated { r, v }, description: description.into() };
        spec.validate()?;
        Ok(spec)
    }

    /// Reads `r,v` rows (header optional, `#` comments allowed).
    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        let (mut r, mut v) = (Vec::new(), Vec::new());
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (a, b) = (cols.next().unwrap_or(""), cols.next().unwrap_or(""));
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(y)) => {
                    r.push(x);
                    v.push(y);
                }
                _ if r.is_empty() && a == "r" => {}
                _ => {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line: i + 1,
                        msg: format!("expected two numbers, got {line:?}"),
                    })
                }
            }
        }
        Self::tabulated(r, v, format!("tabulated from {}", path.display()))
    }

    /// Parses `r^2`, `r^4`, `r^p:<p>` (optionally `<c>*r^p:<p>`) or `file:<csv>`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if let Some(path) = t.strip_prefix("file:") {
            return Self::from_csv(Path::new(path));
        }
        let (strength, rest) = match t.split_once('*') {
            Some((c, rest)) => {
                let c: f64 = c.trim().parse().map_err(|_| Error::invalid(format!("bad strength in '{t}'")))?;
                (c, rest.trim())
            }
            None => (1.0, t),
        };
        let exponent = match rest {
            "r^2" => 2.0,
            "r^4" => 4.0,
            _ => rest
                .strip_prefix("r^p:")
                .and_then(|p| p.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::invalid(format!("unknown potential '{t}' (use r^2, r^4, r^p:<p> or file:<csv>)")))?,
        };
        Self::power_law(exponent, strength)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            ConfinementKind::PowerLaw { exponent, strength } => {
                if !(*exponent > 0.0 && *strength > 0.0 && exponent.is_finite() && strength.is_finite()) {
                    return Err(Error::domain(format!(
                        "power-law confinement needs positive exponent and strength (got {exponent}, {strength})"
                    )));
                }
            }
            ConfinementKind::Tabulated { r, v } => {
                if r.len() < 4 || r.len() != v.len() {
                    return Err(Error::invalid("tabulated confinement needs at least four (r, V) pairs"));
                }
                if r[0] < 0.0 || r.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::invalid("tabulated radii must be nonnegative and increasing"));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::invalid("tabulated potential must be finite"));
                }
                let n = r.len();
                if !(v[n - 1] > v[n - 2]) {
                    return Err(Error::domain("tabulated potential is not confining (decreasing at the last sample)"));
                }
            }
        }
        Ok(())
    }

    pub fn evaluator(&self) -> Result<Potential> {
        self.validate()?;
        Ok(match &self.kind {
            ConfinementKind::PowerLaw { exponent, strength } => {
                Potential::Power { exponent: *exponent, strength: *strength }
            }
            ConfinementKind::Tabulated { r, v } => {
                let spline = CubicSpline::natural(r.clone(), v.clone())?;
                let n = r.len();
                let end_slope = spline.derivative(r[n - 1]).max((v[n - 1] - v[n - 2]) / (r[n - 1] - r[n - 2]));
                Potential::Table { spline, r0: r[0], r_end: r[n - 1], v_end: v[n - 1], end_slope }
            }
        })
    }
}

/// Callable form of a [`ConfinementSpec`].
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    Power { exponent: f64, strength: f64 },
    Table { spline: CubicSpline, r0: f64, r_end: f64, v_end: f64, end_slope: f64 },
}

impl Potential {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Potential::Power { exponent, strength } => strength * r.powf(*exponent),
            Potential::Table { spline, r0, r_end, v_end, end_slope } => {
                if r > *r_end {
                    v_end + end_slope * (r - r_end)
                } else {
                    spline.eval(r.max(*r0))
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DotMethod {
    /// Direct linear solve on graded Gauss–Legendre panels.
    Nystrom,
    /// Damped fixed point `μ₊ ← (1−η)μ₊ + η[μ − V − U]₊` on a caller grid,
    /// with `μ` fixed by bisection on the normalization at every sweep.
    FixedPoint { eta: f64, grid: RadialGrid, max_iter: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DotSolverOptions {
    pub method: DotMethod,
    pub panel_order: usize,
    pub grading_levels: usize,
}

impl Default for DotSolverOptions {
    fn default() -> Self {
        Self { method: DotMethod::Nystrom, panel_order: 16, grading_levels: 24 }
    }
}

impl DotSolverOptions {
    /// Same panels with twice the grading depth and more nodes per panel.
    pub fn refined(&self) -> Self {
        Self { panel_order: self.panel_order + 8, grading_levels: self.grading_levels + 12, ..self.clone() }
    }

    pub fn fixed_point(eta: f64, grid: RadialGrid) -> Self {
        Self { method: DotMethod::FixedPoint { eta, grid, max_iter: 20_000 }, ..Self::default() }
    }
}

/// Panels on `[0, 1]` together with the unit-radius Coulomb operator
/// `(A₁g)(ρ) = ∫₀¹ K(ρ, σ) σ g(σ) dσ`.
#[derive(Debug)]
pub struct UnitDisk {
    pub panels: PanelSet,
    pub operator: DMatrix<f64>,
    edge_row: Vec<f64>,
}

impl UnitDisk {
    pub fn new(order: usize, levels: usize) -> Self {
        let panels = PanelSet::graded(order, levels);
        let rows = panels.operator_matrix();
        let n = panels.len();
        let operator = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        let edge_row = panels.operator_row(1.0);
        Self { panels, operator, edge_row }
    }

    /// Shared instance for the given discretization.
    pub fn cached(order: usize, levels: usize) -> Arc<Self> {
        use std::collections::HashMap;
        use std::sync::Mutex;
        type Cache = Mutex<HashMap<(usize, usize), Arc<UnitDisk>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(d) = cache.lock().unwrap().get(&(order, levels)) {
            return d.clone();
        }
        let disk = Arc::new(Self::new(order, levels));
        cache.lock().unwrap().insert((order, levels), disk.clone());
        disk
    }

    /// `I + (R/2π) A₁`, LU-factorized.
    fn system(&self, radius: f64) -> Result<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>> {
        let n = self.panels.len();
        let m = DMatrix::identity(n, n) + &self.operator * (radius / (2.0 * PI));
        let lu = m.lu();
        if !lu.is_invertible() {
            return Err(Error::Singular(format!("Nyström system at R = {radius}")));
        }
        Ok(lu)
    }

    /// Solves `(I + (R/2π)A₁) x = b`.
    pub fn solve(&self, radius: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        let lu = self.system(radius)?;
        let b = DVector::from_column_slice(rhs);
        lu.solve(&b)
            .map(|x| x.as_slice().to_vec())
            .ok_or_else(|| Error::Singular("Nyström back-substitution".into()))
    }

    /// `(R/2π)(A₁ u)(1)`: the induced potential at the support edge.
    fn edge_potential(&self, radius: f64, u: &[f64]) -> f64 {
        radius / (2.0 * PI) * self.edge_row.iter().zip(u).map(|(a, b)| a * b).sum::<f64>()
    }

    /// `∫₀¹ g(ρ) ρ dρ`.
    pub fn moment(&self, g: &[f64]) -> f64 {
        self.panels
            .nodes()
            .iter()
            .zip(self.panels.weights())
            .zip(g)
            .map(|((x, w), g)| x * w * g)
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct TFDotSolution {
    pub confinement: ConfinementSpec,
    pub mu_global: f64,
    pub support_radius: f64,
    /// Support grid `[0, R]`; nodes carry `μ₊ > 0`.
    pub grid: RadialGrid,
    pub mu_plus: Vec<f64>,
    pub mu_plus_prime: Vec<f64>,
    pub w_prime_at_r: f64,
    pub residual: f64,
    pub method: &'static str,
    potential: Potential,
    disk: Option<Arc<UnitDisk>>,
    /// Fixed-point variant: full grid with local chemical potential samples.
    local_mu: Option<(Vec<f64>, Vec<f64>)>,
}

impl TfProfile for TFDotSolution {
    fn dim(&self) -> u32 {
        2
    }
    fn mu_global(&self) -> f64 {
        self.mu_global
    }
    fn grid(&self) -> &RadialGrid {
        &self.grid
    }
    fn mu_plus(&self) -> &[f64] {
        &self.mu_plus
    }
    fn residual(&self) -> f64 {
        self.residual
    }
    fn external_potential(&self, r: f64) -> f64 {
        self.potential.eval(r)
    }
    fn exterior_local_mu(&self, r: f64) -> f64 {
        self.mu_global - self.w_at(r)
    }
    fn exterior_reach(&self, e: f64) -> Option<f64> {
        let r = self.support_radius;
        if e <= self.w_at(r) {
            return Some(r);
        }
        let mut hi = 2.0 * r;
        while self.w_at(hi) < e {
            hi *= 2.0;
            if hi > 1e6 * r {
                return None;
            }
        }
        let mut lo = r;
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.w_at(mid) < e {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(hi)
    }
}

impl TFDotSolution {
    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn unit_disk(&self) -> Option<&Arc<UnitDisk>> {
        self.disk.as_ref()
    }

    /// `μ₊(r)`, zero outside the support.
    pub fn mu_plus_at(&self, r: f64) -> f64 {
        let radius = self.support_radius;
        if r >= radius || r < 0.0 {
            return 0.0;
        }
        match (&self.disk, &self.local_mu) {
            (Some(d), _) => d.panels.interpolate(&self.mu_plus, r / radius).max(0.0),
            (None, Some((nodes, mu))) => linear(nodes, mu, r).max(0.0),
            _ => 0.0,
        }
    }

    /// Induced potential `(1/2π) ∫ μ₊(y)/|x−y| d²y`.
    pub fn induced_potential(&self, r: f64) -> f64 {
        let radius = self.support_radius;
        match &self.disk {
            Some(d) => {
                let row = d.panels.operator_row(r / radius);
                radius / (2.0 * PI) * row.iter().zip(&self.mu_plus).map(|(a, b)| a * b).sum::<f64>()
            }
            None => {
                let spec = QuadratureSpec::with_tol(1e-10, 1e-13);
                coulomb_radial_2d(|s| self.mu_plus_at(s), radius, r, &spec).unwrap_or(f64::NAN) / (2.0 * PI)
            }
        }
    }

    /// Self-consistent potential `W = V + U`.
    pub fn w_at(&self, r: f64) -> f64 {
        self.potential.eval(r) + self.induced_potential(r)
    }

    /// `(1/2π) ∫ μ₊ d²x`.
    pub fn normalization(&self) -> f64 {
        self.grid.integrate(&self.mu_plus)
    }
}

fn linear(x: &[f64], y: &[f64], t: f64) -> f64 {
    let n = x.len();
    if t <= x[0] {
        return y[0];
    }
    if t >= x[n - 1] {
        return y[n - 1];
    }
    let i = x.partition_point(|v| *v <= t) - 1;
    let s = (t - x[i]) / (x[i + 1] - x[i]);
    y[i] + s * (y[i + 1] - y[i])
}

pub fn solve_tf_dot_radial(conf: &ConfinementSpec, tol: f64) -> Result<TFDotSolution> {
    solve_tf_dot_with(conf, tol, &DotSolverOptions::default())
}

pub fn solve_tf_dot_with(conf: &ConfinementSpec, tol: f64, opts: &DotSolverOptions) -> Result<TFDotSolution> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let potential = conf.evaluator()?;
    match &opts.method {
        DotMethod::Nystrom => {
            let disk = UnitDisk::cached(opts.panel_order, opts.grading_levels);
            solve_nystrom(conf, potential, disk, tol)
        }
        DotMethod::FixedPoint { eta, grid, max_iter } => {
            solve_fixed_point(conf, potential, grid, *eta, *max_iter, tol)
        }
    }
}

struct Trial {
    mu: f64,
    u: Vec<f64>,
    edge: f64,
}

fn trial(disk: &UnitDisk, v: &Potential, radius: f64) -> Result<Trial> {
    let nodes = disk.panels.nodes();
    let n = nodes.len();
    let lu = disk.system(radius)?;
    let mut rhs = DMatrix::zeros(n, 2);
    for (i, x) in nodes.iter().enumerate() {
        rhs[(i, 0)] = 1.0;
        rhs[(i, 1)] = v.eval(radius * x);
    }
    let sol = lu.solve(&rhs).ok_or_else(|| Error::Singular("Nyström back-substitution".into()))?;
    let phi1: Vec<f64> = sol.column(0).iter().copied().collect();
    let phiv: Vec<f64> = sol.column(1).iter().copied().collect();
    let mu = (1.0 / (radius * radius) + disk.moment(&phiv)) / disk.moment(&phi1);
    let u: Vec<f64> = phi1.iter().zip(&phiv).map(|(a, b)| mu * a - b).collect();
    let edge = mu - v.eval(radius) - disk.edge_potential(radius, &u);
    Ok(Trial { mu, u, edge })
}

fn solve_nystrom(conf: &ConfinementSpec, v: Potential, disk: Arc<UnitDisk>, tol: f64) -> Result<TFDotSolution> {
    let mut lo = 1e-3;
    let mut f_lo = trial(&disk, &v, lo)?.edge;
    if !(f_lo > 0.0) {
        return Err(Error::not_converged("dot support bracket", f_lo));
    }
    let mut hi = lo;
    let mut f_hi = f_lo;
    while f_hi > 0.0 {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::domain("no support radius found below 1e6; potential too weak"));
        }
        f_hi = trial(&disk, &v, hi)?.edge;
    }
    // Illinois regula falsi on the edge value.
    let mut side = 0;
    for _ in 0..200 {
        if (hi - lo) <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let mut x = hi - f_hi * (hi - lo) / (f_hi - f_lo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = trial(&disk, &v, x)?.edge;
        if fx == 0.0 {
            lo = x;
            hi = x;
            break;
        }
        if fx > 0.0 {
            lo = x;
            f_lo = fx;
            if side == 1 {
                f_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = x;
            f_hi = fx;
            if side == -1 {
                f_lo *= 0.5;
            }
            side = -1;
        }
    }
    let radius = if f_lo.abs() < f_hi.abs() { lo } else { hi };
    let t = trial(&disk, &v, radius)?;
    if let Some(min) = t.u.iter().copied().reduce(f64::min) {
        if min < -tol {
            return Err(Error::domain(format!(
                "μ₊ changes sign inside the support (min {min}); the support is not a disk"
            )));
        }
    }
    let nodes: Vec<f64> = disk.panels.nodes().iter().map(|x| radius * x).collect();
    let weights: Vec<f64> = disk
        .panels
        .nodes()
        .iter()
        .zip(disk.panels.weights())
        .map(|(x, w)| radius * radius * x * w)
        .collect();
    let grid = RadialGrid::from_parts(
        nodes.clone(),
        weights,
        2,
        GridLaw::GradedPanels { radius, order: disk.panels.order(), levels: disk.panels.n_panels() - 3 },
    );
    let mu_plus: Vec<f64> = t.u.iter().map(|x| x.max(0.0)).collect();
    let mu_plus_prime: Vec<f64> = disk
        .panels
        .nodes()
        .iter()
        .map(|&x| disk.panels.interpolate_derivative(&t.u, x) / radius)
        .collect();
    let w_prime_at_r = -disk.panels.interpolate_derivative(&t.u, 1.0) / radius;
    let mut sol = TFDotSolution {
        confinement: conf.clone(),
        mu_global: t.mu,
        support_radius: radius,
        grid,
        mu_plus,
        mu_plus_prime,
        w_prime_at_r,
        residual: 0.0,
        method: "nystrom",
        potential: v,
        disk: Some(disk),
        local_mu: None,
    };
    sol.residual = probe_residual(&sol).max(t.edge.abs());
    if !(sol.residual <= tol) {
        return Err(Error::not_converged("dot self-consistency", sol.residual));
    }
    Ok(sol)
}

/// Defect of `μ₊ = μ − V − U` at off-grid radii, with `U` from independent
/// adaptive quadrature of the interpolated profile.
pub fn probe_residual(sol: &TFDotSolution) -> f64 {
    let radius = sol.support_radius;
    let spec = QuadratureSpec::with_tol(1e-12, 1e-14);
    let probes = (0..16).map(|k| (k as f64 + 0.37) / 16.0).chain([0.999, 0.99999]);
    probes
        .map(|x| {
            let r = radius * x;
            let u = coulomb_radial_2d(|s| sol.mu_plus_at(s), radius, r, &spec).unwrap_or(f64::NAN) / (2.0 * PI);
            (sol.mu_plus_at(r) - (sol.mu_global - sol.potential.eval(r) - u)).abs()
        })
        .fold(0.0, f64::max)
}

/// Piecewise-linear product integration of the Coulomb operator on an arbitrary grid:
/// `C_ij ≈ ∫ K(r_i, s) s h_j(s) ds`, with `h_j` the hat functions and the value at
/// the first node held constant down to the origin.
fn hat_operator(nodes: &[f64]) -> Vec<Vec<f64>> {
    use rayon::prelude::*;
    let (gx, gw) = crate::numerics::gauss_legendre(8);
    let n = nodes.len();
    nodes
        .par_iter()
        .map(|&r| {
            let mut row = vec![0.0; n];
            let mut segment = |a: f64, b: f64, j_left: Option<usize>, j_right: usize| {
                let mut add = |s: f64, w: f64| {
                    if s <= 0.0 || s == r {
                        return;
                    }
                    let k = w * coulomb_kernel_2d(r, s) * s;
                    match j_left {
                        Some(jl) => {
                            let t = (s - a) / (b - a);
                            row[jl] += k * (1.0 - t);
                            row[j_right] += k * t;
                        }
                        None => row[j_right] += k,
                    }
                };
                let dist = if r < a { a - r } else if r > b { r - b } else { 0.0 };
                if dist >= b - a {
                    for (x, w) in gx.iter().zip(&gw) {
                        add(a + 0.5 * (b - a) * (x + 1.0), 0.5 * (b - a) * w);
                    }
                } else {
                    let p = r.clamp(a, b);
                    let mut f = |s: f64, w: f64| add(s, w);
                    if p > a {
                        super::coulomb::graded_segment(p, a, dist, &mut f);
                    }
                    if p < b {
                        super::coulomb::graded_segment(p, b, dist, &mut f);
                    }
                }
            };
            segment(0.0, nodes[0], None, 0);
            for j in 0..n - 1 {
                segment(nodes[j], nodes[j + 1], Some(j), j + 1);
            }
            row
        })
        .collect()
}

fn solve_fixed_point(
    conf: &ConfinementSpec,
    v: Potential,
    grid: &RadialGrid,
    eta: f64,
    max_iter: usize,
    tol: f64,
) -> Result<TFDotSolution> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::invalid(format!("mixing parameter must lie in (0, 1], got {eta}")));
    }
    if grid.dim() != 2 {
        return Err(Error::invalid("dot solver needs a two-dimensional grid"));
    }
    let nodes = grid.nodes().to_vec();
    let n = nodes.len();
    let c = hat_operator(&nodes);
    let vv: Vec<f64> = nodes.iter().map(|&r| v.eval(r)).collect();
    let normalize = |base: &[f64]| -> f64 {
        // μ with (1/2π)∫[μ − base]₊ d²x = 1.
        let norm = |mu: f64| grid.integrate(&base.iter().map(|b| (mu - b).max(0.0)).collect::<Vec<_>>());
        let mut lo = base.iter().copied().fold(f64::INFINITY, f64::min);
        let mut hi = lo + 1.0;
        while norm(hi) < 1.0 {
            hi = lo + 2.0 * (hi - lo);
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if norm(mid) < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let mut mu = normalize(&vv);
    let mut u: Vec<f64> = vv.iter().map(|b| (mu - b).max(0.0)).collect();
    let mut defect = f64::INFINITY;
    let mut local = vec![0.0; n];
    for _ in 0..max_iter {
        let base: Vec<f64> = (0..n)
            .map(|i| vv[i] + c[i].iter().zip(&u).map(|(a, b)| a * b).sum::<f64>() / (2.0 * PI))
            .collect();
        mu = normalize(&base);
        defect = 0.0;
        for i in 0..n {
            local[i] = mu - base[i];
            let target = local[i].max(0.0);
            defect = f64::max(defect, (target - u[i]).abs());
            u[i] = (1.0 - eta) * u[i] + eta * target;
        }
        if defect < tol {
            break;
        }
    }
    if !(defect < tol) {
        return Err(Error::not_converged("damped fixed-point dot iteration", defect));
    }
    let k = local
        .windows(2)
        .position(|w| w[0] > 0.0 && w[1] <= 0.0)
        .ok_or_else(|| Error::not_converged("dot support edge inside the grid", defect))?;
    let slope = (local[k + 1] - local[k]) / (nodes[k + 1] - nodes[k]);
    let radius = nodes[k] - local[k] / slope;
    let support: Vec<f64> = nodes[..=k].to_vec();
    let mut mu_plus: Vec<f64> = local[..=k].iter().map(|x| x.max(0.0)).collect();
    let mut support_nodes = support;
    // Close the support grid with the edge itself so integrals end at R.
    support_nodes.push(radius);
    mu_plus.push(0.0);
    let sgrid = RadialGrid::custom(support_nodes.clone(), 2)?;
    let mu_plus_prime = {
        let spline = CubicSpline::natural(support_nodes.clone(), mu_plus.clone())?;
        support_nodes.iter().map(|&r| spline.derivative(r)).collect()
    };
    Ok(TFDotSolution {
        confinement: conf.clone(),
        mu_global: mu,
        support_radius: radius,
        grid: sgrid,
        mu_plus,
        mu_plus_prime,
        w_prime_at_r: -slope,
        residual: defect,
        method: "damped_fixed_point",
        potential: v,
        disk: None,
        local_mu: Some((nodes, local)),
    })
}
