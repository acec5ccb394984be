//! Neutral atoms and positive ions via the universal Thomas–Fermi equation.
//!
//! With `μ₊(r) = χ(r)/r` and `χ(r) = φ(r/b)`, the self-consistent equation
//! becomes `φ'' = φ^{3/2}/√s`, `φ(0) = 1`. We integrate in `x = ln s` with
//! `ψ = sφ'`, so `dφ/dx = ψ` and `dψ/dx = ψ + (sφ)^{3/2}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::grid::RadialGrid;
use super::TfProfile;
use crate::error::{Error, Result};
use crate::numerics::hermite_eval;

/// `b = (3π/4)^{2/3}`.
pub fn length_scale() -> f64 {
    (3.0 * PI / 4.0).powf(2.0 / 3.0)
}

/// Exponent of the leading correction to the `144/s³` tail.
pub fn tail_exponent() -> f64 {
    (73f64.sqrt() - 7.0) / 2.0
}

/// Initial slope of the neutral-atom solution, used only as a starting guess.
const SLOPE_GUESS: f64 = -1.588_071;
/// Largest RK4 step in `ln s`; the same cap is used by every run so matched
/// trajectories share one discretization.
const MAX_DX: f64 = 1e-3;

#[derive(Debug, Clone, Copy)]
struct State {
    phi: f64,
    psi: f64,
}

fn rhs(x: f64, y: State) -> State {
    let sp = (x.exp() * y.phi).max(0.0);
    State { phi: y.psi, psi: y.psi + sp * sp.sqrt() }
}

fn rk4(x: f64, y: State, h: f64) -> State {
    let k1 = rhs(x, y);
    let y2 = State { phi: y.phi + 0.5 * h * k1.phi, psi: y.psi + 0.5 * h * k1.psi };
    let k2 = rhs(x + 0.5 * h, y2);
    let y3 = State { phi: y.phi + 0.5 * h * k2.phi, psi: y.psi + 0.5 * h * k2.psi };
    let k3 = rhs(x + 0.5 * h, y3);
    let y4 = State { phi: y.phi + h * k3.phi, psi: y.psi + h * k3.psi };
    let k4 = rhs(x + h, y4);
    State {
        phi: y.phi + h / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi),
        psi: y.psi + h / 6.0 * (k1.psi + 2.0 * k2.psi + 2.0 * k3.psi + k4.psi),
    }
}

fn advance(x0: f64, y: State, x1: f64) -> State {
    let n = (((x1 - x0).abs() / MAX_DX).ceil() as usize).max(1);
    let h = (x1 - x0) / n as f64;
    let mut y = y;
    for k in 0..n {
        y = rk4(x0 + k as f64 * h, y, h);
    }
    y
}

/// Small-`s` series of the solution with initial slope `a`.
fn series(s: f64, a: f64) -> State {
    let rs = s.sqrt();
    let phi = 1.0 + a * s + 4.0 / 3.0 * s * rs + 0.4 * a * s * s * rs + s * s * s / 3.0;
    let psi = a * s + 2.0 * s * rs + a * s * s * rs + s * s * s;
    State { phi, psi }
}

/// Tail form `144 s^{-3} (1 + F s^{-λ})^{-2}` and its logarithmic derivative.
fn tail(s: f64, f: f64) -> State {
    let lam = tail_exponent();
    let u = f * s.powf(-lam);
    let phi = 144.0 / (s * s * s) / ((1.0 + u) * (1.0 + u));
    State { phi, psi: phi * (-3.0 + 2.0 * lam * u / (1.0 + u)) }
}

fn start_x(xs: &[f64]) -> f64 {
    xs[0].min((1e-6f64).ln())
}

/// Outward run with slope `a`, recording states at `xs[..=last]`.
fn outward(xs: &[f64], a: f64, last: usize) -> Vec<State> {
    let x_start = start_x(xs);
    let mut y = series(x_start.exp(), a);
    let mut x = x_start;
    let mut out = Vec::with_capacity(last + 1);
    for &xi in &xs[..=last] {
        if xi > x {
            y = advance(x, y, xi);
            x = xi;
        }
        out.push(y);
    }
    out
}

/// Inward run from the far tail, recording states at `xs[first..]` (ascending order).
fn inward(xs: &[f64], f: f64, first: usize) -> Vec<State> {
    let x_far = (1e6f64).ln().max(xs.last().unwrap() + 2.0);
    inward_from(xs, first, x_far, tail(x_far.exp(), f))
}

fn inward_from(xs: &[f64], first: usize, x_start: f64, y_start: State) -> Vec<State> {
    let (mut x, mut y) = (x_start, y_start);
    let mut out = vec![y; xs.len() - first];
    for i in (first..xs.len()).rev() {
        if xs[i] < x {
            y = advance(x, y, xs[i]);
            x = xs[i];
        }
        out[i - first] = y;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TFAtomSolution {
    pub q: f64,
    pub mu_global: f64,
    pub grid: RadialGrid,
    pub mu_plus: Vec<f64>,
    pub mu_plus_prime: Vec<f64>,
    /// `r·μ₊(r)` at the first node.
    pub origin_coeff: f64,
    /// Fitted `lim r⁴μ₊(r)`; neutral atoms only.
    pub tail_coeff: Option<f64>,
    /// Sup norm over the support of `r·(μ₊ − μ − 1/r + U)`, `U` the Hartree potential.
    pub residual: f64,
    /// Radius where `μ₊` vanishes; ions only.
    pub support_radius: Option<f64>,
    /// Initial slope `φ'(0)`.
    pub slope: f64,
    /// Tail amplitude `F` of the matched neutral solution.
    pub tail_amplitude: Option<f64>,
    chi: Vec<f64>,
    chi_log_deriv: Vec<f64>,
    log_r: Vec<f64>,
    /// Built from caller samples: no series below the grid and no tail beyond it.
    #[serde(default)]
    sampled: bool,
}

impl TfProfile for TFAtomSolution {
    fn dim(&self) -> u32 {
        3
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
        -1.0 / r
    }
    fn exterior_local_mu(&self, r: f64) -> f64 {
        match self.support_radius {
            Some(_) => self.mu_global + (1.0 - self.q) / r,
            None => self.mu_plus_at(r),
        }
    }
    fn exterior_reach(&self, e: f64) -> Option<f64> {
        // e − W(r) = e + (1−q)/r outside the ion; neutral atoms have W → 0⁻.
        if e == 0.0 && self.support_radius.is_none() {
            // The neutral tail μ₊ ~ r⁻⁴ is integrable.
            return Some(1e3 * self.grid.r_max());
        }
        if e >= 0.0 {
            return None;
        }
        match self.support_radius {
            Some(r0) => Some(((1.0 - self.q) / -e).max(r0)),
            None => Some(self.grid.r_max()),
        }
    }
}

impl TFAtomSolution {
    /// `μ₊(r)` at any radius: Hermite interpolation of `χ` in `ln r`, the series
    /// below the grid and the matched tail beyond it.
    pub fn mu_plus_at(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return f64::INFINITY;
        }
        let b = length_scale();
        let nodes = self.grid.nodes();
        if r < nodes[0] {
            if self.sampled {
                return power_law_below(nodes, &self.mu_plus, r);
            }
            return series(r / b, self.slope).phi / r;
        }
        if r > self.grid.r_max() {
            return match (self.support_radius, self.tail_amplitude) {
                (Some(_), _) => 0.0,
                (None, Some(f)) => tail(r / b, f).phi / r,
                (None, None) => 0.0,
            };
        }
        hermite_eval(&self.log_r, &self.chi, &self.chi_log_deriv, r.ln()).max(0.0) / r
    }

    /// Self-consistent potential `W(r) = μ − μ(r)`.
    pub fn w_at(&self, r: f64) -> f64 {
        match self.support_radius {
            Some(r0) if r >= r0 => -(1.0 - self.q) / r,
            _ => self.mu_global - self.mu_plus_at(r),
        }
    }

    /// `2α₃ ∫ μ₊^{3/2} d³x`.
    pub fn normalization(&self) -> f64 {
        let f: Vec<f64> = self.mu_plus.iter().map(|m| m * m.sqrt()).collect();
        4.0 / (3.0 * PI) * self.grid.integrate(&f)
    }
}

/// Solves the atom problem for `q = N/Z ∈ (0, 1]`.
///
/// Neutral atoms are matched between an outward run from the nucleus and an
/// inward run from the universal r⁻⁴ tail. Ions are shot from the nucleus until
/// `sφ'(s) = −(1−q)` at the zero of `φ`; their profile lives on a grid ending
/// at that radius, graded toward it, with the node count and first node of `grid`.
pub fn solve_tf_atom(q: f64, grid: &RadialGrid, tol: f64) -> Result<TFAtomSolution> {
    if !(q > 0.0) || q > 1.0 || !q.is_finite() {
        return Err(Error::domain(format!("ionization ratio must lie in (0, 1], got {q}")));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    if grid.dim() != 3 {
        return Err(Error::invalid("atom solver needs a three-dimensional grid"));
    }
    let (a, f) = match_neutral(grid)?;
    let sol = if q == 1.0 {
        build_neutral(grid, a, f)
    } else {
        build_ion(q, grid, a)?
    };
    if !(sol.residual <= tol) {
        return Err(Error::not_converged("atom self-consistency", sol.residual));
    }
    Ok(sol)
}

fn log_nodes(grid: &RadialGrid) -> Vec<f64> {
    let b = length_scale();
    grid.nodes().iter().map(|r| (r / b).ln()).collect()
}

/// Newton iteration on `(φ'(0), F)` so the two runs agree in `(φ, ψ)` near `s = 1`.
fn match_neutral(grid: &RadialGrid) -> Result<(f64, f64)> {
    let xs = log_nodes(grid);
    let m = xs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap()
        .clamp(1, xs.len() - 2);
    let lam = tail_exponent();
    let mut a = SLOPE_GUESS;
    let mut f = 1.5 / lam * 144f64.powf(lam / 3.0);
    let eval = |a: f64, f: f64| {
        let o = outward(&xs, a, m)[m];
        let i = inward(&xs, f, m)[0];
        (o, i)
    };
    let mismatch = |o: State, i: State| (o.phi - i.phi, o.psi - i.psi);
    let norm = |r: (f64, f64)| r.0.abs().max(r.1.abs());
    let (mut o, mut i) = eval(a, f);
    let mut res = mismatch(o, i);
    for _ in 0..60 {
        if norm(res) < 1e-14 {
            return Ok((a, f));
        }
        let da = 1e-7;
        let df = 1e-7 * f.abs().max(1.0);
        let oa = outward(&xs, a + da, m)[m];
        let i_f = inward(&xs, f + df, m)[0];
        let j11 = (oa.phi - o.phi) / da;
        let j21 = (oa.psi - o.psi) / da;
        let j12 = -(i_f.phi - i.phi) / df;
        let j22 = -(i_f.psi - i.psi) / df;
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Singular("shooting Jacobian".into()));
        }
        let step_a = -(j22 * res.0 - j12 * res.1) / det;
        let step_f = -(-j21 * res.0 + j11 * res.1) / det;
        let mut lambda = 1.0;
        loop {
            let (na, nf) = (a + lambda * step_a, f + lambda * step_f);
            let (no, ni) = eval(na, nf);
            let nres = mismatch(no, ni);
            if norm(nres) < norm(res) || lambda < 1e-3 {
                a = na;
                f = nf;
                o = no;
                i = ni;
                res = nres;
                break;
            }
            lambda *= 0.5;
        }
    }
    if norm(res) < 1e-11 {
        Ok((a, f))
    } else {
        Err(Error::not_converged("neutral atom shooting", norm(res)))
    }
}

fn build_neutral(grid: &RadialGrid, a: f64, f: f64) -> TFAtomSolution {
    let xs = log_nodes(grid);
    let n = xs.len();
    let m = xs
        .iter()
        .position(|&x| x >= 0.0)
        .unwrap_or(n - 1)
        .clamp(1, n - 2);
    let mut states = outward(&xs, a, m);
    states.extend(inward(&xs, f, m + 1));
    let mut sol = assemble(1.0, 0.0, grid.clone(), &states, a, None);
    sol.tail_amplitude = Some(f);
    sol.tail_coeff = Some(fit_tail(&sol));
    sol
}

/// Outward run with slope `a` until `φ` vanishes; returns `(x₀, ψ(x₀))`.
fn first_zero(a: f64) -> Option<(f64, f64)> {
    let mut x = (1e-6f64).ln();
    let mut y = series(x.exp(), a);
    let h = 2e-3;
    while x < (1e9f64).ln() {
        let next = rk4(x, y, h);
        if next.phi <= 0.0 {
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if rk4(x, y, mid).phi > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let z = rk4(x, y, hi);
            return Some((x + hi, z.psi));
        }
        if next.psi >= 0.0 {
            return None;
        }
        x += h;
        y = next;
    }
    None
}

fn build_ion(q: f64, grid: &RadialGrid, a_neutral: f64) -> Result<TFAtomSolution> {
    let target = -(1.0 - q);
    // Coarse bracket from one-sided shooting.
    let h = |a: f64| match first_zero(a) {
        Some((_, psi)) => psi - target,
        None => -target,
    };
    let mut hi = a_neutral;
    let mut lo = a_neutral - 1.0;
    while h(lo) > 0.0 {
        lo -= 2.0 * (a_neutral - lo);
        if lo < -1e6 {
            return Err(Error::not_converged("ion slope bracket", h(lo)));
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut a = lo;
    let (mut x0, _) = first_zero(a).ok_or_else(|| Error::not_converged("ion zero crossing", f64::NAN))?;

    // Two-sided refinement on (a, x₀): the outward run is unstable at large s,
    // so the outer part comes from integrating inward from the zero.
    let x_start = (1e-6f64).ln();
    let edge = State { phi: 0.0, psi: target };
    let xm = |x0: f64| if x0 > 1.0 { 0.0 } else { x0 - 1.0 };
    let eval = |a: f64, x0: f64| {
        let m = xm(x0);
        let o = advance(x_start, series(x_start.exp(), a), m);
        let i = advance(x0, edge, m);
        (o.phi - i.phi, o.psi - i.psi)
    };
    let norm = |r: (f64, f64)| r.0.abs().max(r.1.abs());
    let mut res = eval(a, x0);
    for _ in 0..60 {
        if norm(res) < 1e-14 {
            break;
        }
        let (da, dx) = (1e-7, 1e-7);
        let ra = eval(a + da, x0);
        let rx = eval(a, x0 + dx);
        let (j11, j21) = ((ra.0 - res.0) / da, (ra.1 - res.1) / da);
        let (j12, j22) = ((rx.0 - res.0) / dx, (rx.1 - res.1) / dx);
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Singular("ion shooting Jacobian".into()));
        }
        let sa = -(j22 * res.0 - j12 * res.1) / det;
        let sx = -(-j21 * res.0 + j11 * res.1) / det;
        let mut lambda = 1.0;
        loop {
            let cand = eval(a + lambda * sa, x0 + lambda * sx);
            if norm(cand) < norm(res) || lambda < 1e-3 {
                a += lambda * sa;
                x0 += lambda * sx;
                res = cand;
                break;
            }
            lambda *= 0.5;
        }
    }
    if norm(res) > 1e-11 {
        return Err(Error::not_converged("ion shooting", norm(res)));
    }

    let b = length_scale();
    let r0 = b * x0.exp();
    let r_min = grid.nodes()[0];
    if r0 <= r_min {
        return Err(Error::domain(format!("ion radius {r0} falls below the first grid node")));
    }
    let ion_grid = RadialGrid::log_graded_end(r_min, r0, grid.len())?;
    let xs = log_nodes(&ion_grid);
    let m = xs.partition_point(|&x| x <= xm(x0)).saturating_sub(1);
    let mut states = outward(&xs, a, m);
    states.extend(inward_from(&xs, m + 1, x0, edge));
    if let Some(last) = states.last_mut() {
        last.phi = 0.0;
    }
    Ok(assemble(q, target / r0, ion_grid, &states, a, Some(r0)))
}

fn assemble(
    q: f64,
    mu: f64,
    grid: RadialGrid,
    states: &[State],
    slope: f64,
    support_radius: Option<f64>,
) -> TFAtomSolution {
    let r = grid.nodes().to_vec();
    let chi: Vec<f64> = states.iter().map(|s| s.phi.max(0.0)).collect();
    let chi_log_deriv: Vec<f64> = states.iter().map(|s| s.psi).collect();
    let mu_plus: Vec<f64> = chi.iter().zip(&r).map(|(c, r)| c / r).collect();
    let mu_plus_prime: Vec<f64> = states
        .iter()
        .zip(&r)
        .map(|(s, r)| (s.psi - s.phi.max(0.0)) / (r * r))
        .collect();
    let mut sol = TFAtomSolution {
        q,
        mu_global: mu,
        origin_coeff: chi[0],
        tail_coeff: None,
        residual: 0.0,
        support_radius,
        slope,
        tail_amplitude: None,
        grid,
        mu_plus,
        mu_plus_prime,
        chi,
        chi_log_deriv,
        log_r: r.iter().map(|r| r.ln()).collect(),
        sampled: false,
    };
    sol.residual = self_consistency_defect(&sol);
    sol
}

/// Power law through the first two samples, the same law the grid uses for
/// the origin piece of its integrals.
fn power_law_below(nodes: &[f64], mu: &[f64], r: f64) -> f64 {
    let (m0, m1) = (mu[0], mu[1]);
    if m0 <= 0.0 || m1 <= 0.0 {
        return m0.max(0.0);
    }
    let beta = (m1 / m0).ln() / (nodes[1] / nodes[0]).ln();
    m0 * (r / nodes[0]).powf(beta)
}

/// Hartree potential `(4/3π) ∫ μ₊^{3/2}(y)/|x−y| d³y` at every node.
pub fn hartree_potential(grid: &RadialGrid, mu_plus: &[f64]) -> Vec<f64> {
    let f: Vec<f64> = mu_plus.iter().map(|m| m * m.sqrt()).collect();
    let inner = grid.cumulative_with_power(&f, 2);
    let outer = grid.tail_cumulative(&f, 1);
    let c = 4.0 / (3.0 * PI);
    grid.nodes()
        .iter()
        .zip(inner.iter().zip(&outer))
        .map(|(r, (i, o))| c * (i / r + o))
        .collect()
}

fn self_consistency_defect(sol: &TFAtomSolution) -> f64 {
    let u = hartree_potential(&sol.grid, &sol.mu_plus);
    sol.grid
        .nodes()
        .iter()
        .zip(sol.chi.iter().zip(&u))
        .filter(|(_, (c, _))| **c > 0.0)
        .map(|(r, (c, u))| (c - sol.mu_global * r - 1.0 + r * u).abs())
        .fold(0.0, f64::max)
}

/// Least-squares fit of `r⁴μ₊ = C (1 + F s^{-λ})^{-2}` over the outer two decades.
fn fit_tail(sol: &TFAtomSolution) -> f64 {
    let b = length_scale();
    let lam = tail_exponent();
    let r_max = sol.grid.r_max();
    let (mut sx, mut sy, mut sxx, mut sxy, mut n) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (r, m) in sol.grid.nodes().iter().zip(&sol.mu_plus) {
        if *r < r_max / 100.0 || *m <= 0.0 {
            continue;
        }
        let x = (r / b).powf(-lam);
        let y = (r.powi(4) * m).powf(-0.5);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        n += 1.0;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    intercept.powi(-2)
}

impl Default for TFAtomSolution {
    fn default() -> Self {
        let grid = RadialGrid::atom_default();
        let n = grid.len();
        let log_r = grid.nodes().iter().map(|r| r.ln()).collect();
        Self {
            q: 1.0,
            mu_global: 0.0,
            grid,
            mu_plus: vec![0.0; n],
            mu_plus_prime: vec![0.0; n],
            origin_coeff: 0.0,
            tail_coeff: None,
            residual: 0.0,
            support_radius: None,
            slope: 0.0,
            tail_amplitude: None,
            chi: vec![0.0; n],
            chi_log_deriv: vec![0.0; n],
            log_r,
            sampled: true,
        }
    }
}

impl TFAtomSolution {
    /// Profile with arbitrary `μ₊` samples on `grid`, for probes of the energy
    /// integrals. The derivative is supplied by the caller.
    pub fn from_samples(grid: RadialGrid, mu_plus: Vec<f64>, mu_plus_prime: Vec<f64>) -> Result<Self> {
        if mu_plus.len() != grid.len() || mu_plus_prime.len() != grid.len() {
            return Err(Error::invalid("profile length does not match the grid"));
        }
        if grid.dim() != 3 {
            return Err(Error::invalid("atom profile needs a three-dimensional grid"));
        }
        let r = grid.nodes();
        let chi: Vec<f64> = mu_plus.iter().zip(r).map(|(m, r)| m * r).collect();
        let chi_log_deriv: Vec<f64> = (0..r.len())
            .map(|i| r[i] * (mu_plus[i] + r[i] * mu_plus_prime[i]))
            .collect();
        let log_r = r.iter().map(|r| r.ln()).collect();
        let mut sol = Self {
            log_r,
            origin_coeff: chi[0],
            grid,
            mu_plus,
            mu_plus_prime,
            chi,
            chi_log_deriv,
            ..Self::default()
        };
        sol.residual = self_consistency_defect(&sol);
        Ok(sol)
    }
}
