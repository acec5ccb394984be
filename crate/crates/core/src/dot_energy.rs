//! Smooth Hartree-exchange and correlation energy of a quantum dot.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::constants;
use crate::error::{Error, Result};
use crate::numerics::QuadratureSpec;
use crate::tf::dot::{DotSolverOptions, UnitDisk};
use crate::tf::{coulomb_radial_2d, solve_tf_dot_radial, tf_energy, ConfinementSpec, ScalingContext, TFDotSolution};

/// Universal second-order constants of `−E_c` for dots.
pub const EC1_STAR_DOT: f64 = 0.1534;
pub const EC2_DOT: f64 = 0.1455;

fn disk_for(sol: &TFDotSolution) -> Arc<UnitDisk> {
    match sol.unit_disk() {
        Some(d) => d.clone(),
        None => {
            let o = DotSolverOptions::default();
            UnitDisk::cached(o.panel_order, o.grading_levels)
        }
    }
}

/// `μ₊(Rρ)` on the disk nodes.
fn mu_on_disk(sol: &TFDotSolution, disk: &UnitDisk) -> Vec<f64> {
    match sol.unit_disk() {
        Some(d) if Arc::ptr_eq(d, &disk_for(sol)) && d.panels.len() == disk.panels.len() => sol.mu_plus.clone(),
        _ => disk.panels.nodes().iter().map(|x| sol.mu_plus_at(sol.support_radius * x)).collect(),
    }
}

/// `∫ g d²x` over the support for samples on the disk nodes.
fn area_integral(disk: &UnitDisk, radius: f64, g: &[f64]) -> f64 {
    2.0 * PI * radius * radius * disk.moment(g)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScreeningProfile {
    pub support_radius: f64,
    /// Radii of the collocation nodes in `[0, R]`.
    pub nodes: Vec<f64>,
    pub a_values: Vec<f64>,
    /// Max of the collocation and off-grid probe defects.
    pub residual: f64,
    pub collocation_residual: f64,
    pub probe_residual: f64,
    #[serde(skip)]
    disk: Option<Arc<UnitDisk>>,
}

impl ScreeningProfile {
    fn disk(&self) -> Result<&Arc<UnitDisk>> {
        self.disk.as_ref().ok_or_else(|| Error::invalid("screening profile has no discretization"))
    }

    /// `a(r)`: interpolated on the support, and by substitution into the
    /// equation outside it.
    pub fn a_at(&self, r: f64) -> f64 {
        let Some(disk) = &self.disk else { return 1.0 };
        let radius = self.support_radius;
        if radius == 0.0 {
            return 1.0;
        }
        if r < radius {
            return disk.panels.interpolate(&self.a_values, r / radius);
        }
        let row = disk.panels.operator_row(r / radius);
        1.0 - radius / (2.0 * PI) * row.iter().zip(&self.a_values).map(|(k, a)| k * a).sum::<f64>()
    }

    /// Copy with `a ≡ 1`, for probing the Δ formula.
    pub fn uniform(&self) -> Self {
        Self { a_values: vec![1.0; self.a_values.len()], residual: f64::NAN, ..self.clone() }
    }
}

pub fn solve_screening(sol: &TFDotSolution, tol: f64) -> Result<ScreeningProfile> {
    solve_screening_on(sol, tol, disk_for(sol))
}

/// Screening on an explicit discretization of the unit disk.
pub fn solve_screening_with(sol: &TFDotSolution, tol: f64, order: usize, levels: usize) -> Result<ScreeningProfile> {
    solve_screening_on(sol, tol, UnitDisk::cached(order, levels))
}

/// `a(x) = 1 − (1/2π)∫ a(y)θ(μ(y))/|x−y| d²y`, i.e. `(I + (R/2π)A₁)a = 1` on the unit disk.
fn solve_screening_on(sol: &TFDotSolution, tol: f64, disk: Arc<UnitDisk>) -> Result<ScreeningProfile> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let radius = sol.support_radius;
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(Error::invalid("support radius undefined"));
    }
    let n = disk.panels.len();
    let nodes: Vec<f64> = disk.panels.nodes().iter().map(|x| radius * x).collect();
    let a_values = disk.solve(radius, &vec![1.0; n]).map_err(|e| match e {
        Error::Singular(msg) => Error::Singular(format!("screening system: {msg}")),
        e => e,
    })?;
    let k = radius / (2.0 * PI);
    let collocation_residual = (0..n)
        .map(|i| {
            let row = disk.operator.row(i);
            let conv: f64 = row.iter().zip(&a_values).map(|(w, a)| w * a).sum();
            (a_values[i] + k * conv - 1.0).abs()
        })
        .fold(0.0, f64::max);
    let mut out = ScreeningProfile {
        support_radius: radius,
        nodes,
        a_values,
        residual: 0.0,
        collocation_residual,
        probe_residual: 0.0,
        disk: Some(disk),
    };
    out.probe_residual = screening_probe_residual(&out)?;
    out.residual = out.collocation_residual.max(out.probe_residual);
    if !(out.residual <= tol) {
        return Err(Error::not_converged("screening equation", out.residual));
    }
    Ok(out)
}

/// Defect at ten off-grid radii with the convolution from adaptive quadrature.
pub fn screening_probe_residual(scr: &ScreeningProfile) -> Result<f64> {
    let radius = scr.support_radius;
    if radius == 0.0 {
        return Ok(0.0);
    }
    let spec = QuadratureSpec::with_tol(1e-12, 1e-14);
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let r = radius * (k as f64 + 0.29) / 10.0;
        let conv = coulomb_radial_2d(|s| scr.a_at(s), radius, r, &spec)?;
        worst = worst.max((scr.a_at(r) - 1.0 + conv / (2.0 * PI)).abs());
    }
    Ok(worst)
}

/// `Δ = (1/π³)[∫μ₊^{1/2} a]² / ∫ a θ(μ)`.
pub fn dot_delta_term(sol: &TFDotSolution, scr: &ScreeningProfile) -> Result<f64> {
    let disk = scr.disk()?;
    let radius = sol.support_radius;
    if (radius - scr.support_radius).abs() > 1e-12 * radius.max(1.0) {
        return Err(Error::invalid("screening profile belongs to a different support"));
    }
    let mu = mu_on_disk(sol, disk);
    let num_f: Vec<f64> = mu.iter().zip(&scr.a_values).map(|(m, a)| m.sqrt() * a).collect();
    let num = area_integral(disk, radius, &num_f);
    let den = area_integral(disk, radius, &scr.a_values);
    if !(den.abs() > 0.0) || !den.is_finite() {
        return Err(Error::invalid("degenerate support: zero screening denominator"));
    }
    Ok(num * num / (PI.powi(3) * den))
}

/// `(1/24π)∫ΔW θ(μ) = (1/24π)·2πR·W′(R)` by the divergence theorem.
pub fn laplacian_flux(radius: f64, w_prime_at_r: f64) -> f64 {
    radius * w_prime_at_r / 12.0
}

pub fn dot_laplacian_term(sol: &TFDotSolution) -> Result<f64> {
    let r = sol.support_radius;
    if !(r > 0.0) || !r.is_finite() || !sol.w_prime_at_r.is_finite() {
        return Err(Error::invalid("support radius or edge slope undefined"));
    }
    Ok(laplacian_flux(r, sol.w_prime_at_r))
}

/// Area form `(1/24π)∫ΔW θ(μ)` with `ΔW = −Δμ₊` inside the support, from the
/// panel polynomials' second derivatives.
pub fn dot_laplacian_area(sol: &TFDotSolution) -> Result<f64> {
    let disk = sol
        .unit_disk()
        .ok_or_else(|| Error::invalid("area form needs a panel discretization of the profile"))?;
    let u = &sol.mu_plus;
    let panels = &disk.panels;
    let f: Vec<f64> = panels
        .nodes()
        .iter()
        .map(|&x| -(x * panels.interpolate_second_derivative(u, x) + panels.interpolate_derivative(u, x)))
        .collect();
    let integral: f64 = panels.weights().iter().zip(&f).map(|(w, v)| w * v).sum();
    Ok(integral / 12.0)
}

/// `(1/2π⁴)∫∫ μ₊^{1/2}(x) μ₊^{1/2}(y)/|x−y|`.
pub fn dot_correlation_integral(sol: &TFDotSolution) -> Result<f64> {
    let radius = sol.support_radius;
    if radius == 0.0 {
        return Ok(0.0);
    }
    let disk = disk_for(sol);
    let f: Vec<f64> = mu_on_disk(sol, &disk).iter().map(|m| m.sqrt()).collect();
    let af = &disk.operator * nalgebra::DVector::from_column_slice(&f);
    let g: Vec<f64> = f.iter().zip(af.iter()).map(|(a, b)| a * b).collect();
    Ok(radius.powi(3) / PI.powi(3) * disk.moment(&g))
}

pub fn dot_correlation(sol: &TFDotSolution) -> Result<(f64, f64)> {
    Ok((EC1_STAR_DOT + EC2_DOT, dot_correlation_integral(sol)?))
}

/// `∫μ₊^{3/2} d²x`.
fn mu_three_halves(sol: &TFDotSolution) -> f64 {
    let f: Vec<f64> = sol.mu_plus.iter().map(|m| m * m.sqrt()).collect();
    2.0 * PI * sol.grid.integrate(&f)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DotEnergyBreakdown {
    pub n: f64,
    pub confinement: String,
    pub support_radius: f64,
    pub mu_global: f64,
    pub tf_residual: f64,
    pub e_tf: f64,
    /// Dirac exchange `−(J/(2π)³)∫μ₊^{3/2}`, coefficient of `N^{3/2}`.
    pub exchange_term: f64,
    /// `−(2/(3π²))∫μ₊^{3/2}`.
    pub exchange_closed: f64,
    pub laplacian_term: f64,
    pub laplacian_area: Option<f64>,
    pub delta_term: f64,
    pub screening_residual: f64,
    pub corr_const: f64,
    pub corr_integral: f64,
    pub total: f64,
}

impl DotEnergyBreakdown {
    pub fn assemble(&self, n: f64) -> f64 {
        n * n * self.e_tf + n.powf(1.5) * self.exchange_term + n * (self.laplacian_term + self.delta_term)
            - n * (self.corr_const - self.corr_integral)
    }
}

pub fn dot_total_energy(n: f64, conf: &ConfinementSpec, tol: f64) -> Result<DotEnergyBreakdown> {
    if !(n >= 1.0) || !n.is_finite() {
        return Err(Error::invalid(format!("electron count must be >= 1, got {n}")));
    }
    let sol = solve_tf_dot_radial(conf, tol)?;
    dot_energy_from(n, &sol, tol)
}

/// Breakdown for an already solved profile.
pub fn dot_energy_from(n: f64, sol: &TFDotSolution, tol: f64) -> Result<DotEnergyBreakdown> {
    let ctx = ScalingContext::dot(n)?;
    let e_tf = tf_energy(sol, 1.0, &ctx)?.scaled;
    let i32 = mu_three_halves(sol);
    let scr = solve_screening(sol, tol.max(1e-8))?;
    let (corr_const, corr_integral) = dot_correlation(sol)?;
    let mut out = DotEnergyBreakdown {
        n,
        confinement: sol.confinement.description.clone(),
        support_radius: sol.support_radius,
        mu_global: sol.mu_global,
        tf_residual: sol.residual,
        e_tf,
        exchange_term: -constants::dot_exchange_coefficient() * i32,
        exchange_closed: -2.0 / (3.0 * PI * PI) * i32,
        laplacian_term: dot_laplacian_term(sol)?,
        laplacian_area: dot_laplacian_area(sol).ok(),
        delta_term: dot_delta_term(sol, &scr)?,
        screening_residual: scr.residual,
        corr_const,
        corr_integral,
        total: 0.0,
    };
    out.total = out.assemble(n);
    Ok(out)
}
