//! Thomas–Fermi solutions for atoms and radially confined dots.

pub mod atom;
pub mod coulomb;
pub mod dot;
pub mod grid;
pub mod profile_io;
pub mod scaling;

use serde::{Deserialize, Serialize};

pub use atom::{solve_tf_atom, TFAtomSolution};
pub use coulomb::{coulomb_kernel_2d, coulomb_radial_2d};
pub use dot::{solve_tf_dot_radial, ConfinementSpec, DotMethod, DotSolverOptions, TFDotSolution};
pub use grid::{GridLaw, RadialGrid};
pub use scaling::{alpha_d, sphere_surface, ScalingContext};

use crate::error::{Error, Result};
use crate::numerics::{integrate_1d, QuadratureSpec};

/// Common view of a solved radial profile.
pub trait TfProfile {
    fn dim(&self) -> u32;
    fn mu_global(&self) -> f64;
    fn grid(&self) -> &RadialGrid;
    /// `μ₊` at the grid nodes.
    fn mu_plus(&self) -> &[f64];
    fn residual(&self) -> f64;
    fn external_potential(&self, r: f64) -> f64;
    /// Local chemical potential `μ − W(r)` beyond the last grid node.
    fn exterior_local_mu(&self, r: f64) -> f64;
    /// Outer radius of the region `W(r) < e` beyond the grid, `None` if unbounded.
    fn exterior_reach(&self, e: f64) -> Option<f64>;
}

/// `∫ g(r) d^dx` for a radial function sampled on the profile grid.
pub fn volume_integral<P: TfProfile + ?Sized>(sol: &P, values: &[f64]) -> f64 {
    sphere_surface(sol.dim()) * sol.grid().integrate(values)
}

/// Semiclassical integrated density of states,
/// `D(e) = (α_d/ε^d) ∫ (e − W(x))₊^{d/2} d^dx`.
pub fn integrated_dos<P: TfProfile + ?Sized>(sol: &P, ctx: &ScalingContext, e: f64) -> Result<f64> {
    if ctx.d != sol.dim() {
        return Err(Error::invalid("scaling context and profile dimensions differ"));
    }
    let half_d = sol.dim() as f64 / 2.0;
    let shift = e - sol.mu_global();
    let r_last = sol.grid().r_max();
    let vals: Vec<f64> = sol
        .mu_plus()
        .iter()
        .map(|m| (shift + m).max(0.0).powf(half_d))
        .collect();
    let mut total = volume_integral(sol, &vals);
    let reach = match sol.exterior_reach(e) {
        Some(r) => r,
        None => return Ok(f64::INFINITY),
    };
    if reach > r_last {
        let p = sol.dim() as i32 - 1;
        let g = |r: f64| (shift + sol.exterior_local_mu(r)).max(0.0).powf(half_d) * r.powi(p);
        let res = integrate_1d(g, r_last, reach, &QuadratureSpec::default())?;
        total += sphere_surface(sol.dim()) * res.value;
    }
    Ok(ctx.alpha_d / ctx.epsilon.powi(ctx.d as i32) * total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TfEnergy {
    /// Energy per unit `Z` in scaled units (`E/Z`).
    pub scaled: f64,
    /// Energy in the original Hamiltonian's units, `Z^{3−2/d}·E/Z`.
    pub total: f64,
    /// `total` in hartrees when the context defines a unit.
    pub hartree: Option<f64>,
}

/// Thomas–Fermi energy of a solved profile:
/// `E/Z = α_d[∫μ₊^{d/2}V + (d−2)/(d+2)∫μ₊^{d/2+1}] + ½μq`.
pub fn tf_energy<P: TfProfile + ?Sized>(sol: &P, q: f64, ctx: &ScalingContext) -> Result<TfEnergy> {
    if ctx.d != sol.dim() {
        return Err(Error::invalid("scaling context and profile dimensions differ"));
    }
    if !sol.residual().is_finite() || sol.mu_plus().iter().any(|m| !m.is_finite() || *m < 0.0) {
        return Err(Error::invalid("profile is not a finite nonnegative solution"));
    }
    let d = sol.dim() as f64;
    let half_d = d / 2.0;
    let nodes = sol.grid().nodes();
    let pot: Vec<f64> = sol
        .mu_plus()
        .iter()
        .zip(nodes)
        .map(|(m, r)| if *m > 0.0 { m.powf(half_d) * sol.external_potential(*r) } else { 0.0 })
        .collect();
    let kin: Vec<f64> = sol.mu_plus().iter().map(|m| m.powf(half_d + 1.0)).collect();
    let scaled = ctx.alpha_d
        * (volume_integral(sol, &pot) + (d - 2.0) / (d + 2.0) * volume_integral(sol, &kin))
        + 0.5 * sol.mu_global() * q;
    let total = ctx.tf_energy_scale() * scaled;
    Ok(TfEnergy { scaled, total, hartree: ctx.to_hartree(total) })
}
