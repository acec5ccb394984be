use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Surface of the unit sphere in `d` dimensions, `2π^{d/2}/Γ(d/2)`.
pub fn sphere_surface(d: u32) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => sphere_surface(d - 2) * 2.0 * PI / (d - 2) as f64,
    }
}

/// `α_d = S_d / (d (2π)^d)`.
pub fn alpha_d(d: u32) -> f64 {
    sphere_surface(d) / (d as f64 * (2.0 * PI).powi(d as i32))
}

/// Rescaling between the original Hamiltonian and the ε-scaled one.
///
/// Lengths scale by `Z^{2/d-1}`, energies by `Z^{2-2/d}`, and `ε = Z^{-1/d}`
/// plays the role of ħ. Atom energies are in units of two hartrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingContext {
    pub d: u32,
    pub z: f64,
    pub n: f64,
    pub q: f64,
    pub epsilon: f64,
    pub alpha_d: f64,
    pub s_d: f64,
    /// Hartrees per energy unit; `None` for dots, which stay in scaled units.
    pub energy_unit_hartree: Option<f64>,
}

impl ScalingContext {
    pub fn atom(z: f64, n: f64) -> Result<Self> {
        if !(z > 0.0) || !(n > 0.0) || !z.is_finite() || !n.is_finite() {
            return Err(Error::domain(format!("atom needs Z, N > 0 (got Z={z}, N={n})")));
        }
        let q = n / z;
        if q > 1.0 + 1e-12 {
            return Err(Error::domain(format!("only neutral atoms and positive ions: N/Z = {q} > 1")));
        }
        Ok(Self {
            d: 3,
            z,
            n,
            q: q.min(1.0),
            epsilon: z.powf(-1.0 / 3.0),
            alpha_d: alpha_d(3),
            s_d: sphere_surface(3),
            energy_unit_hartree: Some(2.0),
        })
    }

    pub fn neutral_atom(z: f64) -> Result<Self> {
        Self::atom(z, z)
    }

    pub fn dot(n: f64) -> Result<Self> {
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::domain(format!("dot needs N > 0 (got {n})")));
        }
        Ok(Self {
            d: 2,
            z: n,
            n,
            q: 1.0,
            epsilon: n.powf(-0.5),
            alpha_d: alpha_d(2),
            s_d: sphere_surface(2),
            energy_unit_hartree: None,
        })
    }

    /// Factor between the scaled energy per unit `Z` and the original energy:
    /// `Ē = Z^{2-2/d} E`, and the semiclassical `E` carries one more power of `Z`.
    pub fn tf_energy_scale(&self) -> f64 {
        self.z.powf(3.0 - 2.0 / self.d as f64)
    }

    /// Converts an energy in the original Hamiltonian's units to hartrees.
    pub fn to_hartree(&self, energy: f64) -> Option<f64> {
        self.energy_unit_hartree.map(|u| u * energy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_values() {
        assert!((alpha_d(3) - 1.0 / (6.0 * PI * PI)).abs() < 1e-17);
        assert!((alpha_d(2) - 1.0 / (4.0 * PI)).abs() < 1e-17);
    }

    #[test]
    fn epsilon_is_inverse_root() {
        let c = ScalingContext::neutral_atom(27.0).unwrap();
        assert!((c.epsilon - 1.0 / 3.0).abs() < 1e-15);
        let d = ScalingContext::dot(16.0).unwrap();
        assert_eq!(d.epsilon, 0.25);
        assert_eq!(d.z, d.n);
        assert_eq!(d.q, 1.0);
    }

    #[test]
    fn negative_ions_rejected() {
        assert!(ScalingContext::atom(10.0, 11.0).is_err());
        assert!(ScalingContext::atom(0.0, 1.0).is_err());
    }
}
