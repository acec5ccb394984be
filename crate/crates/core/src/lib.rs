//! Semiclassical ground-state energies of large atoms and quantum dots.
//!
//! The crate solves the Thomas–Fermi problem for neutral and ionized atoms
//! (3D) and radially confined quantum dots (2D), evaluates the universal
//! correlation constants twice (closed form and defining integral), and
//! assembles the smooth Hartree-exchange and leading correlation energies.

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod atom_energy;
pub mod config;
pub mod constants;
pub mod data;
pub mod dot_energy;
pub mod error;
pub mod numerics;
pub mod tf;

pub use error::{Error, Result};
