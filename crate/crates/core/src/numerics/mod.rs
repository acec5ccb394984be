//! Quadrature, Monte Carlo and special functions shared by the solvers.

pub mod montecarlo;
pub mod quadrature;
pub mod special;
pub mod spline;
pub mod sum;

pub use montecarlo::{integrate_mc, mc_estimate, BallSampler, BoxSampler, McResult, McRng, Sampler};
pub use quadrature::{
    gauss_legendre, integrate_1d, integrate_1d_singular, EndpointSingularity, IntegralResult,
    QuadratureSpec, Singularities,
};
pub use special::{
    catalan, elliptic_k, elliptic_k_complement, gamma_constant, gamma_partial_sum, gamma_series,
    zeta3,
};
pub use spline::{hermite_eval, CubicSpline, HermiteCurve};
pub use sum::{compensated_sum, CompensatedSum};
