use std::f64::consts::PI;
use std::sync::OnceLock;

use tfcorr::dot_energy::*;
use tfcorr::numerics::{integrate_1d, QuadratureSpec};
use tfcorr::tf::dot::{solve_tf_dot_with, DotSolverOptions};
use tfcorr::tf::{coulomb_radial_2d, solve_tf_dot_radial, ConfinementSpec, TFDotSolution};

fn harmonic() -> &'static TFDotSolution {
    static S: OnceLock<TFDotSolution> = OnceLock::new();
    S.get_or_init(|| solve_tf_dot_radial(&ConfinementSpec::harmonic(), 1e-9).unwrap())
}

fn harmonic_refined() -> &'static TFDotSolution {
    static S: OnceLock<TFDotSolution> = OnceLock::new();
    S.get_or_init(|| {
        let opts = DotSolverOptions::default().refined();
        solve_tf_dot_with(&ConfinementSpec::harmonic(), 1e-9, &opts).unwrap()
    })
}

fn quartic() -> &'static TFDotSolution {
    static S: OnceLock<TFDotSolution> = OnceLock::new();
    S.get_or_init(|| solve_tf_dot_radial(&ConfinementSpec::quartic(), 1e-9).unwrap())
}

fn tight() -> QuadratureSpec {
    QuadratureSpec::with_tol(1e-11, 1e-14)
}

/// `∫ f(|x|) d²x` over the support by adaptive quadrature.
fn area(f: impl Fn(f64) -> f64, radius: f64) -> f64 {
    integrate_1d(|r| 2.0 * PI * r * f(r), 0.0, radius, &tight()).unwrap().value
}

#[test]
fn screening_solves_the_equation() {
    let s = harmonic();
    let scr = solve_screening(s, 1e-8).unwrap();
    assert!(scr.residual < 1e-8, "{}", scr.residual);
    assert!(scr.a_values.iter().all(|a| a.is_finite() && *a < 1.0 && *a > 0.0));
    // Independent substitution at radii not used by the solver.
    let spec = tight();
    for r in [0.05, 0.4, 0.9, 1.3, 1.55] {
        let conv = coulomb_radial_2d(|t| scr.a_at(t), s.support_radius, r, &spec).unwrap();
        let defect = scr.a_at(r) - 1.0 + conv / (2.0 * PI);
        assert!(defect.abs() < 1e-8, "r {r}: {defect}");
    }
}

#[test]
fn screening_tends_to_one_for_a_small_support() {
    // Strong confinement shrinks R; 1 − a ≤ (1/2π)·max ∫_disk d²y/|x−y| = R, the centre value.
    let conf = ConfinementSpec::power_law(2.0, 1e6).unwrap();
    let s = solve_tf_dot_radial(&conf, 1e-9).unwrap();
    assert!(s.support_radius < 0.05, "{}", s.support_radius);
    let scr = solve_screening(&s, 1e-8).unwrap();
    let bound = s.support_radius;
    for a in &scr.a_values {
        assert!(*a <= 1.0 && 1.0 - a <= bound, "{a}");
    }
}

#[test]
fn screening_is_stable_under_refinement() {
    let s = harmonic();
    let coarse = solve_screening_with(s, 1e-8, 16, 24).unwrap();
    let fine = solve_screening_with(s, 1e-8, 24, 36).unwrap();
    for k in 0..=20 {
        let r = s.support_radius * k as f64 / 20.0;
        let (a, b) = (coarse.a_at(r), fine.a_at(r));
        assert!((a - b).abs() < 1e-6, "r {r}: {a} vs {b}");
    }
}

#[test]
fn delta_with_uniform_screening() {
    let s = harmonic();
    let scr = solve_screening(s, 1e-8).unwrap().uniform();
    let r = s.support_radius;
    let root = area(|x| s.mu_plus_at(x).sqrt(), r);
    let expected = root * root / (PI.powi(3) * PI * r * r);
    let got = dot_delta_term(s, &scr).unwrap();
    assert!((got / expected - 1.0).abs() < 1e-7, "{got} vs {expected}");
}

#[test]
fn delta_is_homogeneous_in_the_profile() {
    let s = harmonic();
    let scr = solve_screening(s, 1e-8).unwrap();
    let base = dot_delta_term(s, &scr).unwrap();
    assert!(base > 0.0);
    for lambda in [0.25, 4.0] {
        let mut scaled = s.clone();
        scaled.mu_plus.iter_mut().for_each(|m| *m *= lambda);
        let got = dot_delta_term(&scaled, &scr).unwrap();
        assert!((got / (lambda * base) - 1.0).abs() < 1e-12, "λ {lambda}");
    }
}

#[test]
fn delta_is_grid_stable() {
    let a = dot_delta_term(harmonic(), &solve_screening(harmonic(), 1e-8).unwrap()).unwrap();
    let fine = harmonic_refined();
    let b = dot_delta_term(fine, &solve_screening(fine, 1e-8).unwrap()).unwrap();
    assert!((a / b - 1.0).abs() < 5e-3, "{a} vs {b}");
}

#[test]
fn delta_rejects_a_foreign_screening_profile() {
    let scr = solve_screening(quartic(), 1e-8).unwrap();
    assert!(dot_delta_term(harmonic(), &scr).is_err());
}

#[test]
fn laplacian_flux_and_area() {
    // W = r²: W′(R) = 2R, flux R²/6.
    for r in [0.5, 1.0, 3.0] {
        assert!((laplacian_flux(r, 2.0 * r) - r * r / 6.0).abs() < 1e-15);
    }
    for s in [harmonic(), quartic()] {
        let flux = dot_laplacian_term(s).unwrap();
        let area = dot_laplacian_area(s).unwrap();
        assert!((flux / area - 1.0).abs() < 1e-2, "{flux} vs {area}");
    }
}

#[test]
fn laplacian_responds_monotonically_to_confinement_strength() {
    let terms: Vec<f64> = [0.5, 1.0, 2.0]
        .iter()
        .map(|c| {
            let s = solve_tf_dot_radial(&ConfinementSpec::power_law(2.0, *c).unwrap(), 1e-9).unwrap();
            dot_laplacian_term(&s).unwrap()
        })
        .collect();
    assert!(terms.iter().all(|t| *t > 0.0));
    assert!(terms.windows(2).all(|w| w[1] > w[0]), "{terms:?}");
}

#[test]
fn correlation_integral_against_adaptive_quadrature() {
    let s = harmonic();
    let r = s.support_radius;
    let spec = tight();
    let f = |x: f64| s.mu_plus_at(x).sqrt();
    let outer = integrate_1d(
        |x| 2.0 * PI * x * f(x) * coulomb_radial_2d(f, r, x, &spec).unwrap(),
        0.0,
        r,
        &QuadratureSpec::with_tol(1e-9, 1e-12),
    )
    .unwrap()
    .value;
    let oracle = outer / (2.0 * PI.powi(4));
    let got = dot_correlation_integral(s).unwrap();
    assert!((got / oracle - 1.0).abs() < 1e-6, "{got} vs {oracle}");
    let fine = dot_correlation_integral(harmonic_refined()).unwrap();
    assert!((got / fine - 1.0).abs() < 1e-2);
}

#[test]
fn correlation_constant_is_universal() {
    let (c2, i2) = dot_correlation(harmonic()).unwrap();
    let (c4, i4) = dot_correlation(quartic()).unwrap();
    assert_eq!(c2.to_bits(), c4.to_bits());
    assert!((c2 - 0.2989).abs() < 1e-12);
    assert!((i2 - i4).abs() > 1e-3);
}

#[test]
fn breakdown_for_the_harmonic_dot() {
    let n = 100.0;
    let b = dot_energy_from(n, harmonic(), 1e-9).unwrap();
    assert_eq!(b.total, b.assemble(n));
    let parts = n * n * b.e_tf + n.powf(1.5) * b.exchange_term + n * (b.laplacian_term + b.delta_term)
        - n * (b.corr_const - b.corr_integral);
    assert_eq!(b.total, parts);
    assert!((b.exchange_term / b.exchange_closed - 1.0).abs() < 1e-14);
    assert!(b.exchange_term < 0.0);
    let ratio = n * n * b.e_tf / (n.powf(1.5) * b.exchange_term.abs());
    assert!(ratio > 5.0, "{ratio}");
    let area = b.laplacian_area.unwrap();
    assert!((b.laplacian_term / area - 1.0).abs() < 1e-2);
    assert!(b.screening_residual < 1e-8);
}

#[test]
fn coefficients_depend_on_the_potential_except_the_constant() {
    let a = dot_energy_from(10.0, harmonic(), 1e-9).unwrap();
    let b = dot_energy_from(10.0, quartic(), 1e-9).unwrap();
    assert_eq!(a.corr_const.to_bits(), b.corr_const.to_bits());
    for (name, x, y) in [
        ("e_tf", a.e_tf, b.e_tf),
        ("exchange", a.exchange_term, b.exchange_term),
        ("laplacian", a.laplacian_term, b.laplacian_term),
        ("delta", a.delta_term, b.delta_term),
        ("corr_integral", a.corr_integral, b.corr_integral),
    ] {
        assert!((x - y).abs() > 1e-6 * x.abs().max(y.abs()), "{name}: {x} vs {y}");
    }
}

#[test]
fn total_energy_rejects_small_n() {
    assert!(dot_total_energy(0.5, &ConfinementSpec::harmonic(), 1e-9).is_err());
    assert!(dot_total_energy(f64::NAN, &ConfinementSpec::harmonic(), 1e-9).is_err());
    let b = dot_total_energy(1.0, &ConfinementSpec::harmonic(), 1e-9).unwrap();
    assert_eq!(b.total, b.assemble(1.0));
}
