use std::f64::consts::PI;
use std::path::Path;
use std::sync::OnceLock;

use tfcorr::numerics::{integrate_1d, QuadratureSpec};
use tfcorr::tf::dot::{probe_residual, solve_tf_dot_with};
use tfcorr::tf::profile_io::ProfileDump;
use tfcorr::tf::{
    coulomb_radial_2d, integrated_dos, solve_tf_atom, solve_tf_dot_radial, tf_energy, ConfinementSpec,
    DotSolverOptions, RadialGrid, ScalingContext, TFAtomSolution, TFDotSolution, TfProfile,
};

fn neutral() -> &'static TFAtomSolution {
    static S: OnceLock<TFAtomSolution> = OnceLock::new();
    S.get_or_init(|| solve_tf_atom(1.0, &RadialGrid::atom_default(), 1e-6).unwrap())
}

fn harmonic() -> &'static TFDotSolution {
    static S: OnceLock<TFDotSolution> = OnceLock::new();
    S.get_or_init(|| solve_tf_dot_radial(&ConfinementSpec::harmonic(), 1e-9).unwrap())
}

fn quartic() -> &'static TFDotSolution {
    static S: OnceLock<TFDotSolution> = OnceLock::new();
    S.get_or_init(|| solve_tf_dot_radial(&ConfinementSpec::quartic(), 1e-9).unwrap())
}

#[test]
fn neutral_atom_normalization_and_residual() {
    let s = neutral();
    assert!((s.normalization() - 1.0).abs() < 1e-6, "norm {}", s.normalization());
    assert!(s.residual < 1e-6);
    assert_eq!(s.mu_global, 0.0);
}

#[test]
fn neutral_atom_tail_coefficient() {
    // φ ~ 144/s³ with r = b·s, b = (3π/4)^{2/3}: r⁴μ₊ = r³φ → 144 b³ = 81π².
    let b = (3.0 * PI / 4.0).powf(2.0 / 3.0);
    let oracle = 144.0 * b.powi(3);
    assert!((oracle - 81.0 * PI * PI).abs() < 1e-9);
    let tail = neutral().tail_coeff.unwrap();
    assert!((tail / oracle - 1.0).abs() < 0.01, "tail {tail}");
    // Through the stored tail form, far enough out that the s^-λ correction is small.
    let r: f64 = 1e9;
    let v = r.powi(4) * neutral().mu_plus_at(r);
    assert!((v / oracle - 1.0).abs() < 0.01, "r^4 mu at {r}: {v}");
}

#[test]
fn atom_origin_coefficient() {
    let s = neutral();
    let r0 = s.grid.nodes()[0];
    assert!((r0 * s.mu_plus[0] - 1.0).abs() <= 0.01);
    assert!((s.origin_coeff - 1.0).abs() <= 0.01);
}

#[test]
fn atom_profile_strictly_decreasing() {
    let s = neutral();
    assert!(s.mu_plus.windows(2).all(|w| w[1] < w[0]));
    assert!(s.mu_plus.iter().all(|&m| m >= 0.0));
    assert!(s.mu_plus_prime.iter().all(|&d| d < 0.0));
}

#[test]
fn atom_energy_in_hartree() {
    let ctx = ScalingContext::neutral_atom(1.0).unwrap();
    let e = tf_energy(neutral(), 1.0, &ctx).unwrap();
    let h = e.hartree.unwrap();
    assert!((h / -0.7687 - 1.0).abs() < 1e-3, "E = {h}");
}

#[test]
fn atom_energy_grid_refinement() {
    let ctx = ScalingContext::neutral_atom(1.0).unwrap();
    let coarse = tf_energy(neutral(), 1.0, &ctx).unwrap().scaled;
    let fine_grid = RadialGrid::logarithmic(1e-6, 1e4, 4000).unwrap();
    let fine = solve_tf_atom(1.0, &fine_grid, 1e-6).unwrap();
    let e2 = tf_energy(&fine, 1.0, &ctx).unwrap().scaled;
    assert!(((coarse - e2) / e2).abs() < 1e-3, "{coarse} vs {e2}");
}

#[test]
fn ions_are_normalized_with_compact_support() {
    let ctx = ScalingContext::atom(1.0, 1.0).unwrap();
    for q in [0.5, 0.9] {
        let s = solve_tf_atom(q, &RadialGrid::atom_default(), 1e-6).unwrap();
        assert!((s.normalization() / q - 1.0).abs() < 1e-6, "q {q}: norm {}", s.normalization());
        assert!(s.mu_global < 0.0);
        let r0 = s.support_radius.expect("ion has an edge");
        assert_eq!(s.mu_plus_at(1.01 * r0), 0.0);
        assert!(s.residual < 1e-6);
        // D(μ) = N/2 with N = q.
        let d = integrated_dos(&s, &ctx, s.mu_global).unwrap();
        assert!((d / (q / 2.0) - 1.0).abs() < 1e-4, "q {q}: D {d}");
    }
}

#[test]
fn invalid_q_is_rejected() {
    let g = RadialGrid::atom_default();
    for q in [0.0, -0.5, 1.5, f64::NAN] {
        assert!(solve_tf_atom(q, &g, 1e-6).is_err(), "q = {q}");
    }
}

#[test]
fn atom_dos_properties() {
    let s = neutral();
    let ctx = ScalingContext::neutral_atom(1.0).unwrap();
    let d = integrated_dos(s, &ctx, s.mu_global).unwrap();
    assert!((d - 0.5).abs() < 0.5e-4, "D(mu) = {d}");
    let below = integrated_dos(s, &ctx, -1e9).unwrap();
    assert_eq!(below, 0.0);
    let es = [-10.0, -1.0, -0.1];
    let ds: Vec<f64> = es.iter().map(|&e| integrated_dos(s, &ctx, e).unwrap()).collect();
    assert!(ds.windows(2).all(|w| w[1] >= w[0]), "{ds:?}");
}

#[test]
fn dot_dos_properties() {
    for s in [harmonic(), quartic()] {
        for n in [1.0, 50.0] {
            let ctx = ScalingContext::dot(n).unwrap();
            let d = integrated_dos(s, &ctx, s.mu_global).unwrap();
            assert!((d / (n / 2.0) - 1.0).abs() < 1e-4, "N {n}: D {d}");
        }
        let ctx = ScalingContext::dot(1.0).unwrap();
        // For r^4 the induced potential puts a local maximum of W at the centre.
        let w_min = (0..=400).map(|k| s.w_at(2.0 * s.support_radius * k as f64 / 400.0)).fold(f64::INFINITY, f64::min);
        assert_eq!(integrated_dos(s, &ctx, w_min - 1e-3).unwrap(), 0.0);
        let es = [0.5 * s.mu_global, s.mu_global, 1.5 * s.mu_global];
        let ds: Vec<f64> = es.iter().map(|&e| integrated_dos(s, &ctx, e).unwrap()).collect();
        assert!(ds.windows(2).all(|w| w[1] >= w[0]), "{ds:?}");
    }
}

#[test]
fn dot_normalization_and_support() {
    for s in [harmonic(), quartic()] {
        assert!((s.normalization() - 1.0).abs() < 1e-6);
        assert!(s.residual < 1e-9);
        assert!(probe_residual(s) < 1e-8);
        assert!(s.mu_plus.iter().all(|&m| m >= 0.0));
        let r = s.support_radius;
        assert_eq!(s.mu_plus_at(r), 0.0);
        assert_eq!(s.mu_plus_at(1.5 * r), 0.0);
    }
}

#[test]
fn quartic_dot_has_one_sign_change() {
    let s = quartic();
    let r = s.support_radius;
    assert!(s.mu_plus_at(0.0) > 0.0);
    let local = |x: f64| s.mu_global - s.w_at(x);
    let xs: Vec<f64> = (0..200).map(|k| 2.0 * r * (k as f64 + 0.5) / 200.0).collect();
    let changes = xs.windows(2).filter(|w| local(w[0]).signum() != local(w[1]).signum()).count();
    assert_eq!(changes, 1);
    assert!(local(0.99 * r) > 0.0 && local(1.01 * r) < 0.0);
}

#[test]
fn dot_energy_matches_virial_form() {
    // E/N = ½[μ + (1/2π)∫Vμ₊], by adaptive quadrature on the interpolated profile.
    let spec = QuadratureSpec::with_tol(1e-11, 1e-14);
    for s in [harmonic(), quartic()] {
        let r = s.support_radius;
        let pot = integrate_1d(|x| s.external_potential(x) * s.mu_plus_at(x) * x, 0.0, r, &spec).unwrap().value;
        let oracle = 0.5 * (s.mu_global + pot);
        let e = tf_energy(s, 1.0, &ScalingContext::dot(1.0).unwrap()).unwrap().scaled;
        assert!(((e - oracle) / oracle).abs() < 5e-3, "{e} vs {oracle}");
    }
}

#[test]
fn dot_refinement_is_stable() {
    let conf = ConfinementSpec::harmonic();
    let fine = solve_tf_dot_with(&conf, 1e-9, &DotSolverOptions::default().refined()).unwrap();
    let ctx = ScalingContext::dot(1.0).unwrap();
    let e1 = tf_energy(harmonic(), 1.0, &ctx).unwrap().scaled;
    let e2 = tf_energy(&fine, 1.0, &ctx).unwrap().scaled;
    assert!(((e1 - e2) / e2).abs() < 1e-3);
    assert!((harmonic().support_radius - fine.support_radius).abs() < 1e-6);
}

#[test]
fn fixed_point_solver_agrees_with_nystrom() {
    let s = harmonic();
    let grid = RadialGrid::uniform_in_r_squared(2.5 * s.support_radius, 400).unwrap();
    let fp = solve_tf_dot_with(&ConfinementSpec::harmonic(), 1e-9, &DotSolverOptions::fixed_point(0.3, grid)).unwrap();
    assert!((fp.support_radius / s.support_radius - 1.0).abs() < 1e-3);
    assert!((fp.mu_global / s.mu_global - 1.0).abs() < 1e-3);
}

#[test]
fn harmonic_profile_is_not_a_semicircle() {
    // The semicircle is a quadratic-potential density; μ − V − U is then a
    // quadratic polynomial, which cannot match it. Measured deviation is large.
    let s = harmonic();
    let c = s.mu_plus_at(0.0);
    let r = s.support_radius;
    let dev = (0..50)
        .map(|k| {
            let x = r * k as f64 / 50.0;
            (s.mu_plus_at(x) - c * (1.0 - (x / r).powi(2)).sqrt()).abs()
        })
        .fold(0.0, f64::max);
    assert!(dev > 0.1, "deviation {dev}");
    // The edge is linear, not square-root.
    assert!(s.w_prime_at_r > 1.0);
}

#[test]
fn empty_profile_energy_vanishes() {
    let s = TFAtomSolution::default();
    let ctx = ScalingContext::neutral_atom(1.0).unwrap();
    let e = tf_energy(&s, 1.0, &ctx).unwrap();
    assert_eq!(e.scaled, 0.0);
}

#[test]
fn profile_csv_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    for (name, dump) in [("atom.csv", ProfileDump::from_atom(neutral())), ("dot.csv", ProfileDump::from_dot(harmonic()))] {
        let p = dir.path().join(name);
        dump.write(&p).unwrap();
        let back = ProfileDump::read(&p).unwrap();
        assert_eq!(back, dump);
        assert!(back.header.contains_key("mu_global") && back.header.contains_key("grid_size"));
    }
}

#[test]
fn malformed_profile_reports_line() {
    let text = "# d = 3\nr,mu_plus,mu_plus_prime\n1,2,3\n1,x,3\n";
    let err = ProfileDump::parse(text, Path::new("p.csv")).unwrap_err().to_string();
    assert!(err.contains(":4"), "{err}");
}

#[test]
fn coulomb_uniform_disk_centre() {
    let spec = QuadratureSpec::with_tol(1e-12, 1e-14);
    let (sigma, radius) = (0.7, 1.3);
    let v = coulomb_radial_2d(|_| sigma, radius, 0.0, &spec).unwrap();
    assert!((v - 2.0 * PI * sigma * radius).abs() < 1e-9);
}

#[test]
fn coulomb_uniform_disk_far_field() {
    let spec = QuadratureSpec::with_tol(1e-12, 1e-14);
    let (sigma, radius) = (1.0, 1.0);
    // In-plane multipoles of a uniform disk: (πR²σ/r)[1 + x/8 + 3x²/64 + …], x = R²/r².
    let series = |r: f64| {
        let x = radius * radius / (r * r);
        PI * radius * radius * sigma / r * (1.0 + x / 8.0 + 3.0 * x * x / 64.0)
    };
    let v = coulomb_radial_2d(|_| sigma, radius, 2.0 * radius, &spec).unwrap();
    assert!((v / series(2.0 * radius) - 1.0).abs() < 1e-3, "{v} vs {}", series(2.0 * radius));
    let r = 4.0 * radius;
    let v = coulomb_radial_2d(|_| sigma, radius, r, &spec).unwrap();
    assert!((v / (PI * radius * radius * sigma / r) - 1.0).abs() < 0.02);
}

#[test]
fn coulomb_narrow_ring_at_centre() {
    let spec = QuadratureSpec::with_tol(1e-12, 1e-14);
    let (s0, w) = (0.6, 0.05);
    let ring = |s: f64| (1.0 - ((s - s0) / w).powi(2)).max(0.0);
    let v = coulomb_radial_2d(ring, 1.0, 0.0, &spec).unwrap();
    // Kernel at r = 0 is 2π/s, so the ring gives 2π∫f ds = 2π·4w/3.
    assert!((v / (2.0 * PI * 4.0 * w / 3.0) - 1.0).abs() < 1e-6, "{v}");
}

#[test]
fn grid_weights_reproduce_moments() {
    let g = RadialGrid::atom_default();
    let (r0, r1) = (g.nodes()[0], g.r_max());
    for k in 0..=3 {
        let v: Vec<f64> = g.nodes().iter().map(|r| r.powi(k)).collect();
        let exact = r1.powi(k + 3) / (k + 3) as f64;
        let got = g.integrate(&v);
        assert!((got / exact - 1.0).abs() < 1e-10, "k {k}: {got} vs {exact}");
        let _ = r0;
    }
    let d = RadialGrid::uniform_in_r_squared(2.0, 300).unwrap();
    assert!(d.nodes().windows(2).all(|w| w[1] > w[0]) && d.nodes()[0] >= 0.0);
    for k in 0..=3 {
        let v: Vec<f64> = d.nodes().iter().map(|r| r.powi(k)).collect();
        let exact = 2f64.powi(k + 2) / (k + 2) as f64;
        assert!((d.integrate(&v) / exact - 1.0).abs() < 1e-10);
    }
}

#[test]
fn confinement_parsing() {
    assert!(ConfinementSpec::parse("r^2").is_ok());
    assert!(ConfinementSpec::parse("r^4").is_ok());
    assert!(ConfinementSpec::parse("r^p:3").is_ok());
    assert!(ConfinementSpec::parse("2*r^p:2").is_ok());
    assert!(ConfinementSpec::parse("r^p:-1").is_err());
    assert!(ConfinementSpec::parse("bogus").is_err());
    assert!(ConfinementSpec::parse("file:/definitely/missing.csv").is_err());
}

#[test]
fn tabulated_confinement_matches_analytic() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("v.csv");
    let mut text = String::from("r,v\n");
    for k in 0..=400 {
        let r = 4.0 * k as f64 / 400.0;
        text.push_str(&format!("{r},{}\n", r * r));
    }
    std::fs::write(&p, text).unwrap();
    let conf = ConfinementSpec::parse(&format!("file:{}", p.display())).unwrap();
    let s = solve_tf_dot_radial(&conf, 1e-6).unwrap();
    assert!((s.support_radius / harmonic().support_radius - 1.0).abs() < 1e-4);
}
