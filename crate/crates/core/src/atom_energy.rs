//! Smooth Hartree-exchange coefficients and the leading correlation energy of
//! neutral atoms, assembled from the Thomas–Fermi profile.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::constants;
use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre, CompensatedSum, QuadratureSpec};
use crate::tf::TFAtomSolution;

pub const C7: f64 = -0.7687;
pub const C6: f64 = -0.5;
pub const C5: f64 = -0.2699;

/// Stored coefficients of the scaled correlation energy.
pub const LOG_COEFF: f64 = 0.03109;
pub const CONST_BASE: f64 = 0.03700;
pub const XA_COEFF: f64 = 0.01979;
pub const XB_COEFF: f64 = 0.01027;
pub const EC2_CONST: f64 = 0.06390;
/// Prefactor of the ordered double integral as printed next to `0.06390`.
pub const EC2_PRINTED_PREFACTOR: f64 = 2.0 * 8.0 * PI * PI * PI / 3.0;

/// Prefactor of the ordered double integral obtained from `(9/2)a₃²C₃` with
/// `a₃² = −4/9` and `C₃ = ε(4/χ₃²)∫∫μ₊μ₊/|x−y| = ε(2/π⁴)·I`.
pub fn ec2_prefactor() -> f64 {
    4.0 / PI.powi(4)
}

/// Energy unit of the scaled atom Hamiltonian.
pub const HARTREE_PER_UNIT: f64 = 2.0;

// ---------------------------------------------------------------------------
// Smooth HX energy

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct HxOverrides {
    pub c4: Option<f64>,
    pub c3: Option<f64>,
    pub c0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HxTerm {
    pub coefficient: f64,
    /// Exponent of `N`.
    pub power: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomSmoothHX {
    pub n: f64,
    pub c7: f64,
    pub c6: f64,
    pub c5: f64,
    pub c4: Option<f64>,
    pub c3: Option<f64>,
    pub c0: Option<f64>,
    pub terms: Vec<HxTerm>,
    /// Hartree.
    pub total: f64,
}

pub fn atom_smooth_hx(n: f64, overrides: HxOverrides) -> Result<AtomSmoothHX> {
    if !(n >= 1.0) || !n.is_finite() {
        return Err(Error::invalid(format!("electron count must be >= 1, got {n}")));
    }
    let mut spec = vec![(C7, 7.0 / 3.0), (C6, 2.0), (C5, 5.0 / 3.0)];
    for (c, p) in [(overrides.c4, 4.0 / 3.0), (overrides.c3, 1.0), (overrides.c0, 0.0)] {
        if let Some(c) = c {
            spec.push((c, p));
        }
    }
    let terms: Vec<HxTerm> =
        spec.into_iter().map(|(c, p)| HxTerm { coefficient: c, power: p, value: c * n.powf(p) }).collect();
    let total = terms.iter().map(|t| t.value).sum();
    Ok(AtomSmoothHX { n, c7: C7, c6: C6, c5: C5, c4: overrides.c4, c3: overrides.c3, c0: overrides.c0, terms, total })
}

// ---------------------------------------------------------------------------
// Profile integrals

fn check_profile(sol: &TFAtomSolution) -> Result<()> {
    if sol.mu_plus.iter().any(|m| !m.is_finite() || *m < 0.0) {
        return Err(Error::invalid("atom profile has negative or non-finite samples"));
    }
    Ok(())
}

fn check_neutral(sol: &TFAtomSolution) -> Result<()> {
    check_profile(sol)?;
    if sol.q != 1.0 {
        return Err(Error::invalid(format!("correlation integrals need a neutral profile, got q = {}", sol.q)));
    }
    if !(sol.residual < 1e-5) {
        return Err(Error::invalid(format!("profile is not solved (residual {:.3e})", sol.residual)));
    }
    Ok(())
}

/// `A = ∫₀^∞ r² μ₊^{3/2} ln μ₊^{1/2} dr`, with `0·ln 0 = 0`.
pub fn atom_a_integral(sol: &TFAtomSolution) -> Result<f64> {
    check_profile(sol)?;
    let f: Vec<f64> = sol.mu_plus.iter().map(|&m| if m > 0.0 { 0.5 * m * m.sqrt() * m.ln() } else { 0.0 }).collect();
    Ok(sol.grid.integrate(&f))
}

/// `∫₀^∞ dr r ∫₀^r ds s² μ₊(r) μ₊(s)`.
pub fn atom_ec2_integral(sol: &TFAtomSolution) -> Result<f64> {
    check_profile(sol)?;
    let inner = sol.grid.cumulative(&sol.mu_plus);
    let f: Vec<f64> = sol.grid.nodes().iter().zip(&sol.mu_plus).zip(&inner).map(|((r, m), c)| m * c / r).collect();
    Ok(sol.grid.integrate(&f))
}

/// `Φ_t = ∫_r^∞ (−μ′₊) e^{−t μ₊^{1/2}} = (2/t²)[1 − (1 + y)e^{−y}]`, `y = t μ₊^{1/2}`.
fn phi_t(mu: f64, t: f64) -> f64 {
    if t == 0.0 {
        return mu;
    }
    let y = t * mu.sqrt();
    let bracket = if y < 1e-3 {
        y * y * (0.5 - y / 3.0 + y * y / 8.0 - y * y * y / 30.0)
    } else {
        -(-y).exp_m1() - y * (-y).exp()
    };
    2.0 / (t * t) * bracket
}

struct Panels {
    x: Vec<f64>,
    w: Vec<f64>,
}

fn gl16() -> &'static Panels {
    static GL: std::sync::OnceLock<Panels> = std::sync::OnceLock::new();
    GL.get_or_init(|| {
        let (x, w) = gauss_legendre(16);
        Panels { x, w }
    })
}

/// `g(p, t) = ∫₀^∞ r μ′₊ e^{−tμ₊^{1/2}} [cos pr − sin(pr)/(pr)] dr`.
///
/// Integrating by parts twice gives `g = p ∫₀^∞ r Φ_t(r) sin(pr) dr`, which is
/// evaluated on Gauss panels no wider than half a period up to a cut `r_c` and
/// by an asymptotic expansion beyond it.
pub fn g_function(sol: &TFAtomSolution, p: f64, t: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    let f = |r: f64| r * phi_t(sol.mu_plus_at(r), t);
    let r_cut = (400.0 * PI / p).clamp(4.0, 2.0e4);
    let gl = gl16();
    let mut acc = CompensatedSum::new();
    let mut a = 0.0;
    let mut b = 1e-9_f64.min(r_cut);
    loop {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        for (x, w) in gl.x.iter().zip(&gl.w) {
            let r = c + h * x;
            acc.add(w * h * f(r) * (p * r).sin());
        }
        if b >= r_cut {
            break;
        }
        a = b;
        b = (a + (0.5 * a).min(0.5 * PI / p)).min(r_cut);
    }
    // ∫_c^∞ f sin(pr) = f cos(pc)/p − f′ sin(pc)/p² − f″ cos(pc)/p³ + …
    let c = r_cut;
    let d = 1e-3 * c;
    let (fm, f0, fp) = (f(c - d), f(c), f(c + d));
    let (d1, d2) = ((fp - fm) / (2.0 * d), (fp - 2.0 * f0 + fm) / (d * d));
    let (s, co) = (p * c).sin_cos();
    acc.add(f0 * co / p - d1 * s / (p * p) - d2 * co / (p * p * p));
    p * acc.value()
}

/// Gauss nodes on log-uniform panels, one per `per_decade`-th of a decade.
fn log_nodes(lo: f64, hi: f64, per_decade: usize) -> Vec<(f64, f64)> {
    let gl = gl16();
    let decades = (hi / lo).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(1);
    let step = (hi / lo).ln() / n as f64;
    let mut out = Vec::with_capacity(16 * n);
    for k in 0..n {
        let u0 = lo.ln() + k as f64 * step;
        for (x, w) in gl.x.iter().zip(&gl.w) {
            let u = u0 + 0.5 * step * (1.0 + x);
            let v = u.exp();
            out.push((v, 0.5 * step * w * v));
        }
    }
    out
}

/// `∫_{t_min}^{t_max} dt ∫_0^{p_max} dp ln p · g²(p, t)` on tensor Gauss panels.
/// The piece `p < 1e-3` is dropped (`g = O(p²)` there).
pub fn b_integral_truncated(sol: &TFAtomSolution, t_min: f64, t_max: f64, p_max: f64) -> Result<f64> {
    check_profile(sol)?;
    if !(t_min > 0.0 && t_max > t_min && p_max > 1e-3) {
        return Err(Error::domain("truncated B needs 0 < t_min < t_max and p_max > 1e-3"));
    }
    let ts = log_nodes(t_min, t_max, 1);
    let ps = log_nodes(1e-3, p_max, 1);
    let mut acc = CompensatedSum::new();
    for &(t, wt) in &ts {
        for &(p, wp) in &ps {
            let g = g_function(sol, p, t);
            acc.add(wt * wp * p.ln() * g * g);
        }
    }
    Ok(acc.value())
}

/// `∫_0^{p_max} dp ln p · g²(p, 0)`; grows like `p_max ln p_max` when `g(p,0) → 1`.
pub fn b_inner_at_zero_t(sol: &TFAtomSolution, p_max: f64) -> Result<f64> {
    check_profile(sol)?;
    let mut acc = CompensatedSum::new();
    for (p, w) in log_nodes(1e-3, p_max, 2) {
        let g = g_function(sol, p, 0.0);
        acc.add(w * p.ln() * g * g);
    }
    Ok(acc.value())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BTruncation {
    pub t_min: f64,
    pub p_max: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BStudy {
    /// Truncated integrals with `p_max = 1/t_min²`, the scale where the
    /// nuclear cusp stops contributing to `g`.
    pub truncations: Vec<BTruncation>,
    /// `g(p, 0)` at large `p`; tends to `lim r μ₊ = 1`.
    pub g_large_p: Vec<(f64, f64)>,
    pub converged: bool,
}

pub fn atom_b_study(sol: &TFAtomSolution, spec: &QuadratureSpec) -> Result<BStudy> {
    check_profile(sol)?;
    let mut truncations = Vec::new();
    for t_min in [1.0, 0.3, 0.1] {
        let p_max: f64 = 1.0 / (t_min * t_min);
        let value = b_integral_truncated(sol, t_min, 30.0, p_max.max(10.0))?;
        truncations.push(BTruncation { t_min, p_max, value });
    }
    let g_large_p = [10.0, 100.0, 1000.0].iter().map(|&p| (p, g_function(sol, p, 0.0))).collect();
    let n = truncations.len();
    let (a, b) = (truncations[n - 2].value, truncations[n - 1].value);
    let converged = (a - b).abs() <= spec.rel_tol.max(1e-3) * b.abs().max(1e-300);
    Ok(BStudy { truncations, g_large_p, converged })
}

/// `B = ∫₀^∞dt ∫₀^∞dp ln p · g²(p, t)`.
///
/// Near the nucleus `r μ′₊ → −1/r`, so `g(p, 0) → 1` and the `p` integral at
/// small `t` grows without bound. The truncation sequence is returned in the
/// error when it does not settle.
pub fn atom_b_integral(sol: &TFAtomSolution, spec: &QuadratureSpec) -> Result<f64> {
    let study = atom_b_study(sol, spec)?;
    let last = study.truncations.last().expect("non-empty").value;
    if study.converged {
        Ok(last)
    } else {
        let prev = study.truncations[study.truncations.len() - 2].value;
        Err(Error::not_converged(
            format!(
                "B integral diverges: truncations {:?}, g(p,0) at large p {:?}",
                study.truncations.iter().map(|t| (t.t_min, t.value)).collect::<Vec<_>>(),
                study.g_large_p
            ),
            (last - prev).abs() / last.abs().max(1e-300),
        ))
    }
}

// ---------------------------------------------------------------------------
// Correlation breakdown

/// Coefficient of `−Ē_c` in hartree per electron for the logarithmic term, by convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlopeConvention {
    /// `2·0.03109·ln N`: the scaled `ln Z^{1/3}` read as `ln N`.
    #[serde(rename = "per-lnN")]
    PerLnN,
    /// `2·0.03109·ln N^{1/3}`: the literal scaled form with `N = Z`.
    #[serde(rename = "per-lnN^(1/3)")]
    PerLnNCubeRoot,
}

impl SlopeConvention {
    /// Slope of `−Ē_c/N` against `ln N`.
    pub fn slope(self) -> f64 {
        match self {
            Self::PerLnN => HARTREE_PER_UNIT * LOG_COEFF,
            Self::PerLnNCubeRoot => HARTREE_PER_UNIT * LOG_COEFF / 3.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::PerLnN => "per-lnN",
            Self::PerLnNCubeRoot => "per-lnN^(1/3)",
        }
    }
}

impl std::str::FromStr for SlopeConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-lnN" | "lnN" => Ok(Self::PerLnN),
            "per-lnN^(1/3)" | "lnN13" | "per-lnN13" => Ok(Self::PerLnNCubeRoot),
            _ => Err(Error::invalid(format!("unknown slope convention '{s}'"))),
        }
    }
}

/// Contributions to `−Ē_c` in hartree per electron at `N = Z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerElectronHartree {
    /// Coefficient of `ln Z^{1/3}`.
    pub log_term: f64,
    pub const_base: f64,
    pub x_a: f64,
    pub x_b: Option<f64>,
    pub x_unknown: f64,
    pub ec2_const: f64,
    /// Ordered double integral with the prefactor from `(9/2)a₃²C₃`.
    pub ec2_integral: f64,
    /// The same with the prefactor printed beside the atom formula.
    pub ec2_integral_printed_prefactor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomCorrelationBreakdown {
    pub n: f64,
    pub z: f64,
    pub log_coeff: f64,
    pub const_base: f64,
    pub a_value: f64,
    /// `None` when the `B` integral does not converge.
    pub b_value: Option<f64>,
    pub b_study: BStudy,
    pub x_a: f64,
    /// `0.01027·B`; sign convention in `x_b_convention`.
    pub x_b: Option<f64>,
    pub x_b_convention: String,
    pub ec2_const: f64,
    pub ec2_integral: f64,
    pub ec2_prefactor: f64,
    /// Constant x with no computed value, supplied by the caller.
    pub x_unknown: f64,
    pub per_electron_hartree: PerElectronHartree,
    /// `−Ē_c` in hartree from every available term.
    pub total_hartree: f64,
}

impl AtomCorrelationBreakdown {
    /// `−Ē_c` excluding `ln Z` and `x_b`, per electron.
    pub fn per_electron_linear(&self) -> f64 {
        let h = &self.per_electron_hartree;
        h.const_base + h.x_a + h.x_b.unwrap_or(0.0) + h.x_unknown + h.ec2_const + h.ec2_integral
    }
}

/// Assembles `−Ē_c = 2 Z^{4/3}(−E_c)` for a neutral atom, with
/// `−E_c;1 = 0.03109 (N/Z^{4/3}) ln Z^{1/3} + Z^{-1/3}[0.03700 + x_a + x_b + x]` and
/// `−E_c;2 = 0.06390 N/Z^{4/3} − Z^{-1/3}(4/π⁴) ∫dr r∫ds s² μ₊μ₊`.
pub fn atom_correlation(
    n: f64,
    z: f64,
    x_unknown: f64,
    sol: &TFAtomSolution,
    spec: &QuadratureSpec,
) -> Result<AtomCorrelationBreakdown> {
    if !(n > 0.0 && z > 0.0) || !n.is_finite() || !z.is_finite() {
        return Err(Error::invalid("N and Z must be positive"));
    }
    if (n / z - sol.q).abs() > 1e-12 {
        return Err(Error::invalid(format!("N/Z = {} does not match the profile's q = {}", n / z, sol.q)));
    }
    check_neutral(sol)?;
    let a_value = atom_a_integral(sol)?;
    let b_study = atom_b_study(sol, spec)?;
    let b_value = b_study.converged.then(|| b_study.truncations.last().expect("non-empty").value);
    let ec2_integral = atom_ec2_integral(sol)?;
    let x_a = XA_COEFF * a_value;
    let x_b = b_value.map(|b| XB_COEFF * b);
    let u = HARTREE_PER_UNIT;
    let per = PerElectronHartree {
        log_term: u * LOG_COEFF,
        const_base: u * CONST_BASE,
        x_a: u * x_a,
        x_b: x_b.map(|x| u * x),
        x_unknown: u * x_unknown,
        ec2_const: u * EC2_CONST,
        ec2_integral: -u * ec2_prefactor() * ec2_integral,
        ec2_integral_printed_prefactor: -u * EC2_PRINTED_PREFACTOR * ec2_integral,
    };
    let mut out = AtomCorrelationBreakdown {
        n,
        z,
        log_coeff: LOG_COEFF,
        const_base: CONST_BASE,
        a_value,
        b_value,
        b_study,
        x_a,
        x_b,
        x_b_convention: "x_b = +0.01027*B; the t-expansion term -B/(2 pi) gives x_b = -B/pi^4 instead"
            .into(),
        ec2_const: EC2_CONST,
        ec2_integral,
        ec2_prefactor: ec2_prefactor(),
        x_unknown,
        per_electron_hartree: per,
        total_hartree: 0.0,
    };
    out.total_hartree = n * (out.per_electron_hartree.log_term * z.powf(1.0 / 3.0).ln() + out.per_electron_linear());
    Ok(out)
}

/// Relative differences between the stored coefficients and their closed forms.
pub fn coefficient_checks() -> Vec<(&'static str, f64, f64)> {
    vec![
        ("log_coeff", LOG_COEFF, (1.0 - LN_2) / (PI * PI)),
        ("const_base", CONST_BASE, constants::xlin_bracket() / (2.0 * PI * PI)),
        ("xa_coeff", XA_COEFF, constants::xa_coefficient()),
        ("xb_coeff", XB_COEFF, constants::xb_coefficient()),
        ("ec2_const", EC2_CONST, constants::atom_ec2_constant()),
    ]
}
