//! Adaptive one-dimensional quadrature.
//!
//! Global adaptive Gauss–Kronrod (7/15) with a priority queue on the local
//! error estimate. Semi-infinite ranges are mapped onto `[0, 1)` with
//! `x = a + u / (1 - u)`; declared endpoint singularities are absorbed by a
//! power-law substitution `x = a + (b - a) u^n` before the adaptive pass.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::sum::CompensatedSum;
use crate::error::{Error, Result};

/// Tolerances and budgets shared by the deterministic and Monte Carlo paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: usize,
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-13,
            max_evals: 2_000_000,
            mc_samples: 1 << 20,
            seed: 0x5eed_7fc0_ffee,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tol(rel_tol: f64, abs_tol: f64) -> Self {
        Self { rel_tol, abs_tol, ..Self::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, mc_samples: usize) -> Self {
        self.mc_samples = mc_samples;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !self.rel_tol.is_finite() {
            return Err(Error::invalid(format!("rel_tol must be > 0, got {}", self.rel_tol)));
        }
        if !(self.abs_tol >= 0.0) || !self.abs_tol.is_finite() {
            return Err(Error::invalid(format!("abs_tol must be >= 0, got {}", self.abs_tol)));
        }
        if self.max_evals < 1 {
            return Err(Error::invalid("max_evals must be >= 1"));
        }
        if self.mc_samples < 1 {
            return Err(Error::invalid("mc_samples must be >= 1"));
        }
        Ok(())
    }

    /// Either tolerance being met counts as converged.
    pub fn accepts(&self, value: f64, error: f64) -> bool {
        error <= self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Integrable endpoint behaviour declared by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum EndpointSingularity {
    #[default]
    None,
    /// `ln|x - x0|`
    Log,
    /// `|x - x0|^(-alpha)`, `0 <= alpha < 1`
    Power(f64),
}

impl EndpointSingularity {
    fn exponent(self) -> u32 {
        match self {
            EndpointSingularity::None => 1,
            EndpointSingularity::Log => 3,
            EndpointSingularity::Power(alpha) => {
                let a = alpha.clamp(0.0, 0.95);
                ((2.0 / (1.0 - a)).ceil() as u32).max(2)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Singularities {
    pub lower: EndpointSingularity,
    pub upper: EndpointSingularity,
}

impl Singularities {
    pub const NONE: Singularities =
        Singularities { lower: EndpointSingularity::None, upper: EndpointSingularity::None };

    pub fn lower(kind: EndpointSingularity) -> Self {
        Self { lower: kind, upper: EndpointSingularity::None }
    }

    pub fn upper(kind: EndpointSingularity) -> Self {
        Self { lower: EndpointSingularity::None, upper: kind }
    }

    pub fn both(kind: EndpointSingularity) -> Self {
        Self { lower: kind, upper: kind }
    }
}

/// `∫_a^b f(x) dx` with `b` finite or `+∞`.
pub fn integrate_1d<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    F: Fn(f64) -> f64,
{
    integrate_1d_singular(f, a, b, Singularities::NONE, spec)
}

/// Like [`integrate_1d`] with declared endpoint singularities.
pub fn integrate_1d_singular<F>(
    f: F,
    a: f64,
    b: f64,
    sing: Singularities,
    spec: &QuadratureSpec,
) -> Result<IntegralResult>
where
    F: Fn(f64) -> f64,
{
    spec.validate()?;
    if a.is_nan() || b.is_nan() {
        return Err(Error::invalid("integration bounds must not be NaN"));
    }
    if a == b {
        return Ok(IntegralResult { value: 0.0, error_estimate: 0.0, evals: 0, converged: true });
    }
    if b < a {
        let mut r = integrate_1d_singular(
            f,
            b,
            a,
            Singularities { lower: sing.upper, upper: sing.lower },
            spec,
        )?;
        r.value = -r.value;
        return Ok(r);
    }
    if !a.is_finite() {
        return Err(Error::invalid("lower bound must be finite"));
    }

    if b == f64::INFINITY {
        // x = a + u/(1-u); the map is ~linear at u=0 so a lower singularity keeps its type.
        let g = |u: f64| {
            let one_minus = 1.0 - u;
            if one_minus <= 0.0 {
                return (0.0, a);
            }
            let x = a + u / one_minus;
            let jac = 1.0 / (one_minus * one_minus);
            (jac, x)
        };
        let mapped = Singularities { lower: sing.lower, upper: EndpointSingularity::None };
        return integrate_mapped(&f, &g, 0.0, 1.0, mapped, spec);
    }

    let identity = |u: f64| (1.0, u);
    integrate_mapped(&f, &identity, a, b, sing, spec)
}

/// Integrates `f(map(u).1) * map(u).0` over `[lo, hi]`, splitting at the midpoint when
/// both ends are singular and applying the power substitution at each singular end.
fn integrate_mapped<F, M>(
    f: &F,
    map: &M,
    lo: f64,
    hi: f64,
    sing: Singularities,
    spec: &QuadratureSpec,
) -> Result<IntegralResult>
where
    F: Fn(f64) -> f64,
    M: Fn(f64) -> (f64, f64),
{
    let lower_n = sing.lower.exponent();
    let upper_n = sing.upper.exponent();

    let eval = |u: f64| -> Result<f64> {
        let (jac, x) = map(u);
        if jac == 0.0 {
            return Ok(0.0);
        }
        let y = f(x);
        if !y.is_finite() {
            return Err(Error::NonFiniteIntegrand { x, value: y });
        }
        Ok(jac * y)
    };

    match (lower_n, upper_n) {
        (1, 1) => adaptive_gk(&eval, lo, hi, spec),
        (n, 1) => {
            let w = hi - lo;
            let g = |v: f64| -> Result<f64> {
                let vn1 = v.powi(n as i32 - 1);
                let jac = w * n as f64 * vn1;
                if jac == 0.0 {
                    return Ok(0.0);
                }
                let u = lo + w * vn1 * v;
                if u <= lo {
                    return Ok(0.0);
                }
                Ok(jac * eval(u)?)
            };
            adaptive_gk(&g, 0.0, 1.0, spec)
        }
        (1, n) => {
            let w = hi - lo;
            let g = |v: f64| -> Result<f64> {
                let vn1 = v.powi(n as i32 - 1);
                let jac = w * n as f64 * vn1;
                if jac == 0.0 {
                    return Ok(0.0);
                }
                let u = hi - w * vn1 * v;
                if u >= hi {
                    return Ok(0.0);
                }
                Ok(jac * eval(u)?)
            };
            adaptive_gk(&g, 0.0, 1.0, spec)
        }
        _ => {
            let mid = 0.5 * (lo + hi);
            let half = QuadratureSpec { max_evals: spec.max_evals.div_ceil(2), ..*spec };
            let left = integrate_mapped(
                f,
                map,
                lo,
                mid,
                Singularities { lower: sing.lower, upper: EndpointSingularity::None },
                &half,
            )?;
            let right = integrate_mapped(
                f,
                map,
                mid,
                hi,
                Singularities { lower: EndpointSingularity::None, upper: sing.upper },
                &half,
            )?;
            let value = left.value + right.value;
            let error_estimate = left.error_estimate + right.error_estimate;
            Ok(IntegralResult {
                value,
                error_estimate,
                evals: left.evals + right.evals,
                converged: spec.accepts(value, error_estimate),
            })
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

fn gk15<G>(g: &G, lo: f64, hi: f64) -> Result<(f64, f64)>
where
    G: Fn(f64) -> Result<f64>,
{
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = g(c)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = g(c - dx)?;
        let f2 = g(c + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * h;
    resasc *= h.abs();
    resabs *= h.abs();
    let mut err = ((kronrod - gauss) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Ok((value, err))
}

fn adaptive_gk<G>(g: &G, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    G: Fn(f64) -> Result<f64>,
{
    let (v0, e0) = gk15(g, lo, hi)?;
    let mut evals = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { lo, hi, value: v0, error: e0 });
    let mut total_value = v0;
    let mut total_error = e0;
    // Segments too narrow to split further; their error is frozen.
    let mut frozen: Vec<Segment> = Vec::new();

    while !spec.accepts(total_value, total_error) && evals + 30 <= spec.max_evals {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(mid > worst.lo && mid < worst.hi)
            || (worst.hi - worst.lo) <= 4.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE)
        {
            frozen.push(worst);
            continue;
        }
        let (vl, el) = gk15(g, worst.lo, mid)?;
        let (vr, er) = gk15(g, mid, worst.hi)?;
        evals += 30;
        total_value += vl + vr - worst.value;
        total_error += el + er - worst.error;
        heap.push(Segment { lo: worst.lo, hi: mid, value: vl, error: el });
        heap.push(Segment { lo: mid, hi: worst.hi, value: vr, error: er });
    }

    // Re-sum in positional order so the result does not depend on heap history.
    let mut segs: Vec<Segment> = heap.into_vec();
    segs.extend(frozen);
    segs.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut v = CompensatedSum::new();
    let mut e = CompensatedSum::new();
    for s in &segs {
        v.add(s.value);
        e.add(s.error);
    }
    let value = v.value();
    let error_estimate = e.value();
    Ok(IntegralResult {
        value,
        error_estimate,
        evals,
        converged: spec.accepts(value, error_estimate),
    })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}
