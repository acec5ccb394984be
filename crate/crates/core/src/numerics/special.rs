//! Special functions and number-theoretic constants.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const AGM_MAX_ITER: usize = 60;

/// Arithmetic–geometric mean of two non-negative reals.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..AGM_MAX_ITER {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        if (an - bn).abs() <= 2.0 * f64::EPSILON * an {
            return an;
        }
        a = an;
        b = bn;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind in the parameter convention,
/// `K(m) = ∫₀^{π/2} dθ / √(1 − m sin²θ)`, via the AGM.
pub fn elliptic_k(m: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&m) {
        return Err(Error::domain(format!("elliptic_k requires 0 <= m < 1, got {m}")));
    }
    Ok(PI / (2.0 * agm(1.0, (1.0 - m).sqrt())))
}

/// `K` as a function of the complementary parameter `m1 = 1 − m`. Avoids the
/// cancellation in `1 − m` when `m` is close to one.
#[inline]
pub fn elliptic_k_complement(m1: f64) -> f64 {
    debug_assert!(m1 > 0.0);
    PI / (2.0 * agm(1.0, m1.sqrt()))
}

/// Catalan's constant `G = Σ (−1)ⁿ/(2n+1)²`, by the Ramanujan series
/// `G = (π/8) ln(2+√3) + (3/8) Σ (n!)² / ((2n)! (2n+1)²)`.
pub fn catalan() -> f64 {
    let mut term = 1.0; // (n!)^2/(2n)!
    let mut sum = 0.0;
    for n in 0..60 {
        let k = 2 * n + 1;
        let add = term / (k * k) as f64;
        sum += add;
        if add < 1e-20 {
            break;
        }
        let nf = (n + 1) as f64;
        term *= nf * nf / ((2.0 * nf - 1.0) * 2.0 * nf);
    }
    PI / 8.0 * (2.0 + 3f64.sqrt()).ln() + 3.0 / 8.0 * sum
}

/// Apéry's constant `ζ(3) = (5/2) Σ_{n≥1} (−1)^{n+1} (n!)² / (n³ (2n)!)`.
pub fn zeta3() -> f64 {
    let mut term = 0.5; // (n!)^2/(2n)! at n = 1
    let mut sum = 0.0;
    for n in 1..60 {
        let nf = n as f64;
        let add = term / (nf * nf * nf);
        sum += if n % 2 == 1 { add } else { -add };
        if add < 1e-20 {
            break;
        }
        let np = nf + 1.0;
        term *= np * np / ((2.0 * np - 1.0) * 2.0 * np);
    }
    2.5 * sum
}

fn gamma_term(n: usize, inner: f64) -> f64 {
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let np1 = (n + 1) as f64;
    sign * inner / (np1 * np1 * np1)
}

/// Raw partial sum of `γ = Σₙ (−1)ⁿ/(n+1)³ Σ_{m≤n} (−1)ᵐ/(2m+1)` over the
/// first `n_terms` outer terms.
pub fn gamma_partial_sum(n_terms: usize) -> f64 {
    let mut inner = 0.0;
    let mut total = 0.0;
    for n in 0..n_terms {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        inner += sign / (2 * n + 1) as f64;
        total += gamma_term(n, inner);
    }
    total
}

/// `γ` from `n_terms` outer terms, averaging the last two partial sums to
/// cancel the leading alternating error.
pub fn gamma_series(n_terms: usize) -> f64 {
    let n = n_terms.max(2);
    let mut inner = 0.0;
    let mut total = 0.0;
    let mut previous = 0.0;
    for k in 0..n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        inner += sign / (2 * k + 1) as f64;
        previous = total;
        total += gamma_term(k, inner);
    }
    0.5 * (previous + total)
}

/// Converged value of the `γ` series used by the constant reports.
pub fn gamma_constant() -> f64 {
    gamma_series(4000)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quadrature::{integrate_1d, QuadratureSpec};

    fn k_by_quadrature(m: f64) -> f64 {
        let spec = QuadratureSpec::with_tol(1e-14, 0.0);
        integrate_1d(|t: f64| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt(), 0.0, PI / 2.0, &spec)
            .unwrap()
            .value
    }

    #[test]
    fn k_at_zero() {
        assert_eq!(elliptic_k(0.0).unwrap(), PI / 2.0);
    }

    #[test]
    fn k_half_matches_quadrature() {
        let k = elliptic_k(0.5).unwrap();
        let q = k_by_quadrature(0.5);
        assert!((k - q).abs() / q < 1e-14, "{k} vs {q}");
        assert!((k - 1.854_074_677_301_372).abs() < 1e-14);
    }

    #[test]
    fn k_matches_quadrature_on_sample_parameters() {
        for m in [0.0, 0.25, 0.5, 0.75, 0.99] {
            let k = elliptic_k(m).unwrap();
            let q = k_by_quadrature(m);
            assert!((k - q).abs() / q < 1e-10, "m={m}: {k} vs {q}");
        }
    }

    #[test]
    fn k_log_asymptote_near_one() {
        let m1 = 1e-6;
        let m = 1.0 - m1;
        let k = elliptic_k(m).unwrap();
        let asym = 0.5 * (16.0 / m1).ln();
        let q = k_by_quadrature(m);
        assert!((k - q).abs() / q < 1e-10);
        assert!((k - asym).abs() < 1e-5, "{}", k - asym);
        assert!((elliptic_k_complement(m1) - k).abs() < 1e-9);
    }

    #[test]
    fn k_is_increasing() {
        let mut last = 0.0;
        for i in 0..1000 {
            let k = elliptic_k(i as f64 / 1000.0).unwrap();
            assert!(k > last);
            last = k;
        }
    }

    #[test]
    fn k_domain() {
        assert!(elliptic_k(1.0).is_err());
        assert!(elliptic_k(-0.1).is_err());
    }

    /// Direct alternating series with Euler (binomial) averaging of the tail.
    fn catalan_oracle() -> f64 {
        let n = 2000;
        let mut partial = Vec::with_capacity(n);
        let mut s = 0.0;
        for k in 0..n {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            s += sign / ((2 * k + 1) as f64).powi(2);
            partial.push(s);
        }
        // repeated pairwise averaging of the last partial sums
        let mut tail: Vec<f64> = partial[n - 20..].to_vec();
        while tail.len() > 1 {
            tail = tail.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        }
        tail[0]
    }

    fn zeta3_oracle() -> f64 {
        let n = 100_000;
        let s: f64 = (1..=n).rev().map(|k| 1.0 / (k as f64).powi(3)).sum();
        let nf = n as f64;
        // Euler–Maclaurin tail
        s + 1.0 / (2.0 * nf * nf) - 1.0 / (2.0 * nf * nf * nf) + 1.0 / (4.0 * nf.powi(4))
    }

    #[test]
    fn catalan_against_direct_series() {
        let g = catalan();
        assert!((g - catalan_oracle()).abs() < 1e-12, "{g}");
        assert!((g - 0.915_965_594).abs() < 1e-9);
    }

    #[test]
    fn zeta3_against_direct_series() {
        let z = zeta3();
        assert!((z - zeta3_oracle()).abs() < 1e-12, "{z}");
        assert!((z - 1.202_056_903).abs() < 1e-9);
    }

    #[test]
    fn constants_in_crude_bounds() {
        for c in [catalan(), zeta3()] {
            assert!(c > 0.9 && c < 1.3);
        }
    }

    #[test]
    fn gamma_first_terms() {
        assert_eq!(gamma_partial_sum(1), 1.0);
        assert!((gamma_partial_sum(2) - (1.0 - (1.0 / 8.0) * (2.0 / 3.0))).abs() < 1e-15);
    }

    #[test]
    fn gamma_series_is_stable() {
        let a = gamma_series(200);
        let b = gamma_series(400);
        assert!((a - b).abs() < 1e-8, "{a} {b}");
        assert!((a - 0.9424).abs() < 1e-4, "{a}");
    }

    #[test]
    fn gamma_partial_sums_bracket_the_limit() {
        let limit = gamma_constant();
        for n in 1..60 {
            let (lo, hi) = {
                let a = gamma_partial_sum(n);
                let b = gamma_partial_sum(n + 1);
                (a.min(b), a.max(b))
            };
            assert!(lo <= limit && limit <= hi, "n={n}: [{lo}, {hi}] vs {limit}");
        }
    }
}
