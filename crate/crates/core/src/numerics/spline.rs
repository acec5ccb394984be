//! Piecewise-cubic interpolation.

use crate::error::{Error, Result};

/// Cubic spline through `(x_i, y_i)` with natural or clamped end conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// second derivatives at the knots
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        Self::build(x, y, None)
    }

    pub fn clamped(x: Vec<f64>, y: Vec<f64>, d0: f64, dn: f64) -> Result<Self> {
        Self::build(x, y, Some((d0, dn)))
    }

    fn build(x: Vec<f64>, y: Vec<f64>, slopes: Option<(f64, f64)>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::invalid("spline needs at least two points and matching lengths"));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("spline abscissae must be strictly increasing"));
        }
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut r = vec![0.0; n];
        match slopes {
            None => {
                b[0] = 1.0;
                b[n - 1] = 1.0;
            }
            Some((d0, dn)) => {
                let h0 = x[1] - x[0];
                b[0] = h0 / 3.0;
                c[0] = h0 / 6.0;
                r[0] = (y[1] - y[0]) / h0 - d0;
                let hn = x[n - 1] - x[n - 2];
                a[n - 1] = hn / 6.0;
                b[n - 1] = hn / 3.0;
                r[n - 1] = dn - (y[n - 1] - y[n - 2]) / hn;
            }
        }
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            a[i] = h0 / 6.0;
            b[i] = (h0 + h1) / 3.0;
            c[i] = h1 / 6.0;
            r[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        }
        let m = solve_tridiagonal(&a, &b, &c, &r);
        Ok(Self { x, y, m })
    }

    fn locate(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        (self.y[i + 1] - self.y[i]) / h
            + ((1.0 - 3.0 * a * a) * self.m[i] + (3.0 * b * b - 1.0) * self.m[i + 1]) * h / 6.0
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }
}

/// Piecewise cubic Hermite interpolant from values and exact slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteCurve {
    x: Vec<f64>,
    y: Vec<f64>,
    dy: Vec<f64>,
}

impl HermiteCurve {
    pub fn new(x: Vec<f64>, y: Vec<f64>, dy: Vec<f64>) -> Result<Self> {
        if x.len() < 2 || y.len() != x.len() || dy.len() != x.len() {
            return Err(Error::invalid("hermite curve needs matching lengths >= 2"));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("hermite abscissae must be strictly increasing"));
        }
        Ok(Self { x, y, dy })
    }

    pub fn eval(&self, t: f64) -> f64 {
        hermite_eval(&self.x, &self.y, &self.dy, t)
    }
}

fn solve_tridiagonal(a: &[f64], b: &[f64], c: &[f64], r: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut rp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    rp[0] = r[0] / b[0];
    for i in 1..n {
        let den = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / den;
        rp[i] = (r[i] - a[i] * rp[i - 1]) / den;
    }
    let mut out = vec![0.0; n];
    out[n - 1] = rp[n - 1];
    for i in (0..n - 1).rev() {
        out[i] = rp[i] - cp[i] * out[i + 1];
    }
    out
}

/// Evaluates the cubic Hermite interpolant of `(x, y, dy)` at `t` without copying.
pub fn hermite_eval(x: &[f64], y: &[f64], dy: &[f64], t: f64) -> f64 {
    let n = x.len();
    let i = match x.binary_search_by(|v| v.total_cmp(&t)) {
        Ok(i) => i.min(n - 2),
        Err(0) => 0,
        Err(i) => (i - 1).min(n - 2),
    };
    let h = x[i + 1] - x[i];
    let s = (t - x[i]) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y[i] + h10 * h * dy[i] + h01 * y[i + 1] + h11 * h * dy[i + 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamped_spline_reproduces_cubic() {
        let x: Vec<f64> = (0..11).map(|i| i as f64 * 0.3).collect();
        let f = |t: f64| 2.0 * t * t * t - t + 0.5;
        let df = |t: f64| 6.0 * t * t - 1.0;
        let y = x.iter().map(|&t| f(t)).collect();
        let s = CubicSpline::clamped(x.clone(), y, df(0.0), df(3.0)).unwrap();
        for t in [0.05, 0.77, 1.5, 2.99] {
            assert!((s.eval(t) - f(t)).abs() < 1e-12);
            assert!((s.derivative(t) - df(t)).abs() < 1e-11);
        }
    }

    #[test]
    fn natural_spline_interpolates_knots() {
        let x = vec![0.0, 1.0, 2.5, 4.0];
        let y = vec![1.0, -1.0, 0.5, 3.0];
        let s = CubicSpline::natural(x.clone(), y.clone()).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert!((s.eval(*xi) - yi).abs() < 1e-14);
        }
    }

    #[test]
    fn hermite_reproduces_cubic() {
        let x: Vec<f64> = vec![0.0, 0.4, 1.0, 1.7];
        let f = |t: f64| t * t * t - 2.0 * t;
        let df = |t: f64| 3.0 * t * t - 2.0;
        let h = HermiteCurve::new(
            x.clone(),
            x.iter().map(|&t| f(t)).collect(),
            x.iter().map(|&t| df(t)).collect(),
        )
        .unwrap();
        for t in [0.1, 0.5, 1.3] {
            assert!((h.eval(t) - f(t)).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_unsorted() {
        assert!(CubicSpline::natural(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
    }
}
