//! Periodic cubic interpolation of closed sampled curves.

use crate::error::{Error, Result};

/// Periodic C² cubic spline through `n` uniformly spaced knots, parameter `t ∈ [0, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSpline {
    values: Vec<f64>,
    /// Second derivatives at the knots.
    moments: Vec<f64>,
}

impl PeriodicSpline {
    pub fn new(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n < 4 {
            return Err(Error::Geometry(format!(
                "periodic spline needs at least 4 samples, got {n}"
            )));
        }
        // M[i-1] + 4 M[i] + M[i+1] = 6 (y[i-1] - 2 y[i] + y[i+1]), cyclic.
        let rhs: Vec<f64> = (0..n)
            .map(|i| 6.0 * (values[(i + n - 1) % n] - 2.0 * values[i] + values[(i + 1) % n]))
            .collect();
        let moments = solve_cyclic(1.0, 4.0, 1.0, &rhs);
        Ok(Self {
            values: values.to_vec(),
            moments,
        })
    }

    pub fn period(&self) -> f64 {
        self.values.len() as f64
    }

    /// Value and first two derivatives at `t`.
    pub fn eval(&self, t: f64) -> [f64; 3] {
        let n = self.values.len();
        let tt = t.rem_euclid(n as f64);
        let i = (tt.floor() as usize).min(n - 1);
        let s = tt - i as f64;
        let j = (i + 1) % n;
        let (y0, y1) = (self.values[i], self.values[j]);
        let (m0, m1) = (self.moments[i], self.moments[j]);
        let a = 1.0 - s;
        let value = a * y0 + s * y1 + ((a * a * a - a) * m0 + (s * s * s - s) * m1) / 6.0;
        let d1 = y1 - y0 + ((1.0 - 3.0 * a * a) * m0 + (3.0 * s * s - 1.0) * m1) / 6.0;
        let d2 = a * m0 + s * m1;
        [value, d1, d2]
    }
}

/// Solves the cyclic system with constant bands `(lower, diag, upper)` via Sherman-Morrison.
fn solve_cyclic(lower: f64, diag: f64, upper: f64, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let gamma = -diag;
    let mut b = vec![diag; n];
    b[0] = diag - gamma;
    b[n - 1] = diag - lower * upper / gamma;
    let x = solve_tridiagonal(lower, &b, upper, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = upper;
    let z = solve_tridiagonal(lower, &b, upper, &u);
    let fact = (x[0] + lower * x[n - 1] / gamma) / (1.0 + z[0] + lower * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

fn solve_tridiagonal(lower: f64, diag: &[f64], upper: f64, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower * c[i - 1];
        c[i] = upper / m;
        d[i] = (rhs[i] - lower * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}
