//! Jacobi-preconditioned BiCGSTAB with restarted GMRES as fallback.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::CsrMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub restart: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 20_000,
            restart: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KrylovMethod {
    BiCgStab,
    Gmres,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovReport {
    pub method: KrylovMethod,
    pub iterations: usize,
    /// `‖b − Mx‖ / ‖b‖` recomputed from the returned iterate.
    pub relative_residual: f64,
}

fn jacobi(matrix: &CsrMatrix<f64>) -> Result<DVector<f64>> {
    let mut inv = DVector::zeros(matrix.nrows());
    for (i, row) in matrix.row_iter().enumerate() {
        let d = row
            .col_indices()
            .iter()
            .zip(row.values())
            .find(|(c, _)| **c == i)
            .map(|(_, v)| *v)
            .unwrap_or(0.0);
        if d == 0.0 || !d.is_finite() {
            return Err(Error::Solver {
                iterations: 0,
                residual: f64::NAN,
                reason: format!("zero or non-finite diagonal in row {i}"),
            });
        }
        inv[i] = 1.0 / d;
    }
    Ok(inv)
}

fn true_residual(matrix: &CsrMatrix<f64>, x: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let r = b - matrix * x;
    r.norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Solves `M x = b`, trying BiCGSTAB first and GMRES if it breaks down or stalls.
pub fn solve(
    matrix: &CsrMatrix<f64>,
    b: &DVector<f64>,
    opts: &KrylovOptions,
) -> Result<(DVector<f64>, KrylovReport)> {
    if b.norm() == 0.0 {
        let report = KrylovReport {
            method: KrylovMethod::BiCgStab,
            iterations: 0,
            relative_residual: 0.0,
        };
        return Ok((DVector::zeros(b.len()), report));
    }
    let diag = jacobi(matrix)?;
    let first = bicgstab(matrix, b, &diag, opts);
    if let Ok(out) = &first {
        if out.1.relative_residual < opts.tolerance {
            return first;
        }
    }
    let second = gmres(matrix, b, &diag, opts)?;
    if second.1.relative_residual < opts.tolerance {
        Ok(second)
    } else {
        Err(Error::Solver {
            iterations: second.1.iterations,
            residual: second.1.relative_residual,
            reason: "GMRES fallback did not reach the tolerance".into(),
        })
    }
}

pub fn bicgstab(
    matrix: &CsrMatrix<f64>,
    b: &DVector<f64>,
    diag_inv: &DVector<f64>,
    opts: &KrylovOptions,
) -> Result<(DVector<f64>, KrylovReport)> {
    let bnorm = b.norm();
    let mut x = DVector::zeros(b.len());
    let mut r = b.clone();
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = DVector::zeros(b.len());
    let mut p = DVector::zeros(b.len());
    // Iterate with a slightly tighter target so the recomputed residual also passes.
    let target = 0.1 * opts.tolerance * bnorm;
    let fail = |iterations, r: &DVector<f64>, reason: &str| Error::Solver {
        iterations,
        residual: r.norm() / bnorm,
        reason: reason.to_string(),
    };
    for it in 1..=opts.max_iterations {
        let rho_new = r_hat.dot(&r);
        if rho_new.abs() < 1e-300 {
            return Err(fail(it, &r, "BiCGSTAB breakdown (rho = 0)"));
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        p = &r + (&p - &v * omega) * beta;
        let y = p.component_mul(diag_inv);
        v = matrix * &y;
        let denom = r_hat.dot(&v);
        if denom.abs() < 1e-300 {
            return Err(fail(it, &r, "BiCGSTAB breakdown (r̂·v = 0)"));
        }
        alpha = rho / denom;
        let s = &r - &v * alpha;
        if s.norm() < target {
            x += &y * alpha;
            return Ok(finish(matrix, x, b, KrylovMethod::BiCgStab, it));
        }
        let z = s.component_mul(diag_inv);
        let t = matrix * &z;
        let tt = t.dot(&t);
        if tt == 0.0 {
            return Err(fail(it, &s, "BiCGSTAB breakdown (t = 0)"));
        }
        omega = t.dot(&s) / tt;
        x += &y * alpha + &z * omega;
        r = &s - &t * omega;
        if r.norm() < target {
            return Ok(finish(matrix, x, b, KrylovMethod::BiCgStab, it));
        }
        if omega == 0.0 {
            return Err(fail(it, &r, "BiCGSTAB stagnation (omega = 0)"));
        }
    }
    Err(fail(
        opts.max_iterations,
        &r,
        "BiCGSTAB reached the iteration limit",
    ))
}

fn finish(
    matrix: &CsrMatrix<f64>,
    x: DVector<f64>,
    b: &DVector<f64>,
    method: KrylovMethod,
    iterations: usize,
) -> (DVector<f64>, KrylovReport) {
    let relative_residual = true_residual(matrix, &x, b);
    (
        x,
        KrylovReport {
            method,
            iterations,
            relative_residual,
        },
    )
}

/// Right-preconditioned restarted GMRES.
pub fn gmres(
    matrix: &CsrMatrix<f64>,
    b: &DVector<f64>,
    diag_inv: &DVector<f64>,
    opts: &KrylovOptions,
) -> Result<(DVector<f64>, KrylovReport)> {
    let bnorm = b.norm();
    let m = opts.restart.max(1);
    let target = 0.1 * opts.tolerance * bnorm;
    let mut x = DVector::zeros(b.len());
    let mut total = 0;
    while total < opts.max_iterations {
        let r = b - matrix * &x;
        let beta = r.norm();
        if beta < target {
            return Ok(finish(matrix, x, b, KrylovMethod::Gmres, total));
        }
        let mut basis = vec![r / beta];
        let mut hess = DMatrix::<f64>::zeros(m + 1, m);
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = DVector::<f64>::zeros(m + 1);
        g[0] = beta;
        let mut k = 0;
        while k < m && total < opts.max_iterations {
            total += 1;
            let mut w = matrix * basis[k].component_mul(diag_inv);
            for (i, q) in basis.iter().enumerate() {
                hess[(i, k)] = w.dot(q);
                w -= q * hess[(i, k)];
            }
            let wn = w.norm();
            hess[(k + 1, k)] = wn;
            for i in 0..k {
                let (a, c) = (hess[(i, k)], hess[(i + 1, k)]);
                hess[(i, k)] = cs[i] * a + sn[i] * c;
                hess[(i + 1, k)] = -sn[i] * a + cs[i] * c;
            }
            let (a, c) = (hess[(k, k)], hess[(k + 1, k)]);
            let rr = a.hypot(c);
            cs[k] = a / rr;
            sn[k] = c / rr;
            hess[(k, k)] = rr;
            hess[(k + 1, k)] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k += 1;
            if g[k].abs() < target || wn == 0.0 {
                break;
            }
            basis.push(w / wn);
        }
        // Back substitution on the k×k triangle.
        let mut y = DVector::<f64>::zeros(k);
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| hess[(i, j)] * y[j]).sum();
            y[i] = (g[i] - s) / hess[(i, i)];
        }
        let mut dx = DVector::zeros(b.len());
        for (i, yi) in y.iter().enumerate() {
            dx += &basis[i] * *yi;
        }
        x += dx.component_mul(diag_inv);
    }
    let report = finish(matrix, x, b, KrylovMethod::Gmres, total);
    if report.1.relative_residual < opts.tolerance {
        Ok(report)
    } else {
        Err(Error::Solver {
            iterations: total,
            residual: report.1.relative_residual,
            reason: "GMRES reached the iteration limit".into(),
        })
    }
}
