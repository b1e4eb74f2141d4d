//! Analytic scalar fields with exact gradients and Hessians.

use crate::geometry::Vec2;
use crate::tensor::Sym2;

/// Value, gradient and Hessian at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: Vec2,
    pub hess: Sym2,
}

impl Jet {
    pub fn zero() -> Self {
        Self {
            value: 0.0,
            grad: Vec2::zeros(),
            hess: Sym2::zero(),
        }
    }

    pub fn add(&self, other: &Jet) -> Self {
        Self {
            value: self.value + other.value,
            grad: self.grad + other.grad,
            hess: self.hess.axpy(1.0, &other.hess),
        }
    }

    pub fn sub(&self, other: &Jet) -> Self {
        Self {
            value: self.value - other.value,
            grad: self.grad - other.grad,
            hess: self.hess.axpy(-1.0, &other.hess),
        }
    }
}

/// `coef · x^px · y^py`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monomial {
    pub coef: f64,
    pub px: u32,
    pub py: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScalarField {
    Polynomial(Vec<Monomial>),
    /// `amp · sin(kx·x + phase) · cos(ky·y)`
    SinCos {
        amp: f64,
        kx: f64,
        ky: f64,
        phase: f64,
    },
    /// `amp · exp(alpha·x) · sin(beta·y)`
    ExpSin {
        amp: f64,
        alpha: f64,
        beta: f64,
    },
    Sum(Vec<ScalarField>),
}

/// `c · x^p` and its first two derivatives.
fn power(x: f64, p: u32) -> [f64; 3] {
    let pi = p as i32;
    let v = x.powi(pi);
    let d1 = if p >= 1 {
        p as f64 * x.powi(pi - 1)
    } else {
        0.0
    };
    let d2 = if p >= 2 {
        (p * (p - 1)) as f64 * x.powi(pi - 2)
    } else {
        0.0
    };
    [v, d1, d2]
}

impl ScalarField {
    pub fn constant(c: f64) -> Self {
        Self::Polynomial(vec![Monomial {
            coef: c,
            px: 0,
            py: 0,
        }])
    }

    /// Polynomial from `(coef, px, py)` triples.
    pub fn polynomial(terms: &[(f64, u32, u32)]) -> Self {
        Self::Polynomial(
            terms
                .iter()
                .map(|&(coef, px, py)| Monomial { coef, px, py })
                .collect(),
        )
    }

    pub fn value(&self, p: Vec2) -> f64 {
        self.jet(p).value
    }

    pub fn jet(&self, p: Vec2) -> Jet {
        let (x, y) = (p.x, p.y);
        match self {
            ScalarField::Polynomial(terms) => terms.iter().fold(Jet::zero(), |acc, m| {
                let [fx, fx1, fx2] = power(x, m.px);
                let [gy, gy1, gy2] = power(y, m.py);
                acc.add(&Jet {
                    value: m.coef * fx * gy,
                    grad: Vec2::new(m.coef * fx1 * gy, m.coef * fx * gy1),
                    hess: Sym2::new(m.coef * fx2 * gy, m.coef * fx1 * gy1, m.coef * fx * gy2),
                })
            }),
            ScalarField::SinCos { amp, kx, ky, phase } => {
                let (sx, cx) = (kx * x + phase).sin_cos();
                let (sy, cy) = (ky * y).sin_cos();
                Jet {
                    value: amp * sx * cy,
                    grad: Vec2::new(amp * kx * cx * cy, -amp * ky * sx * sy),
                    hess: Sym2::new(
                        -amp * kx * kx * sx * cy,
                        -amp * kx * ky * cx * sy,
                        -amp * ky * ky * sx * cy,
                    ),
                }
            }
            ScalarField::ExpSin { amp, alpha, beta } => {
                let e = amp * (alpha * x).exp();
                let (sy, cy) = (beta * y).sin_cos();
                Jet {
                    value: e * sy,
                    grad: Vec2::new(alpha * e * sy, beta * e * cy),
                    hess: Sym2::new(
                        alpha * alpha * e * sy,
                        alpha * beta * e * cy,
                        -beta * beta * e * sy,
                    ),
                }
            }
            ScalarField::Sum(parts) => parts.iter().fold(Jet::zero(), |acc, f| acc.add(&f.jet(p))),
        }
    }
}
