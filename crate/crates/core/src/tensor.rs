//! Coefficient tensors per side and their rotation into the local interface frame.
//!
//! For a normal angle θ the local entries are
//!
//! ```text
//!   a11 = A11 cos²θ + A22 sin²θ + 2 A12 cosθ sinθ
//!   a22 = A11 sin²θ + A22 cos²θ − 2 A12 cosθ sinθ
//!   a12 = (A22 − A11) cosθ sinθ + A12 (cos²θ − sin²θ)
//! ```
//!
//! i.e. `a = R A Rᵀ` with `R` the rotation by −θ (rows `n` and `τ`).

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{LocalFrame, Vec2};

/// Symmetric 2×2 matrix, stored by its three distinct entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sym2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl Sym2 {
    pub const fn new(a11: f64, a12: f64, a22: f64) -> Self {
        Self { a11, a12, a22 }
    }

    pub const fn scalar(beta: f64) -> Self {
        Self::new(beta, 0.0, beta)
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        let half = 0.5 * (self.a11 - self.a22);
        let r = half.hypot(self.a12);
        let m = 0.5 * self.trace();
        (m - r, m + r)
    }

    pub fn is_spd(&self) -> bool {
        self.a11 > 0.0 && self.det() > 0.0
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.a11 * v.x + self.a12 * v.y,
            self.a12 * v.x + self.a22 * v.y,
        )
    }

    /// `uᵀ A v`.
    pub fn form(&self, u: Vec2, v: Vec2) -> f64 {
        u.dot(&self.apply(v))
    }

    /// Entries in the frame whose first axis makes angle `theta` with the x-axis.
    pub fn rotated(&self, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            a11: self.a11 * c * c + self.a22 * s * s + 2.0 * self.a12 * c * s,
            a22: self.a11 * s * s + self.a22 * c * c - 2.0 * self.a12 * c * s,
            a12: (self.a22 - self.a11) * c * s + self.a12 * (c * c - s * s),
        }
    }

    /// World-frame conjugation `Q(φ) A Q(φ)ᵀ` by the rotation through `phi`.
    pub fn conjugated(&self, phi: f64) -> Self {
        self.rotated(-phi)
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self::new(self.a11 * k, self.a12 * k, self.a22 * k)
    }

    pub fn axpy(&self, k: f64, other: &Sym2) -> Self {
        Self::new(
            self.a11 + k * other.a11,
            self.a12 + k * other.a12,
            self.a22 + k * other.a22,
        )
    }
}

pub type TensorValueFn = Arc<dyn Fn(Vec2) -> Sym2 + Send + Sync>;
/// Returns `(∂A/∂x, ∂A/∂y)`.
pub type TensorGradientFn = Arc<dyn Fn(Vec2) -> (Sym2, Sym2) + Send + Sync>;

#[derive(Clone)]
pub struct VariableTensor {
    pub name: String,
    pub value: TensorValueFn,
    pub gradient: Option<TensorGradientFn>,
}

impl fmt::Debug for VariableTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VariableTensor")
            .field("name", &self.name)
            .field("has_gradient", &self.gradient.is_some())
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum TensorField {
    Constant(Sym2),
    Variable(VariableTensor),
}

/// Diffusion tensor A and reaction coefficient σ for one side of the interface.
#[derive(Debug, Clone)]
pub struct AnisoTensor {
    field: TensorField,
    sigma: f64,
}

impl AnisoTensor {
    pub fn constant(a: Sym2, sigma: f64) -> Result<Self> {
        check_spd(&a, 0.0)?;
        check_sigma(sigma)?;
        Ok(Self {
            field: TensorField::Constant(a),
            sigma,
        })
    }

    /// Variable tensor, checked to have eigenvalues ≥ `lambda0` at every sample point.
    pub fn variable(
        field: VariableTensor,
        sigma: f64,
        samples: &[Vec2],
        lambda0: f64,
    ) -> Result<Self> {
        check_sigma(sigma)?;
        for p in samples {
            check_spd(&(field.value)(*p), lambda0).map_err(|e| {
                Error::Coefficient(format!("{} at ({}, {}): {e}", field.name, p.x, p.y))
            })?;
        }
        Ok(Self {
            field: TensorField::Variable(field),
            sigma,
        })
    }

    pub fn field(&self) -> &TensorField {
        &self.field
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn constant_value(&self) -> Option<Sym2> {
        match &self.field {
            TensorField::Constant(a) => Some(*a),
            TensorField::Variable(_) => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.constant_value().is_some()
    }

    pub fn at(&self, p: Vec2) -> Sym2 {
        match &self.field {
            TensorField::Constant(a) => *a,
            TensorField::Variable(v) => (v.value)(p),
        }
    }

    /// `(∂A/∂x, ∂A/∂y)` at `p`.
    pub fn gradient(&self, p: Vec2) -> Result<(Sym2, Sym2)> {
        match &self.field {
            TensorField::Constant(_) => Ok((Sym2::zero(), Sym2::zero())),
            TensorField::Variable(v) => v
                .gradient
                .as_ref()
                .map(|g| g(p))
                .ok_or(Error::Capability("analytic first derivatives")),
        }
    }

    /// Divergence of A taken row-wise: `(∂x A11 + ∂y A12, ∂x A12 + ∂y A22)`.
    pub fn divergence(&self, p: Vec2) -> Result<Vec2> {
        let (dx, dy) = self.gradient(p)?;
        Ok(Vec2::new(dx.a11 + dy.a12, dx.a12 + dy.a22))
    }
}

fn check_spd(a: &Sym2, lambda0: f64) -> Result<()> {
    let finite = a.a11.is_finite() && a.a12.is_finite() && a.a22.is_finite();
    if !finite || !a.is_spd() || a.eigenvalues().0 < lambda0 {
        return Err(Error::Coefficient(format!(
            "tensor [[{}, {}], [{}, {}]] is not symmetric positive definite with eigenvalues >= {lambda0}",
            a.a11, a.a12, a.a12, a.a22
        )));
    }
    Ok(())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Coefficient(format!(
            "reaction coefficient must be >= 0, got {sigma}"
        )));
    }
    Ok(())
}

/// Rotated tensor entries and the variable-coefficient combinations at a frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalTensor {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
    /// `∂a11/∂ξ + ∂a12/∂η`
    pub c1: f64,
    /// `∂a12/∂ξ + ∂a22/∂η`
    pub c2: f64,
    /// `∂a11/∂η − χ″ a12`
    pub c3: f64,
    /// `∂a12/∂η − χ″ a22`
    pub c4: f64,
    /// World-frame A11 the entries were rotated from.
    pub world_a11: f64,
}

impl LocalTensor {
    pub fn entries(&self) -> Sym2 {
        Sym2::new(self.a11, self.a12, self.a22)
    }

    /// Full local data at `frame`, including the curvature parts of c3 and c4.
    pub fn at_frame(tensor: &AnisoTensor, frame: &LocalFrame) -> Result<Self> {
        let base = rotate_to_local(&tensor.at(frame.anchor), frame.theta)?;
        let [c1, c2, c3, c4] = local_c_coefficients(tensor, frame)?;
        Ok(Self {
            c1,
            c2,
            c3,
            c4,
            ..base
        })
    }

    /// Constant-tensor data at curvature `chi_second` (c1 = c2 = 0).
    pub fn constant_at(a: &Sym2, theta: f64, chi_second: f64) -> Result<Self> {
        let base = rotate_to_local(a, theta)?;
        Ok(Self {
            c3: -chi_second * base.a12,
            c4: -chi_second * base.a22,
            ..base
        })
    }

    pub fn with_c(self, c: [f64; 4]) -> Self {
        Self {
            c1: c[0],
            c2: c[1],
            c3: c[2],
            c4: c[3],
            ..self
        }
    }
}

/// Rotates `a` into the frame with normal angle `theta`; all c-coefficients are zero.
pub fn rotate_to_local(a: &Sym2, theta: f64) -> Result<LocalTensor> {
    check_spd(a, 0.0)?;
    let r = a.rotated(theta);
    Ok(LocalTensor {
        a11: r.a11,
        a12: r.a12,
        a22: r.a22,
        c1: 0.0,
        c2: 0.0,
        c3: 0.0,
        c4: 0.0,
        world_a11: a.a11,
    })
}

/// `(c1, c2, c3, c4)` at the frame anchor. Local derivatives come from the world
/// gradient by the chain rule: `∂/∂ξ = n·∇`, `∂/∂η = τ·∇`.
pub fn local_c_coefficients(tensor: &AnisoTensor, frame: &LocalFrame) -> Result<[f64; 4]> {
    let (dx, dy) = tensor.gradient(frame.anchor)?;
    let (n, tau) = (frame.normal(), frame.tangent());
    let d_xi = dx.scaled(n.x).axpy(n.y, &dy).rotated(frame.theta);
    let d_eta = dx.scaled(tau.x).axpy(tau.y, &dy).rotated(frame.theta);
    let a = tensor.at(frame.anchor).rotated(frame.theta);
    let k = frame.chi_second;
    Ok([
        d_xi.a11 + d_eta.a12,
        d_xi.a12 + d_eta.a22,
        d_eta.a11 - k * a.a12,
        d_eta.a12 - k * a.a22,
    ])
}

/// Names accepted by [`variable_family`].
pub const VARIABLE_FAMILIES: &[&str] = &["linear-x", "graded-coupled", "trig-coupled"];

/// Built-in analytic tensor fields.
///
/// * `linear-x`: `[[1 + x, 0], [0, 1]]`
/// * `graded-coupled`: `[[2 + 0.4x, 0.3 + 0.2y], [·, 1.5 − 0.3x + 0.2y]]`
/// * `trig-coupled`: `[[2 + 0.5 sin x cos y, 0.3 sin(x + y)], [·, 1.5 + 0.4 cos(x − y)]]`
pub fn variable_family(name: &str) -> Option<VariableTensor> {
    let (value, gradient): (TensorValueFn, TensorGradientFn) = match name {
        "linear-x" => (
            Arc::new(|p: Vec2| Sym2::new(1.0 + p.x, 0.0, 1.0)),
            Arc::new(|_| (Sym2::new(1.0, 0.0, 0.0), Sym2::zero())),
        ),
        "graded-coupled" => (
            Arc::new(|p: Vec2| {
                Sym2::new(
                    2.0 + 0.4 * p.x,
                    0.3 + 0.2 * p.y,
                    1.5 - 0.3 * p.x + 0.2 * p.y,
                )
            }),
            Arc::new(|_| (Sym2::new(0.4, 0.0, -0.3), Sym2::new(0.0, 0.2, 0.2))),
        ),
        "trig-coupled" => (
            Arc::new(|p: Vec2| {
                Sym2::new(
                    2.0 + 0.5 * p.x.sin() * p.y.cos(),
                    0.3 * (p.x + p.y).sin(),
                    1.5 + 0.4 * (p.x - p.y).cos(),
                )
            }),
            Arc::new(|p: Vec2| {
                let s = (p.x - p.y).sin();
                let c = (p.x + p.y).cos();
                (
                    Sym2::new(0.5 * p.x.cos() * p.y.cos(), 0.3 * c, -0.4 * s),
                    Sym2::new(-0.5 * p.x.sin() * p.y.sin(), 0.3 * c, 0.4 * s),
                )
            }),
        ),
        _ => return None,
    };
    Some(VariableTensor {
        name: name.to_string(),
        value,
        gradient: Some(gradient),
    })
}
