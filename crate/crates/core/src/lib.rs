//! Interface jump relations for anisotropic elliptic interface problems in 2D.
//!
//! Solves `−∇·(A∇u) + σu = f` on either side of a closed curve Γ with
//! `[u] = w`, `[A∇u·n] = v` across it. The crate provides:
//!
//! * [`geometry`]: interface curves and the local (ξ, η) frame at an interface point;
//! * [`tensor`]: SPD coefficient tensors rotated into that frame;
//! * [`jump`]: the relations between one-sided derivative states, as explicit
//!   formulas and as an independent primitive-identity solve;
//! * [`manufactured`]: analytic interface problems that verify the relations end to end;
//! * [`solver`]: an immersed-interface finite-difference solver using the relations;
//! * [`audit`]: randomized equivalence checks and the errata ledger.

// `!(x < y)` checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod error;
pub mod field;
pub mod geometry;
pub mod jump;
pub mod manufactured;
pub mod solver;
pub mod spline;
pub mod tensor;

pub use error::{Error, Result};
