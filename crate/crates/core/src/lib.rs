//! Numerical laboratory for Pucci extremal operators with a quadratic
//! gradient term `M±(D²u + g(u)∇u⊗∇u) + f(u) = 0`.
//!
//! * [`pucci`]: the operators on symmetric matrices and in radial form.
//! * [`expr`]: a small expression language for `f` and `g`, plus builtin pairs.
//! * [`transform`]: the change of variables `v = φ_g(u)` and the transformed
//!   source `h`.
//! * [`radial`]: radial shooting, decay classification, critical exponents
//!   and first eigenvalues on balls.
//! * [`dirichlet`]: Dirichlet problems on balls and back-transformed
//!   verification.

pub mod dirichlet;
pub mod error;
pub mod expr;
pub mod ode;
pub mod pucci;
pub mod quad;
pub mod radial;
pub mod transform;
pub mod verify;

pub use error::{Error, Result};
