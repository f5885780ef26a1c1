//! Heat kernels of nonautonomous diffusion-type equations
//!
//! ```text
//! u_t = a(t) u_xx - (g(t) - c(t) x) u_x + (d(t) + f(t) x - b(t) x^2) u
//! ```
//!
//! built from solutions of a Riccati-type system, together with the
//! Cole–Hopf reduction of the corresponding Burgers equations.

pub mod burgers;
pub mod characteristic;
pub mod coefficients;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod ode;
pub mod oracle;
pub mod quad;
pub mod riccati;
pub mod validation;

pub use error::{Error, Result};
