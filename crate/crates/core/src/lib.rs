//! Numerical lab for polynomially stable semigroups and the decay of
//! Cayley-transform powers.

pub mod cayley;
pub mod error;
pub mod lyapunov;
pub mod numerics;
pub mod operators;
pub mod perturbation;
pub mod report;
pub mod semigroup;

pub use error::{Error, Result};
