//! Numerical laboratory for multi-kink dynamics of defocusing mKdV and gKdV
//! equations: exact profiles, solution-space transforms, a pseudo-spectral
//! solver, conservation and monotonicity diagnostics, modulation fits and
//! coercivity estimates.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coercivity;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod modulation;
pub mod nonlinearity;
pub mod ode;
pub mod poly;
pub mod profiles;
pub mod solver;
pub mod transforms;

pub use error::{Error, Result};
pub use grid::{Background, Field, Grid};
pub use nonlinearity::{Convention, Nonlinearity};
