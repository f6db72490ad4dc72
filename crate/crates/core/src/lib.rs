//! Gap functionals and simple-versus-optimal auction machinery.

pub mod auctions;
pub mod cli;
pub mod constructions;
pub mod error;
pub mod gapcore;
pub mod gapopt;
pub mod instances;
pub mod interval;
pub mod io;
pub mod reproduce;
pub mod rng;
pub mod scalar;
pub mod transforms;

pub use error::{Error, Result};
pub use scalar::{Backend, Rational, Scalar};
