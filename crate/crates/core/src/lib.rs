//! Numerical toolkit for the Fourier components of generalized Grushin
//! operators and the null-controllability of the associated heat equations.

pub mod classical;
pub mod controllability;
pub mod discretize;
pub mod eigensolve;
pub mod error;
pub mod fit;
pub mod generalized;
pub mod heat;
pub mod interp;
pub mod profiles;
pub mod spec_io;

pub use error::{Error, Result};
