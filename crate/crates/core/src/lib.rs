//! Numerical laboratory for Dirichlet characters, L-functions, theta
//! functions, character sums and their moments over primitive characters.

pub mod arith;
pub mod bounds;
pub mod characters;
pub mod constants;
pub mod error;
pub mod export;
pub mod gamma;
pub mod lfunc;
pub mod moments;
pub mod quad;
pub mod reduce;
pub mod sieve;
pub mod sums;
pub mod theta;
pub mod verify;

pub use error::{Error, Result};
