//! Doubling coverings of punctured cubes and of regular level
//! hypersurfaces `{P = c}` of complex polynomials, with implicit-function
//! charts, p-valent doubling constants and their propagation along chains.

pub mod dyadic;
pub mod error;
pub mod linalg;
pub mod polyalg;
pub mod whitney;
pub mod ift;
pub mod domain;
pub mod atlas;
pub mod valency;
pub mod propagate;
pub mod experiments;

pub use error::{Error, Result};
pub use linalg::C64;
