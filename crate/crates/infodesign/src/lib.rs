//! Information design in linear-quadratic-Gaussian games.
//!
//! A [`game::QuadraticGame`] fixes the players' and designer's quadratic payoffs and
//! a Gaussian state. Candidate [`game::LinearGaussianStructure`]s are checked for
//! obedience, and [`game::LinearContract`]s supply dual certificates; a structure
//! is optimal when some contract implements it as a dual best response with zero
//! duality gap.

pub mod applications;
pub mod benchmarks;
pub mod certification;
pub mod error;
pub mod fixtures;
pub mod game;
pub mod linalg;
pub mod montecarlo;
pub mod poly;
pub mod solver;

pub use error::{Error, Result};
pub use game::{LinearContract, LinearGaussianStructure, QuadraticGame};
