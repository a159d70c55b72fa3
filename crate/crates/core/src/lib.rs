//! Pseudospectral simulation of the Kadomtsev-Petviashvili-Burgers-II equation
//!
//! `u_t + u_xxx - u_xx + d_x^{-1} u_yy + u u_x = 0`
//!
//! on a periodic box, with discrete anisotropic Sobolev and Bourgain norms,
//! the second-iterate ill-posedness study and randomized estimate checks.

pub mod error;
mod fft;
pub mod field;
pub mod grid;
pub mod illposed;
pub mod initial;
pub mod norms;
pub mod random;
pub mod report;
pub mod semigroup;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use field::SpectralField;
pub use grid::{make_grid, Grid2D};
pub use solver::{PicardReport, Trajectory};
