//! Spectral gaps of one-dimensional Dirichlet Schrödinger operators
//! `−d²/dx² + v(x)` on `(−L/2, L/2)` as the interval grows.

pub mod cli_io;
pub mod eigensolver;
pub mod error;
pub mod gap_asymptotics;
pub mod hellmann_feynman;
pub mod potential;
pub mod roots;
pub mod step_delta;

pub use eigensolver::{Frame, ProblemSpec};
pub use error::{GapError, Result};
pub use potential::{Potential, PotentialClass};
