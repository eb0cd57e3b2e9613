//! Finite-difference laboratory for KdV dynamics on half-lines.

pub mod banded;
pub mod calculus;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod io;
pub mod modulation;
pub mod solver;
pub mod soliton;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{Field, Grid, Side};
pub use solver::{evolve, evolve_left_negative_time, BoundarySignal, SolverConfig, Trajectory};
