//! Antenna radiation-pattern extrapolation from sparse measurements.
//!
//! An antenna is described by a [`DesignSpaceModel`]: a box of real
//! configuration parameters (geometry) and a complex excitation vector that
//! the pattern depends on linearly. Given measurements at a handful of sample
//! points, [`solver::extrapolate`] searches the configuration box with a
//! shrinking candidate grid, fits the excitation of every candidate by
//! constrained least squares, and predicts the pattern anywhere else.
//!
//! The guide under `book/` walks through each piece; its code listings are
//! compiled and run as doctests of this crate.

pub mod design;
pub mod error;
pub mod forward;
pub mod harness;
pub mod metrics;
pub mod sampling;
pub mod seed;
pub mod solver;

#[cfg(doctest)]
mod book;

pub use design::{
    design_dim, min_samples_for, AntennaFamily, ConfigurationPoint, DesignSpaceModel, Direction, Excitation,
    MeasurementKind, SamplePoint, SampledPattern,
};
pub use error::{Error, Result};
pub use num_complex::Complex64;
