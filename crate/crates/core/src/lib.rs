//! Optimal life insurance for a two-earner household with exponential utility.

pub mod config;
pub mod error;
pub mod ksolve;
pub mod model;
pub mod montecarlo;
pub mod numerics;
pub mod policy;
pub mod ruin;

pub use error::{Error, Result};
