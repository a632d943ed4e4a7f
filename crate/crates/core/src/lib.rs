//! Monte Carlo laboratory for structured random matrices `X = (b_ij ξ_ij)`
//! with α-exponential entries.

pub mod bounds;
pub mod canon;
pub mod cli;
pub mod dist;
pub mod error;
pub mod mc;
pub mod parallel;
pub mod profile;
pub mod report;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
