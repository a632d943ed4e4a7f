//! Monte Carlo engine: spectral solvers, trial orchestration, tail fitting
//! and the verification experiments.

pub mod solver;
pub mod tail;
pub mod trials;
pub mod verify;

pub use solver::{smallest_singular, spectral_norm, spectral_norm_with, Method, SolverOptions};
pub use trials::{run_trials, Statistic, TrialConfig, TrialSet};
