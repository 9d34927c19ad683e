//! Stage-size schedules for the generalized random chemistry subset search.
//!
//! A searcher looks for an unknown k-element subset S of a ground set of
//! size n0 by repeatedly guessing subsets: at stage i it draws uniform
//! random subsets of size n_i from the previous stage's winner until one
//! contains S, then moves on with that winner. The schedule of stage sizes
//! n0 > n1 > ... > n_M = k determines the expected number of guesses.
//!
//! This crate constructs optimized schedules (exact root-solving, the
//! closed-form geometric approximation, and the classic halving baseline),
//! prices them exactly or in floating point, derives the run-length
//! distribution, and simulates the game reproducibly.

pub mod cli;
pub mod combinatorics;
pub mod cost;
pub mod distribution;
pub mod error;
pub mod schedule;
pub mod simulator;

pub use error::{Error, Result};
