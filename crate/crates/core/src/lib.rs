//! Second-quotient criteria for entire functions with positive Taylor
//! coefficients: quotient sequences, certified evaluation, root and zero
//! counting engines, membership criteria, and partial theta thresholds.

pub mod cli;
pub mod criteria;
pub mod error;
pub mod precision;
pub mod roots;
pub mod series;
pub mod suites;
pub mod theta;

pub use error::{Error, Result};
