//! Explicit-state verification of mutual exclusion algorithms over safe,
//! regular and atomic shared registers, with liveness judged on just paths.

pub mod checker;
pub mod error;
pub mod harness;
pub mod interference;
pub mod lts;
pub mod registers;
pub mod threads;

pub use error::{Error, Result};
