//! Grouped spatial modulation (SM) over crosstalk-coupled DSL binders.
//!
//! Each user owns a group of `M` twisted pairs and activates a single pair per
//! tone; the index of the active pair carries `log2 M` extra bits on top of the
//! constellation symbol. The crate provides the binder channel model, the SM
//! mapper, hard and soft (turbo) detectors, CCMC/DCMC capacity estimators, the
//! class-AB line-driver energy model and a deterministic Monte Carlo harness.

pub mod capacity;
pub mod channel;
pub mod detect;
pub mod energy;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod smmod;
pub mod softdet;

pub use error::{Error, Result};
