//! Alternating projections between two closed convex sets in `R^d`.
//!
//! The crate provides a small catalog of convex sets with exact projections,
//! the alternating and Dykstra iterations with full traces, diagnostics that
//! turn a trace into a verdict, and a scenario runner behind the `altproj`
//! binary.

pub mod diagnostics;
pub mod error;
pub mod iteration;
pub mod oracle;
pub mod sampling;
pub mod scenario;
pub mod sets;
pub mod space;
pub mod subspace;

pub use error::{Error, Result};
pub use iteration::{alternate, dykstra, Algorithm, StopReason, StopRule, Trace};
pub use sets::ConvexSet;
pub use space::{inner, norm, Point};
