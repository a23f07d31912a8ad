//! Exact simulation and verification of instantaneous dynamic equilibria (IDE)
//! for fluid flows over time in the Vickrey queueing model.
//!
//! All quantities are exact rationals ([`Q`]). Time-varying rates are
//! [`StepFunction`]s; cumulative quantities, queues and labels are
//! [`PiecewiseLinear`] functions.

pub mod analysis;
pub mod dynamics;
pub mod engine;
pub mod network;
pub mod stepfn;

pub use dynamics::{DerivedState, FlowOverTime};
pub use engine::{compute_ide, IdeOptions, IdeTrace};
pub use network::{Edge, EdgeId, Instance, NodeId};
pub use stepfn::{PiecewiseLinear, StepFunction, Q};
