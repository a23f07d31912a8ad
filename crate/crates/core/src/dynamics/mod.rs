//! Flows over time, derived cumulative/queue functions, the feasibility
//! verifier and the travel-time metrics.

mod derived;
mod export;
mod feasibility;
mod flow;
mod metrics;

pub use derived::{derive, DerivedState, EdgeDerived};
pub use export::{time_series_csv, Series};
pub use feasibility::{check_feasibility, Constraint, FeasibilityReport, FeasibilityViolation};
pub use flow::{FlowOverTime, FlowParseError};
pub use metrics::{
    arrival_rate, makespan, total_delay, total_travel_time, volume_identity_residual, TravelTime,
};

use crate::stepfn::Q;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DynamicsError {
    #[error("structural defect: {quantity} of edge {edge} is negative at time {time}")]
    NegativeQuantity {
        edge: String,
        quantity: &'static str,
        time: String,
    },
    #[error("flow does not terminate within its horizon")]
    NotTerminated,
    #[error("travel-time formulas disagree: edge costs {by_costs}, arrivals {by_arrivals}, volume {by_volume}; per-edge residuals {residuals:?}")]
    TravelTimeMismatch {
        by_costs: String,
        by_arrivals: String,
        by_volume: String,
        residuals: Vec<(String, String)>,
    },
    #[error("flow covers {flow_edges} edges but the instance has {instance_edges}")]
    EdgeCountMismatch {
        flow_edges: usize,
        instance_edges: usize,
    },
}

pub(crate) fn fmt(x: &Q) -> String {
    crate::stepfn::format_q(x)
}
