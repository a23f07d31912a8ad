//! Certificates, structural checks on flows, optimal-flow bounds, gadget
//! envelope checks and price-of-anarchy reports.

mod bounds;
mod gadgets;
mod netflow;
mod opt;
mod poa;
mod sinklike;

pub use bounds::{termination_certificate, theta_hat, TerminationCertificate, ThetaHat};
pub use gadgets::{
    envelope_check_cap1_edge, flow_split_check, lower_drive, queue_lower, queue_upper, split_instance,
    upper_drive,
    EnvelopeReport, SplitReport,
};
pub use opt::{opt_makespan_bounds, opt_travel_time_lower, OptBounds};
pub use poa::{poa_report, PoAReport};
pub use sinklike::{acyclic_arrival_check, sink_like_check, SinkLikeQuery, SinkLikeReport};

use crate::dynamics::DynamicsError;
use crate::engine::EngineError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("instance has a directed cycle")]
    Cyclic,
    #[error("flow does not terminate within its horizon")]
    NotTerminated,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid query: {0}")]
    Query(String),
    #[error("bound violated: {0}")]
    BoundViolated(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}
