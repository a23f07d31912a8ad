//! IDE construction by phase-wise extension and an independent IDE verifier.

mod check;
mod ide;
mod labels;
mod sim;
mod trace;
mod waterfill;

pub use check::{check_ide, IdeReport, IdeViolation};
pub use ide::{compute_ide, IdeOptions, IdePolicy};
pub use labels::{instantaneous_labels, LabelSnapshot};
pub use sim::{simulate, FixedSplitPolicy, PhaseContext, RoutingPolicy, SimOutcome};
pub use trace::flow_from_json;
pub use waterfill::{water_fill, Candidate};

use crate::dynamics::FlowOverTime;
use crate::network::{EdgeId, NodeId};
use crate::stepfn::Q;
use serde::Serialize;
use thiserror::Error;

/// What ended a phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    InflowBreakpoint,
    OutflowFront,
    QueueDepletion,
    ActivationCrossing,
    PolicyBreakpoint,
    Horizon,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Terminated,
    Horizon,
    MaxPhases,
}

/// Labels, their right derivatives and the active edges at a phase start.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelState {
    pub labels: Vec<Option<Q>>,
    pub derivs: Vec<Option<Q>>,
    pub active: Vec<EdgeId>,
    /// Finite-label nodes by ascending label, ties by id.
    pub order: Vec<NodeId>,
}

/// Interval with constant edge inflow rates and linear queues.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Phase {
    pub start: Q,
    pub end: Q,
    /// Event that ends the phase.
    pub event: EventKind,
    /// Nonzero edge inflow rates.
    pub rates: Vec<(EdgeId, Q)>,
    /// Nonzero queue slopes.
    pub queue_slopes: Vec<(EdgeId, Q)>,
    pub labels: Option<LabelState>,
}

impl Phase {
    pub fn rate(&self, e: EdgeId) -> Q {
        lookup(&self.rates, e)
    }

    pub fn queue_slope(&self, e: EdgeId) -> Q {
        lookup(&self.queue_slopes, e)
    }
}

fn lookup(v: &[(EdgeId, Q)], e: EdgeId) -> Q {
    v.iter()
        .find(|(i, _)| *i == e)
        .map_or_else(|| crate::stepfn::q(0), |(_, x)| x.clone())
}

/// Phase decomposition of an engine run and the resulting flow.
#[derive(Clone, Debug)]
pub struct IdeTrace {
    pub phases: Vec<Phase>,
    pub flow: FlowOverTime,
    pub stop: StopReason,
}

impl IdeTrace {
    pub fn terminated(&self) -> bool {
        self.stop == StopReason::Terminated
    }

    pub fn phase_count(&self) -> usize {
        self.phases.len()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("instance is a fragment with open ports and cannot be simulated")]
    NotRunnable,
    #[error("instance violates model assumptions: {0:?}")]
    InvalidInstance(Vec<String>),
    #[error("zero-length phase at time {time} (event {event:?}); state: {state}")]
    ZeroLengthPhase {
        time: String,
        event: EventKind,
        state: String,
    },
    #[error("node {node} holds flow at time {time} but cannot reach the sink")]
    Stuck { node: String, time: String },
    #[error("allocation at node {node}, time {time}: budget {budget}, sent {sent}")]
    BadAllocation {
        node: String,
        time: String,
        budget: String,
        sent: String,
    },
}
