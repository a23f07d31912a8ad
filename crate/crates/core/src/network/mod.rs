//! Instance data model, validation, serialization and generators.

mod gen;
mod graph;
mod io;
pub mod random;

pub use gen::{
    blocking_gadget, example_fig1, poa_epsilon, poa_instance, slow_termination, tau_blocking,
    tau_blocking_closed_form, tau_cycling, tau_e_last, tau_path_blocking, u_kl, GadgetParams,
};
pub use graph::{dist_to_sink, is_acyclic, longest_path_tau, reaches_sink, total_tau};
pub(crate) use graph::dijkstra_to_sink as graph_dijkstra;
pub use io::{from_json_str, load, save, to_json_string};

use crate::stepfn::{q, StepFunction, Q};
use num::{Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub tail: NodeId,
    pub head: NodeId,
    /// Free-flow travel time.
    pub tau: Q,
    /// Capacity.
    pub nu: Q,
}

/// Open ports of a gadget that is not a complete network on its own.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fragment {
    pub entries: Vec<NodeId>,
    pub exit: NodeId,
}

/// Single-sink network with piecewise-constant inflows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    nodes: Vec<String>,
    edges: Vec<Edge>,
    sink: NodeId,
    inflows: BTreeMap<NodeId, StepFunction>,
    fragment: Option<Fragment>,
    out_edges: Vec<Vec<EdgeId>>,
    in_edges: Vec<Vec<EdgeId>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetworkError {
    #[error("duplicate node name {0:?}")]
    DuplicateNode(String),
    #[error("unknown node {name:?} referenced by {field}")]
    UnknownNode { field: String, name: String },
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Instance {
    /// Assembles an instance. Node names must be unique; edge endpoints are indices.
    pub fn new(
        nodes: Vec<String>,
        edges: Vec<Edge>,
        sink: NodeId,
        inflows: BTreeMap<NodeId, StepFunction>,
    ) -> Result<Self, NetworkError> {
        let mut seen = std::collections::HashSet::new();
        for n in &nodes {
            if !seen.insert(n.as_str()) {
                return Err(NetworkError::DuplicateNode(n.clone()));
            }
        }
        let n = nodes.len();
        let check = |v: NodeId, field: String| {
            if v < n {
                Ok(())
            } else {
                Err(NetworkError::UnknownNode {
                    field,
                    name: v.to_string(),
                })
            }
        };
        check(sink, "sink".into())?;
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            check(e.tail, format!("edges[{i}].tail"))?;
            check(e.head, format!("edges[{i}].head"))?;
            out_edges[e.tail].push(i);
            in_edges[e.head].push(i);
        }
        for &v in inflows.keys() {
            check(v, "inflows".into())?;
        }
        let inflows = inflows.into_iter().filter(|(_, f)| !f.is_zero()).collect();
        Ok(Self {
            nodes,
            edges,
            sink,
            inflows,
            fragment: None,
            out_edges,
            in_edges,
        })
    }

    pub fn with_fragment(mut self, fragment: Fragment) -> Self {
        self.fragment = Some(fragment);
        self
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn sink(&self) -> NodeId {
        self.sink
    }

    pub fn fragment(&self) -> Option<&Fragment> {
        self.fragment.as_ref()
    }

    /// A fragment has open ports and cannot be simulated on its own.
    pub fn is_runnable(&self) -> bool {
        self.fragment.is_none()
    }

    pub fn inflows(&self) -> &BTreeMap<NodeId, StepFunction> {
        &self.inflows
    }

    pub fn inflow(&self, v: NodeId) -> Option<&StepFunction> {
        self.inflows.get(&v)
    }

    pub fn out_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.out_edges[v]
    }

    pub fn in_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.in_edges[v]
    }

    pub fn node_index(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n == name)
    }

    pub fn edge_index(&self, id: &str) -> Option<EdgeId> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn node_name(&self, v: NodeId) -> &str {
        &self.nodes[v]
    }

    /// End of all inflow supports (0 without inflow).
    pub fn theta0(&self) -> Q {
        self.inflows
            .values()
            .filter_map(|f| f.breakpoints().last().cloned())
            .max()
            .unwrap_or_else(|| q(0))
    }

    /// Earliest inflow breakpoint (0 without inflow).
    pub fn earliest_time(&self) -> Q {
        self.inflows
            .values()
            .filter_map(|f| f.left_bound().cloned())
            .min()
            .unwrap_or_else(|| q(0))
    }

    /// Total network inflow volume `U`.
    pub fn total_volume(&self) -> Q {
        self.inflows.values().map(|f| {
                let end = f.breakpoints().last().cloned().unwrap_or_else(|| q(0));
                let start = f.left_bound().cloned().unwrap_or_else(|| q(0));
                f.integral(&start, &end)
            })
            .fold(q(0), |a, b| a + b)
    }

    pub fn min_capacity(&self) -> Option<Q> {
        self.edges.iter().map(|e| e.nu.clone()).min()
    }

    /// Translates all inflows so the earliest breakpoint is 0. Returns the
    /// translated instance and the applied offset.
    pub fn normalize_time_origin(&self) -> (Instance, Q) {
        let offset = -self.earliest_time();
        if offset.is_zero() {
            return (self.clone(), offset);
        }
        let mut out = self.clone();
        for f in out.inflows.values_mut() {
            *f = f.shift(&offset);
        }
        (out, offset)
    }

    /// Checks all model assumptions; an empty list means the instance is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |rule, subject: String, severity, message: String| {
            out.push(Violation {
                rule,
                subject,
                severity,
                message,
            })
        };
        for e in &self.edges {
            if e.tail == e.head {
                push(Rule::SelfLoop, e.id.clone(), Severity::Error, "self-loop".into());
            }
            if !e.tau.is_positive() {
                push(
                    Rule::NonPositiveTravelTime,
                    e.id.clone(),
                    Severity::Error,
                    format!("tau = {} must be > 0", crate::stepfn::format_q(&e.tau)),
                );
            }
            if !e.nu.is_positive() {
                push(
                    Rule::NonPositiveCapacity,
                    e.id.clone(),
                    Severity::Error,
                    format!("nu = {} must be > 0", crate::stepfn::format_q(&e.nu)),
                );
            }
        }
        let mut ids = std::collections::HashSet::new();
        for e in &self.edges {
            if !ids.insert(e.id.as_str()) {
                push(Rule::DuplicateEdgeId, e.id.clone(), Severity::Error, "duplicate edge id".into());
            }
        }
        for (&v, f) in &self.inflows {
            let name = self.nodes[v].clone();
            if !f.is_nonnegative() {
                push(Rule::NegativeInflow, name.clone(), Severity::Error, "inflow takes negative values".into());
            }
            if !f.tail_value().is_zero() {
                push(Rule::UnboundedInflow, name.clone(), Severity::Error, "inflow support is unbounded".into());
            }
            if v == self.sink {
                push(Rule::InflowAtSink, name, Severity::Error, "sink carries network inflow".into());
            }
        }
        let reach = reaches_sink(self);
        for (v, ok) in reach.iter().enumerate() {
            if *ok {
                continue;
            }
            let has_inflow = self.inflows.contains_key(&v);
            push(
                Rule::SinkUnreachable,
                self.nodes[v].clone(),
                if has_inflow { Severity::Error } else { Severity::Warning },
                if has_inflow {
                    "sink unreachable from a node with inflow".into()
                } else {
                    "sink unreachable".into()
                },
            );
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    SelfLoop,
    NonPositiveTravelTime,
    NonPositiveCapacity,
    DuplicateEdgeId,
    NegativeInflow,
    UnboundedInflow,
    InflowAtSink,
    SinkUnreachable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Violation {
    pub rule: Rule,
    pub subject: String,
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} [{:?}] {}: {}", self.severity, self.rule, self.subject, self.message)
    }
}

/// Incremental construction helper used by the generators.
#[derive(Default)]
pub struct InstanceBuilder {
    nodes: Vec<String>,
    edges: Vec<Edge>,
    inflows: BTreeMap<NodeId, StepFunction>,
}

impl InstanceBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&mut self, name: impl Into<String>) -> NodeId {
        self.nodes.push(name.into());
        self.nodes.len() - 1
    }

    pub fn edge(&mut self, id: impl Into<String>, tail: NodeId, head: NodeId, tau: Q, nu: Q) -> EdgeId {
        self.edges.push(Edge {
            id: id.into(),
            tail,
            head,
            tau,
            nu,
        });
        self.edges.len() - 1
    }

    /// Edge with id `"tail->head"`.
    pub fn arc(&mut self, tail: NodeId, head: NodeId, tau: Q, nu: Q) -> EdgeId {
        let id = format!("{}->{}", self.nodes[tail], self.nodes[head]);
        self.edge(id, tail, head, tau, nu)
    }

    pub fn inflow(&mut self, v: NodeId, f: StepFunction) {
        self.inflows.insert(v, f);
    }

    pub fn build(self, sink: NodeId) -> Result<Instance, NetworkError> {
        Instance::new(self.nodes, self.edges, sink, self.inflows)
    }
}
