use super::AnalysisError;
use crate::dynamics::DerivedState;
use crate::network::{dist_to_sink, longest_path_tau, Instance, NodeId};
use crate::stepfn::{q, ratio, serde_q, Q};
use serde::Serialize;

/// A node set containing the sink and a time interval `[θ₁, θ₂]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SinkLikeQuery {
    pub nodes: Vec<NodeId>,
    pub from: Q,
    pub to: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SinkLikeReport {
    /// `vol(T, θ₁, θ₂)`.
    #[serde(with = "serde_q")]
    pub vol: Q,
    pub vol_below_half: bool,
    /// Every physically shortest path from a node of `T` stays in `T`.
    pub paths_contained: bool,
    /// Edges on a shortest path that leave `T` (ids).
    pub escaping_edges: Vec<String>,
}

impl SinkLikeReport {
    pub fn is_sink_like(&self) -> bool {
        self.vol_below_half && self.paths_contained
    }
}

/// Evaluates both sink-like conditions for `query` on a flow's derived state.
pub fn sink_like_check(inst: &Instance, d: &DerivedState, query: &SinkLikeQuery) -> Result<SinkLikeReport, AnalysisError> {
    let (a, b) = (&query.from, &query.to);
    if a > b {
        return Err(AnalysisError::Query("interval end precedes start".into()));
    }
    let mut member = vec![false; inst.node_count()];
    for &v in &query.nodes {
        if v >= inst.node_count() {
            return Err(AnalysisError::Query(format!("node index {v} out of range")));
        }
        member[v] = true;
    }
    if !member[inst.sink()] {
        return Err(AnalysisError::Query("node set must contain the sink".into()));
    }
    let mut vol = q(0);
    for (e, edge) in inst.edges().iter().enumerate() {
        let (mt, mh) = (member[edge.tail], member[edge.head]);
        if mt && mh {
            vol += d.edges[e].load.eval(a);
        } else if mh {
            vol += d.edges[e].f_minus.eval(b) - d.edges[e].f_minus.eval(a);
        }
    }
    for (v, &m) in member.iter().enumerate() {
        if m && v != inst.sink() {
            vol += d.cumulative_inflow(v, b) - d.cumulative_inflow(v, a);
        }
    }
    let dist = dist_to_sink(inst);
    let mut escaping = Vec::new();
    let mut contained = true;
    for (v, &m) in member.iter().enumerate() {
        if !m || v == inst.sink() {
            continue;
        }
        let Some(dv) = &dist[v] else {
            contained = false;
            continue;
        };
        for &e in inst.out_edges(v) {
            let edge = inst.edge(e);
            let tight = dist[edge.head].as_ref().is_some_and(|dw| *dv == dw + &edge.tau);
            if tight && !member[edge.head] {
                contained = false;
                escaping.push(edge.id.clone());
            }
        }
    }
    Ok(SinkLikeReport {
        vol_below_half: vol < ratio(1, 2),
        vol,
        paths_contained: contained,
        escaping_edges: escaping,
    })
}

/// `Z(θ) − Z(ζ) − min{F^Δ(ζ), θ − ζ − τ(P_max)}`; nonnegative for feasible
/// flows on acyclic networks with all capacities at least 1.
pub fn acyclic_arrival_check(inst: &Instance, d: &DerivedState, zeta: &Q, theta: &Q) -> Result<Q, AnalysisError> {
    let (tau_pmax, exact) = longest_path_tau(inst);
    if !exact {
        return Err(AnalysisError::Cyclic);
    }
    if inst.min_capacity().is_some_and(|nu| nu < q(1)) {
        return Err(AnalysisError::Precondition("arrival rate bound needs every capacity ≥ 1".into()));
    }
    if zeta > theta {
        return Err(AnalysisError::Query("need ζ ≤ θ".into()));
    }
    let vol = d.f_delta.eval(zeta);
    let window = theta - zeta - tau_pmax;
    Ok(d.z.eval(theta) - d.z.eval(zeta) - vol.min(window))
}
