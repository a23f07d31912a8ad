use crate::dynamics::DerivedState;
use crate::network::{EdgeId, Instance, NodeId};
use crate::stepfn::Q;

/// Shortest-path labels and tight edges at one instant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelSnapshot {
    /// `ℓ_v(θ)`; `None` when the sink is unreachable from `v`.
    pub labels: Vec<Option<Q>>,
    /// Edges `vw` with `ℓ_v = ℓ_w + c_vw`.
    pub active: Vec<EdgeId>,
}

/// Labels under edge costs `cost(e)`, plus the tight-edge set.
pub(crate) fn labels_for_costs(inst: &Instance, cost: &[Q]) -> LabelSnapshot {
    let labels = crate::network::graph_dijkstra(inst, |e| cost[e].clone());
    let active = (0..inst.edges().len())
        .filter(|&e| is_tight(inst, &labels, cost, e))
        .collect();
    LabelSnapshot { labels, active }
}

pub(crate) fn is_tight(inst: &Instance, labels: &[Option<Q>], cost: &[Q], e: EdgeId) -> bool {
    let edge = inst.edge(e);
    if edge.tail == inst.sink() {
        return false;
    }
    match (&labels[edge.tail], &labels[edge.head]) {
        (Some(lv), Some(lw)) => *lv == lw + &cost[e],
        _ => false,
    }
}

/// `c_e(θ) = τ_e + q_e/ν_e` for all edges.
pub(crate) fn travel_costs(inst: &Instance, queues: &[Q]) -> Vec<Q> {
    inst.edges()
        .iter()
        .zip(queues)
        .map(|(e, qe)| &e.tau + qe / &e.nu)
        .collect()
}

/// Current shortest-path labels `ℓ_v(θ)` with weights `c_e(θ)` and the active edges.
pub fn instantaneous_labels(inst: &Instance, derived: &DerivedState, theta: &Q) -> LabelSnapshot {
    let queues: Vec<Q> = (0..inst.edges().len()).map(|e| derived.queue(e, theta)).collect();
    labels_for_costs(inst, &travel_costs(inst, &queues))
}

/// Nodes with finite label sorted by ascending label, ties by id.
pub(crate) fn processing_order(labels: &[Option<Q>]) -> Vec<NodeId> {
    let mut order: Vec<NodeId> = (0..labels.len()).filter(|&v| labels[v].is_some()).collect();
    order.sort_by(|&a, &b| labels[a].cmp(&labels[b]).then(a.cmp(&b)));
    order
}
