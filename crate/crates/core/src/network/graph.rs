use super::{Instance, NodeId};
use crate::stepfn::{q, Q};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// `Σ_e τ_e`.
pub fn total_tau(inst: &Instance) -> Q {
    inst.edges().iter().fold(q(0), |acc, e| acc + &e.tau)
}

/// Nodes from which the sink is reachable.
pub fn reaches_sink(inst: &Instance) -> Vec<bool> {
    let mut seen = vec![false; inst.node_count()];
    let mut stack = vec![inst.sink()];
    seen[inst.sink()] = true;
    while let Some(w) = stack.pop() {
        for &e in inst.in_edges(w) {
            let v = inst.edge(e).tail;
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

/// Physical (free-flow) shortest distances to the sink; `None` if unreachable.
pub fn dist_to_sink(inst: &Instance) -> Vec<Option<Q>> {
    dijkstra_to_sink(inst, |e| inst.edge(e).tau.clone())
}

/// Reverse Dijkstra from the sink with nonnegative edge weights.
pub(crate) fn dijkstra_to_sink(inst: &Instance, weight: impl Fn(usize) -> Q) -> Vec<Option<Q>> {
    let n = inst.node_count();
    let mut dist: Vec<Option<Q>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[inst.sink()] = Some(q(0));
    heap.push(Reverse((q(0), inst.sink())));
    while let Some(Reverse((d, w))) = heap.pop() {
        if done[w] {
            continue;
        }
        done[w] = true;
        for &e in inst.in_edges(w) {
            let v = inst.edge(e).tail;
            if done[v] {
                continue;
            }
            let cand = &d + weight(e);
            if dist[v].as_ref().is_none_or(|cur| cand < *cur) {
                dist[v] = Some(cand.clone());
                heap.push(Reverse((cand, v)));
            }
        }
    }
    dist
}

/// Topological order of all nodes, or `None` if the graph has a cycle.
pub(crate) fn topological_order(inst: &Instance) -> Option<Vec<NodeId>> {
    let n = inst.node_count();
    let mut indeg: Vec<usize> = (0..n).map(|v| inst.in_edges(v).len()).collect();
    let mut queue: Vec<NodeId> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = queue.pop() {
        order.push(v);
        for &e in inst.out_edges(v) {
            let w = inst.edge(e).head;
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push(w);
            }
        }
    }
    (order.len() == n).then_some(order)
}

pub fn is_acyclic(inst: &Instance) -> bool {
    topological_order(inst).is_some()
}

/// Longest node-to-sink path length. Exact on acyclic graphs; `Στ_e` with
/// `exact = false` otherwise.
pub fn longest_path_tau(inst: &Instance) -> (Q, bool) {
    let Some(order) = topological_order(inst) else {
        return (total_tau(inst), false);
    };
    let mut best: Vec<Option<Q>> = vec![None; inst.node_count()];
    best[inst.sink()] = Some(q(0));
    for &v in order.iter().rev() {
        for &e in inst.out_edges(v) {
            let edge = inst.edge(e);
            if let Some(lw) = &best[edge.head] {
                let cand = lw + &edge.tau;
                if best[v].as_ref().is_none_or(|cur| cand > *cur) {
                    best[v] = Some(cand);
                }
            }
        }
    }
    let value = best.into_iter().flatten().max().unwrap_or_else(|| q(0));
    (value, true)
}
