use super::{fmt, DynamicsError, FlowOverTime};
use crate::network::{Instance, NodeId};
use crate::stepfn::{PiecewiseLinear, StepFunction, Q};
use num::Signed;
use rayon::prelude::*;

/// Cumulative flows, queue and load of one edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeDerived {
    pub f_plus: PiecewiseLinear,
    pub f_minus: PiecewiseLinear,
    /// `q_e(θ) = F⁺_e(θ) − F⁻_e(θ + τ_e)`.
    pub queue: PiecewiseLinear,
    /// `F⁺_e − F⁻_e`.
    pub load: PiecewiseLinear,
}

/// All functions derived from a flow over time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedState {
    pub start: Q,
    pub horizon: Q,
    pub edges: Vec<EdgeDerived>,
    /// Total volume in the network.
    pub f_delta: PiecewiseLinear,
    /// Cumulative net arrival at the sink.
    pub z: PiecewiseLinear,
    /// Cumulative network inflow per node.
    pub inflow_cum: Vec<PiecewiseLinear>,
}

impl DerivedState {
    pub fn queue(&self, e: usize, t: &Q) -> Q {
        self.edges[e].queue.eval(t)
    }

    /// `c_e(θ) = τ_e + q_e(θ)/ν_e`.
    pub fn travel_time(&self, inst: &Instance, e: usize, t: &Q) -> Q {
        let edge = inst.edge(e);
        &edge.tau + self.queue(e, t) / &edge.nu
    }

    pub fn cumulative_inflow(&self, v: NodeId, t: &Q) -> Q {
        self.inflow_cum[v].eval(t)
    }
}

/// Computes cumulative functions, queues, loads, `F^Δ` and `Z` exactly.
/// Negative queues or loads within `[start, horizon]` are reported as defects.
pub fn derive(inst: &Instance, f: &FlowOverTime) -> Result<DerivedState, DynamicsError> {
    let m = inst.edges().len();
    if f.inflow.len() != m || f.outflow.len() != m {
        return Err(DynamicsError::EdgeCountMismatch {
            flow_edges: f.inflow.len(),
            instance_edges: m,
        });
    }
    let edges: Vec<EdgeDerived> = (0..m)
        .into_par_iter()
        .map(|i| {
            let e = inst.edge(i);
            let f_plus = f.inflow[i].integrate();
            let f_minus = f.outflow[i].integrate();
            let queue = f_plus.sub(&f_minus.shift(&-&e.tau));
            let load = f_plus.sub(&f_minus);
            EdgeDerived {
                f_plus,
                f_minus,
                queue,
                load,
            }
        })
        .collect();
    for (i, d) in edges.iter().enumerate() {
        for (name, g) in [("queue", &d.queue), ("load", &d.load)] {
            if let Some(t) = first_negative(g, &f.start, &f.horizon) {
                return Err(DynamicsError::NegativeQuantity {
                    edge: inst.edge(i).id.clone(),
                    quantity: name,
                    time: fmt(&t),
                });
            }
        }
    }
    let delta_rate = StepFunction::signed_sum(f.inflow.iter().map(|x| (x, false)).chain(f.outflow.iter().map(|x| (x, true))));
    let t = inst.sink();
    let z_rate = StepFunction::signed_sum(
        inst.in_edges(t)
            .iter()
            .map(|&e| (&f.outflow[e], false))
            .chain(inst.out_edges(t).iter().map(|&e| (&f.inflow[e], true))),
    );
    let inflow_cum = (0..inst.node_count())
        .map(|v| match inst.inflow(v) {
            Some(u) => u.integrate(),
            None => PiecewiseLinear::constant(crate::stepfn::q(0)),
        })
        .collect();
    Ok(DerivedState {
        start: f.start.clone(),
        horizon: f.horizon.clone(),
        edges,
        f_delta: delta_rate.integrate(),
        z: z_rate.integrate(),
        inflow_cum,
    })
}

/// Earliest point of `[a, b]` where `g < 0`, located at a breakpoint or endpoint.
fn first_negative(g: &PiecewiseLinear, a: &Q, b: &Q) -> Option<Q> {
    std::iter::once(a.clone())
        .chain(g.breakpoints().iter().filter(|t| *t > a && *t < b).cloned())
        .chain(std::iter::once(b.clone()))
        .find(|t| g.eval(t).is_negative())
}
