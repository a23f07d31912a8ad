use super::labels::{is_tight, labels_for_costs, processing_order, travel_costs};
use super::sim::{simulate, PhaseContext, RoutingPolicy};
use super::waterfill::{water_fill, Candidate};
use super::{EngineError, IdeTrace, LabelState};
use crate::network::{EdgeId, Instance, Severity};
use crate::stepfn::{format_q, q, Q};
use num::Signed;

/// Routes by current shortest paths: labels, active edges, then water-filling
/// in ascending label order.
#[derive(Default)]
pub struct IdePolicy {
    state: Option<LabelState>,
    costs: Vec<Q>,
}

impl RoutingPolicy for IdePolicy {
    fn allocate(&mut self, ctx: &PhaseContext) -> Result<Vec<Q>, EngineError> {
        let inst = ctx.inst;
        let costs = travel_costs(inst, ctx.queues);
        let snap = labels_for_costs(inst, &costs);
        let order = processing_order(&snap.labels);
        let n = inst.node_count();
        let mut derivs: Vec<Option<Q>> = vec![None; n];
        let mut x = vec![q(0); inst.edges().len()];
        let mut active_out: Vec<Vec<EdgeId>> = vec![Vec::new(); n];
        for &e in &snap.active {
            active_out[inst.edge(e).tail].push(e);
        }
        for v in 0..n {
            if snap.labels[v].is_none() && ctx.budget[v].is_positive() {
                return Err(EngineError::Stuck {
                    node: inst.node_name(v).to_string(),
                    time: format_q(ctx.theta),
                });
            }
        }
        for &v in &order {
            if v == inst.sink() {
                derivs[v] = Some(q(0));
                continue;
            }
            let edges = &active_out[v];
            let cands: Vec<Candidate> = edges
                .iter()
                .map(|&e| {
                    let edge = inst.edge(e);
                    Candidate::new(
                        edge.nu.clone(),
                        ctx.queues[e].clone(),
                        derivs[edge.head].clone().expect("head processed first"),
                    )
                })
                .collect();
            let (alloc, level) = water_fill(&ctx.budget[v], &cands);
            for (&e, a) in edges.iter().zip(alloc) {
                x[e] = a;
            }
            derivs[v] = Some(level);
        }
        self.state = Some(LabelState {
            labels: snap.labels,
            derivs,
            active: snap.active,
            order,
        });
        self.costs = costs;
        Ok(x)
    }

    fn next_event(&mut self, ctx: &PhaseContext, _rates: &[Q], slopes: &[Q]) -> Option<Q> {
        let st = self.state.as_ref()?;
        let inst = ctx.inst;
        let mut best: Option<Q> = None;
        for (e, edge) in inst.edges().iter().enumerate() {
            if edge.tail == inst.sink() || is_tight(inst, &st.labels, &self.costs, e) {
                continue;
            }
            let (Some(lv), Some(lw)) = (&st.labels[edge.tail], &st.labels[edge.head]) else {
                continue;
            };
            let (Some(dv), Some(dw)) = (&st.derivs[edge.tail], &st.derivs[edge.head]) else {
                continue;
            };
            let gap = lw + &self.costs[e] - lv;
            let rate = dw + &slopes[e] / &edge.nu - dv;
            if rate.is_negative() {
                let t = ctx.theta + gap / (-rate);
                if best.as_ref().is_none_or(|b| t < *b) {
                    best = Some(t);
                }
            }
        }
        best
    }

    fn label_state(&mut self) -> Option<LabelState> {
        self.state.clone()
    }
}

/// Run limits for [`compute_ide`].
#[derive(Clone, Debug)]
pub struct IdeOptions {
    /// Stop at this time; `None` uses the termination bound `θ̂`.
    pub horizon: Option<Q>,
    pub max_phases: usize,
}

impl Default for IdeOptions {
    fn default() -> Self {
        Self {
            horizon: None,
            max_phases: 1_000_000,
        }
    }
}

/// Builds an IDE flow phase by phase.
pub fn compute_ide(inst: &Instance, opts: &IdeOptions) -> Result<IdeTrace, EngineError> {
    if !inst.is_runnable() {
        return Err(EngineError::NotRunnable);
    }
    let errors: Vec<String> = inst
        .validate()
        .into_iter()
        .filter(|v| v.severity == Severity::Error)
        .map(|v| v.to_string())
        .collect();
    if !errors.is_empty() {
        return Err(EngineError::InvalidInstance(errors));
    }
    let horizon = opts
        .horizon
        .clone()
        .unwrap_or_else(|| crate::analysis::theta_hat(inst).value);
    let mut policy = IdePolicy::default();
    let out = simulate(inst, &mut policy, &horizon, opts.max_phases)?;
    log::debug!("IDE run: {} phases, stop {:?}", out.phases.len(), out.stop);
    Ok(IdeTrace {
        phases: out.phases,
        flow: out.flow,
        stop: out.stop,
    })
}
