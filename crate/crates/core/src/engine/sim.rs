use super::{EngineError, EventKind, LabelState, Phase, StopReason};
use crate::dynamics::FlowOverTime;
use crate::network::{EdgeId, Instance, NodeId};
use crate::stepfn::{format_q, q, StepFunction, Q};
use num::{Signed, Zero};

/// What a routing policy sees at the start of a phase.
pub struct PhaseContext<'a> {
    pub inst: &'a Instance,
    pub theta: &'a Q,
    pub queues: &'a [Q],
    /// Flow that must leave each node right now: network inflow plus edge outflows.
    pub budget: &'a [Q],
}

/// Decides edge inflow rates; the simulator enforces the queueing dynamics.
pub trait RoutingPolicy {
    /// Edge inflow rates `x_e` for the phase starting at `ctx.theta`. Every node's
    /// budget must be split exactly over its out-edges (the sink absorbs).
    fn allocate(&mut self, ctx: &PhaseContext) -> Result<Vec<Q>, EngineError>;

    /// Earliest time after `ctx.theta` at which the policy's own decision could
    /// change, given the chosen rates and the resulting queue slopes.
    fn next_event(&mut self, ctx: &PhaseContext, rates: &[Q], slopes: &[Q]) -> Option<Q>;

    /// Label data for the phase record, if the policy maintains labels.
    fn label_state(&mut self) -> Option<LabelState> {
        None
    }
}

/// Outcome of a simulation run.
#[derive(Clone, Debug)]
pub struct SimOutcome {
    pub phases: Vec<Phase>,
    pub flow: FlowOverTime,
    pub stop: StopReason,
}

struct Pieces {
    list: Vec<(Q, Q)>,
    cursor: usize,
}

impl Pieces {
    fn new() -> Self {
        Self {
            list: Vec::new(),
            cursor: 0,
        }
    }

    fn last_rate(&self) -> Q {
        self.list.last().map_or_else(|| q(0), |p| p.1.clone())
    }

    fn record(&mut self, at: Q, rate: Q) {
        if self.last_rate() != rate {
            self.list.push((at, rate));
        }
    }

    /// Rate in force at `t`; `t` must be nondecreasing across calls.
    fn rate_at(&mut self, t: &Q) -> Q {
        while self.cursor < self.list.len() && self.list[self.cursor].0 <= *t {
            self.cursor += 1;
        }
        if self.cursor == 0 {
            q(0)
        } else {
            self.list[self.cursor - 1].1.clone()
        }
    }

    fn next_after(&self, t: &Q) -> Option<&Q> {
        self.list[self.cursor..].iter().map(|p| &p.0).find(|s| *s > t)
    }

    fn into_step(self) -> StepFunction {
        StepFunction::from_pieces(self.list)
    }
}

fn event_rank(k: EventKind) -> u8 {
    match k {
        EventKind::InflowBreakpoint => 0,
        EventKind::OutflowFront => 1,
        EventKind::QueueDepletion => 2,
        EventKind::ActivationCrossing => 3,
        EventKind::PolicyBreakpoint => 4,
        EventKind::Horizon => 5,
    }
}

fn consider(best: &mut Option<(Q, EventKind)>, t: Q, k: EventKind) {
    let better = match best {
        None => true,
        Some((bt, bk)) => t < *bt || (t == *bt && event_rank(k) < event_rank(*bk)),
    };
    if better {
        *best = Some((t, k));
    }
}

/// Runs the Vickrey dynamics under `policy` from the earlier of 0 and the first
/// inflow until the network is empty after `θ₀`, the horizon, or the phase cap.
pub fn simulate<P: RoutingPolicy>(
    inst: &Instance,
    policy: &mut P,
    horizon: &Q,
    max_phases: usize,
) -> Result<SimOutcome, EngineError> {
    let m = inst.edges().len();
    let n = inst.node_count();
    let start = inst.earliest_time().min(q(0));
    let theta0 = inst.theta0();
    let mut theta = start.clone();
    let mut queues = vec![q(0); m];
    let mut loads = vec![q(0); m];
    let mut ins: Vec<Pieces> = (0..m).map(|_| Pieces::new()).collect();
    let mut outs: Vec<Pieces> = (0..m).map(|_| Pieces::new()).collect();
    let mut phases: Vec<Phase> = Vec::new();
    let stop;
    loop {
        let empty = loads.iter().all(|l| l.is_zero());
        if theta >= theta0 && empty {
            stop = StopReason::Terminated;
            break;
        }
        if theta >= *horizon {
            stop = StopReason::Horizon;
            break;
        }
        if phases.len() >= max_phases {
            stop = StopReason::MaxPhases;
            break;
        }
        let out_now: Vec<Q> = outs.iter_mut().map(|p| p.rate_at(&theta)).collect();
        let mut budget: Vec<Q> = (0..n)
            .map(|v| inst.inflow(v).map_or_else(|| q(0), |u| u.eval(&theta)))
            .collect();
        for (e, edge) in inst.edges().iter().enumerate() {
            budget[edge.head] += &out_now[e];
        }
        budget[inst.sink()] = q(0);
        let ctx = PhaseContext {
            inst,
            theta: &theta,
            queues: &queues,
            budget: &budget,
        };
        let rates = policy.allocate(&ctx)?;
        check_allocation(inst, &budget, &rates, &theta)?;

        let mut slopes = Vec::with_capacity(m);
        for (e, edge) in inst.edges().iter().enumerate() {
            let x = &rates[e];
            let discharge = if queues[e].is_positive() || *x >= edge.nu {
                edge.nu.clone()
            } else {
                x.clone()
            };
            slopes.push(x - &discharge);
            ins[e].record(theta.clone(), x.clone());
            outs[e].record(&theta + &edge.tau, discharge);
        }

        let mut best: Option<(Q, EventKind)> = None;
        for u in inst.inflows().values() {
            if let Some(t) = u.next_breakpoint_after(&theta) {
                consider(&mut best, t.clone(), EventKind::InflowBreakpoint);
            }
        }
        for p in &outs {
            if let Some(t) = p.next_after(&theta) {
                consider(&mut best, t.clone(), EventKind::OutflowFront);
            }
        }
        for e in 0..m {
            if queues[e].is_positive() && slopes[e].is_negative() {
                consider(&mut best, &theta - &queues[e] / &slopes[e], EventKind::QueueDepletion);
            }
        }
        let labels = policy.label_state();
        if let Some(t) = policy.next_event(&ctx, &rates, &slopes) {
            let kind = if labels.is_some() {
                EventKind::ActivationCrossing
            } else {
                EventKind::PolicyBreakpoint
            };
            consider(&mut best, t, kind);
        }
        consider(&mut best, horizon.clone(), EventKind::Horizon);
        let (next, kind) = best.expect("horizon always present");
        if next <= theta {
            return Err(EngineError::ZeroLengthPhase {
                time: format_q(&theta),
                event: kind,
                state: dump_state(inst, &queues, &rates, &slopes),
            });
        }
        let dt = &next - &theta;
        for e in 0..m {
            queues[e] += &slopes[e] * &dt;
            loads[e] += (&rates[e] - &out_now[e]) * &dt;
        }
        phases.push(Phase {
            start: theta.clone(),
            end: next.clone(),
            event: kind,
            rates: sparse(&rates),
            queue_slopes: sparse(&slopes),
            labels,
        });
        theta = next;
    }
    let end = theta.clone();
    if stop == StopReason::Terminated {
        for p in &mut ins {
            p.record(end.clone(), q(0));
        }
    }
    let flow = FlowOverTime {
        start,
        horizon: end,
        inflow: ins.into_iter().map(Pieces::into_step).collect(),
        outflow: outs.into_iter().map(Pieces::into_step).collect(),
    };
    Ok(SimOutcome { phases, flow, stop })
}

fn sparse(v: &[Q]) -> Vec<(EdgeId, Q)> {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(e, x)| (e, x.clone()))
        .collect()
}

fn check_allocation(inst: &Instance, budget: &[Q], rates: &[Q], theta: &Q) -> Result<(), EngineError> {
    for (v, b) in budget.iter().enumerate() {
        if v == inst.sink() {
            continue;
        }
        let sent = inst.out_edges(v).iter().fold(q(0), |s, &e| s + &rates[e]);
        if sent != *b || inst.out_edges(v).iter().any(|&e| rates[e].is_negative()) {
            return Err(EngineError::BadAllocation {
                node: inst.node_name(v).to_string(),
                time: format_q(theta),
                budget: format_q(b),
                sent: format_q(&sent),
            });
        }
    }
    if inst.out_edges(inst.sink()).iter().any(|&e| !rates[e].is_zero()) {
        return Err(EngineError::BadAllocation {
            node: inst.node_name(inst.sink()).to_string(),
            time: format_q(theta),
            budget: "0".into(),
            sent: "positive".into(),
        });
    }
    Ok(())
}

fn dump_state(inst: &Instance, queues: &[Q], rates: &[Q], slopes: &[Q]) -> String {
    inst.edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            format!(
                "{}: q={} x={} q'={}",
                edge.id,
                format_q(&queues[e]),
                format_q(&rates[e]),
                format_q(&slopes[e])
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

/// Split shares `(edge, share)` in force from the given start time.
pub type SplitWindow = (Q, Vec<(EdgeId, Q)>);

/// Time-varying split ratios per node; nodes without ratios (or with no mass at
/// a time) send everything along a fallback edge.
#[derive(Clone, Debug, Default)]
pub struct FixedSplitPolicy {
    /// Per node: windows `(start, [(edge, share)])` sorted by start.
    pub ratios: Vec<Vec<SplitWindow>>,
    pub fallback: Vec<Option<EdgeId>>,
}

impl FixedSplitPolicy {
    /// Sends each node's flow along one physically shortest out-edge.
    pub fn shortest_path_tree(inst: &Instance) -> Self {
        let dist = crate::network::dist_to_sink(inst);
        let fallback = (0..inst.node_count())
            .map(|v| {
                inst.out_edges(v)
                    .iter()
                    .copied()
                    .filter(|&e| {
                        let edge = inst.edge(e);
                        match (&dist[v], &dist[edge.head]) {
                            (Some(dv), Some(dw)) => *dv == dw + &edge.tau,
                            _ => false,
                        }
                    })
                    .max_by(|&a, &b| inst.edge(a).nu.cmp(&inst.edge(b).nu).then(b.cmp(&a)))
            })
            .collect();
        Self {
            ratios: vec![Vec::new(); inst.node_count()],
            fallback,
        }
    }

    /// Random time-varying splits on `[start, until)` in windows of length
    /// `step`, then the shortest-path tree. Produces feasible, generally non-IDE flows.
    pub fn random<R: rand::Rng>(rng: &mut R, inst: &Instance, start: &Q, until: &Q, step: &Q) -> Self {
        let mut policy = Self::shortest_path_tree(inst);
        for v in 0..inst.node_count() {
            let outs = inst.out_edges(v);
            if v == inst.sink() || outs.len() < 2 {
                continue;
            }
            let mut windows = Vec::new();
            let mut t = start.clone();
            while t < *until {
                let mut weights: Vec<i64> = outs.iter().map(|_| rng.gen_range(0..=3)).collect();
                if weights.iter().all(|&w| w == 0) {
                    weights[rng.gen_range(0..outs.len())] = 1;
                }
                let total: i64 = weights.iter().sum();
                let shares = outs
                    .iter()
                    .zip(&weights)
                    .filter(|(_, &w)| w > 0)
                    .map(|(&e, &w)| (e, crate::stepfn::ratio(w, total)))
                    .collect();
                windows.push((t.clone(), shares));
                t += step;
            }
            windows.push((t, Vec::new()));
            policy.ratios[v] = windows;
        }
        policy
    }

    fn window(&self, v: NodeId, t: &Q) -> Option<&Vec<(EdgeId, Q)>> {
        let w = &self.ratios[v];
        let i = w.partition_point(|(s, _)| s <= t);
        (i > 0).then(|| &w[i - 1].1).filter(|r| !r.is_empty())
    }
}

impl RoutingPolicy for FixedSplitPolicy {
    fn allocate(&mut self, ctx: &PhaseContext) -> Result<Vec<Q>, EngineError> {
        let inst = ctx.inst;
        let mut x = vec![q(0); inst.edges().len()];
        for v in 0..inst.node_count() {
            let b = &ctx.budget[v];
            if v == inst.sink() || b.is_zero() {
                continue;
            }
            match self.window(v, ctx.theta) {
                Some(shares) => {
                    for (e, s) in shares {
                        x[*e] += b * s;
                    }
                }
                None => match self.fallback[v] {
                    Some(e) => x[e] += b,
                    None => {
                        return Err(EngineError::Stuck {
                            node: inst.node_name(v).to_string(),
                            time: format_q(ctx.theta),
                        })
                    }
                },
            }
        }
        Ok(x)
    }

    fn next_event(&mut self, ctx: &PhaseContext, _rates: &[Q], _slopes: &[Q]) -> Option<Q> {
        self.ratios
            .iter()
            .filter_map(|w| w.iter().map(|(s, _)| s).find(|s| *s > ctx.theta).cloned())
            .min()
    }
}
