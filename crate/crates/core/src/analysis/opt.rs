use super::netflow::Network;
use super::AnalysisError;
use crate::dynamics::{check_feasibility, derive, makespan, total_travel_time, FlowOverTime};
use crate::engine::{simulate, FixedSplitPolicy, RoutingPolicy};
use crate::network::{dist_to_sink, Instance, Severity};
use crate::stepfn::{format_q, q, rational_gcd, serde_q, Q};
use num::{Integer, Signed, ToPrimitive, Zero};
use serde::Serialize;

/// Two-sided bounds on the optimal makespan from a time-expanded network.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OptBounds {
    /// Grid step actually used (the requested one, refined to divide every `τ_e`).
    #[serde(with = "serde_q")]
    pub delta: Q,
    #[serde(with = "serde_q")]
    pub lower: Q,
    #[serde(with = "serde_q")]
    pub upper: Q,
    /// Smallest number of grid windows after which all volume can have arrived.
    pub windows: u64,
    /// Total travel time of the best verified candidate flow.
    #[serde(with = "serde_q")]
    pub upper_travel_time: Q,
    /// Which routing attains `upper`.
    pub upper_method: String,
    /// The verified flow attaining `upper`.
    #[serde(skip)]
    pub upper_flow: FlowOverTime,
}

/// Time-expanded network over layers `0..=j` with step `delta` from `origin`.
struct Expanded {
    net: Network,
    source: usize,
    sink: usize,
    n: usize,
    /// `(arc, edge, layer)` for every edge copy.
    copies: Vec<(usize, usize, u64)>,
    /// `(arc, node, layer)` for every supply arc.
    supplies: Vec<(usize, usize, u64)>,
}

struct Grid<'a> {
    inst: &'a Instance,
    origin: Q,
    delta: Q,
    steps: Vec<u64>,
}

impl<'a> Grid<'a> {
    fn supply(&self, v: usize, i: u64) -> Q {
        let a = &self.origin + &self.delta * q(i as i64);
        let b = &a + &self.delta;
        self.inst.inflow(v).map_or_else(|| q(0), |u| u.integral(&a, &b))
    }

    fn build(&self, j: u64) -> Expanded {
        let inst = self.inst;
        let n = inst.node_count();
        let layers = j as usize + 1;
        let source = n * layers;
        let sink = source + 1;
        let mut net = Network::new(sink + 1);
        let idx = |v: usize, i: u64| i as usize * n + v;
        let t = inst.sink();
        let mut supplies = Vec::new();
        for &v in inst.inflows().keys() {
            for i in 0..=j {
                let s = self.supply(v, i);
                if s.is_positive() {
                    supplies.push((net.add_arc(source, idx(v, i), Some(s), 0), v, i));
                }
            }
        }
        for i in 0..=j {
            net.add_arc(idx(t, i), sink, None, 0);
            if i < j {
                for v in (0..n).filter(|&v| v != t) {
                    net.add_arc(idx(v, i), idx(v, i + 1), None, 1);
                }
            }
        }
        let mut copies = Vec::new();
        for (e, edge) in inst.edges().iter().enumerate() {
            if edge.tail == t {
                continue;
            }
            let k = self.steps[e];
            let cap = &edge.nu * &self.delta;
            for i in 0..=j.saturating_sub(k) {
                if i + k > j {
                    break;
                }
                let a = net.add_arc(idx(edge.tail, i), idx(edge.head, i + k), Some(cap.clone()), k as i64);
                copies.push((a, e, i));
            }
        }
        Expanded {
            net,
            source,
            sink,
            n,
            copies,
            supplies,
        }
    }

    fn max_flow(&self, j: u64, limit: &Q) -> Q {
        let mut x = self.build(j);
        x.net.max_flow(x.source, x.sink, limit)
    }
}

/// Candidate flow produced by a routing policy, kept only if feasible and terminating.
struct Candidate {
    makespan: Q,
    travel_time: Q,
    flow: FlowOverTime,
    method: String,
}

fn run_candidate<P: RoutingPolicy>(inst: &Instance, policy: &mut P, horizon: &Q, method: &str) -> Option<Candidate> {
    let out = match simulate(inst, policy, horizon, 1_000_000) {
        Ok(out) => out,
        Err(err) => {
            log::debug!("candidate {method} failed: {err}");
            return None;
        }
    };
    if !check_feasibility(inst, &out.flow).is_feasible() {
        log::warn!("candidate {method} produced an infeasible flow");
        return None;
    }
    let d = derive(inst, &out.flow).ok()?;
    let mk = makespan(inst, &d)?;
    let psi = total_travel_time(inst, &out.flow).ok()?.value;
    Some(Candidate {
        makespan: mk,
        travel_time: psi,
        flow: out.flow,
        method: method.to_string(),
    })
}

/// Split ratios from a time-expanded flow: flow arriving at a node in a window
/// leaves along the edges that carry it in FIFO order of the discrete solution.
fn traced_policy(grid: &Grid, x: &Expanded, j: u64) -> FixedSplitPolicy {
    let inst = grid.inst;
    let n = x.n;
    let layers = j as usize + 1;
    let mut arrivals = vec![vec![q(0); layers]; n];
    let mut departures: Vec<Vec<Vec<(usize, Q)>>> = vec![vec![Vec::new(); layers]; n];
    for &(a, v, i) in &x.supplies {
        arrivals[v][i as usize] += x.net.flow(a);
    }
    for &(a, e, i) in &x.copies {
        let fl = x.net.flow(a);
        if !fl.is_positive() {
            continue;
        }
        let edge = inst.edge(e);
        arrivals[edge.head][(i + grid.steps[e]) as usize] += fl;
        departures[edge.tail][i as usize].push((e, fl.clone()));
    }
    let mut policy = FixedSplitPolicy::shortest_path_tree(inst);
    for v in 0..n {
        if v == inst.sink() {
            continue;
        }
        let deps: Vec<(usize, Q)> = departures[v].iter().flatten().cloned().collect();
        let mut cursor = 0usize;
        let mut used = q(0);
        let mut windows = Vec::with_capacity(layers + 1);
        for (i, a) in arrivals[v].iter().enumerate() {
            let start = &grid.origin + &grid.delta * q(i as i64);
            let mut need = a.clone();
            let mut shares: Vec<(usize, Q)> = Vec::new();
            while need.is_positive() && cursor < deps.len() {
                let (e, amt) = &deps[cursor];
                let take = (amt - &used).min(need.clone());
                match shares.iter_mut().find(|(f, _)| f == e) {
                    Some(s) => s.1 += &take,
                    None => shares.push((*e, take.clone())),
                }
                need -= &take;
                used += &take;
                if used == *amt {
                    cursor += 1;
                    used = q(0);
                }
            }
            if need.is_positive() || a.is_zero() {
                windows.push((start, Vec::new()));
                continue;
            }
            for s in shares.iter_mut() {
                s.1 /= a;
            }
            windows.push((start, shares));
        }
        windows.push((&grid.origin + &grid.delta * q(layers as i64), Vec::new()));
        policy.ratios[v] = windows;
    }
    policy
}

/// Bounds on the optimal makespan with grid step `delta`.
///
/// The lower bound is the first grid time at which a time-expanded relaxation
/// can deliver all volume, tightened by the sink's inflow capacity in the last
/// window. The upper bound is the best makespan of verified feasible flows
/// obtained by simulating routings: a shortest-path tree and split ratios
/// traced from a min-cost time-expanded flow.
pub fn opt_makespan_bounds(inst: &Instance, delta: &Q) -> Result<OptBounds, AnalysisError> {
    if !delta.is_positive() {
        return Err(AnalysisError::Query("grid step must be positive".into()));
    }
    let errors: Vec<String> = inst
        .validate()
        .into_iter()
        .filter(|v| v.severity == Severity::Error)
        .map(|v| v.to_string())
        .collect();
    if !errors.is_empty() {
        return Err(AnalysisError::Precondition(errors.join("; ")));
    }
    let delta = inst.edges().iter().fold(delta.clone(), |d, e| rational_gcd(&d, &e.tau));
    let volume = inst.total_volume();
    let theta0 = inst.theta0();
    if volume.is_zero() {
        return Ok(OptBounds {
            delta,
            lower: q(0),
            upper: q(0),
            windows: 0,
            upper_travel_time: q(0),
            upper_method: "empty".into(),
            upper_flow: FlowOverTime::zero(inst),
        });
    }
    let origin = inst.earliest_time();
    let steps: Vec<u64> = inst
        .edges()
        .iter()
        .map(|e| (&e.tau / &delta).to_integer().to_u64().expect("grid step count fits u64"))
        .collect();
    let grid = Grid {
        inst,
        origin: origin.clone(),
        delta: delta.clone(),
        steps,
    };

    let nu_min = inst.min_capacity().expect("volume implies edges");
    let slack = &theta0 + crate::network::total_tau(inst) + q(inst.edges().len() as i64 + 1) * &volume / &nu_min + q(1);
    let mut candidates = Vec::new();
    let mut spt = FixedSplitPolicy::shortest_path_tree(inst);
    let spt_run = run_candidate(inst, &mut spt, &slack, "shortest_path_tree")
        .ok_or_else(|| AnalysisError::Precondition("shortest-path-tree routing did not terminate".into()))?;

    let windows_for = |t: &Q| -> u64 {
        let r = (t - &origin) / &delta;
        r.numer().div_ceil(r.denom()).to_u64().expect("window count fits u64")
    };
    let mut hi = windows_for(&spt_run.makespan);
    let mut lo = 0u64;
    if grid.max_flow(hi, &volume) < volume {
        return Err(AnalysisError::Precondition("time-expanded network cannot route the volume".into()));
    }
    while lo < hi {
        let mid = (lo + hi) / 2;
        if grid.max_flow(mid, &volume) == volume {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let j = lo;
    let before = if j == 0 { q(0) } else { grid.max_flow(j - 1, &volume) };
    let c_in = inst
        .in_edges(inst.sink())
        .iter()
        .fold(q(0), |acc, &e| acc + &inst.edge(e).nu);
    let tail = ((&volume - &before) / &c_in).min(delta.clone());
    let lower = (&origin + &delta * q(j as i64) + tail).max(theta0.clone());
    log::debug!("time-expanded bound: {j} windows of {}", format_q(&delta));

    candidates.push(spt_run);
    let mut x = grid.build(j);
    let sent = x.net.min_cost_flow(x.source, x.sink, &volume);
    if sent == volume {
        let mut traced = traced_policy(&grid, &x, j);
        let horizon = &slack + &delta * q(j as i64 + 1);
        if let Some(c) = run_candidate(inst, &mut traced, &horizon, "time_expanded_min_cost") {
            candidates.push(c);
        }
    }
    let best_mk = candidates
        .iter()
        .min_by(|a, b| a.makespan.cmp(&b.makespan))
        .expect("at least one candidate");
    let upper = best_mk.makespan.clone();
    let upper_method = best_mk.method.clone();
    let upper_flow = best_mk.flow.clone();
    let upper_travel_time = candidates
        .iter()
        .map(|c| c.travel_time.clone())
        .min()
        .expect("at least one candidate");
    debug_assert!(lower <= upper);
    Ok(OptBounds {
        delta,
        lower,
        upper,
        windows: j,
        upper_travel_time,
        upper_method,
        upper_flow,
    })
}

/// `Σ_v U_v · dist_τ(v, t)`: every particle needs at least the free-flow
/// distance from its source.
pub fn opt_travel_time_lower(inst: &Instance) -> Q {
    let dist = dist_to_sink(inst);
    inst.inflows()
        .iter()
        .map(|(&v, u)| {
            let vol = match (u.left_bound(), u.breakpoints().last()) {
                (Some(a), Some(b)) => u.integral(a, b),
                _ => q(0),
            };
            vol * dist[v].clone().unwrap_or_else(|| q(0))
        })
        .fold(q(0), |a, b| a + b)
}

