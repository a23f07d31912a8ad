use crate::dynamics::{derive, DynamicsError, FlowOverTime};
use crate::network::{EdgeId, Instance};
use crate::stepfn::{q, serde_q, Q};
use num::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::VecDeque;

/// Interval on which an edge carries inflow without being active.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdeViolation {
    pub edge: String,
    #[serde(with = "serde_q")]
    pub from: Q,
    #[serde(with = "serde_q")]
    pub to: Q,
    /// `ℓ_v` at a witness point inside the interval (`None`: sink unreachable).
    #[serde(with = "serde_q::opt")]
    pub label_v: Option<Q>,
    /// `ℓ_w + c_e` at the same point.
    #[serde(with = "serde_q::opt")]
    pub label_w_plus_c: Option<Q>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdeReport {
    pub pieces_checked: usize,
    pub violations: Vec<IdeViolation>,
}

impl IdeReport {
    pub fn is_ide(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Continuous piecewise-linear function on `[0, len]` given by its vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Env(Vec<(Q, Q)>);

impl Env {
    fn linear(len: &Q, c0: &Q, c1: &Q) -> Self {
        if c1.is_zero() {
            return Env(vec![(q(0), c0.clone()), (len.clone(), c0.clone())]);
        }
        Env(vec![(q(0), c0.clone()), (len.clone(), c0 + c1 * len)])
    }

    fn eval(&self, s: &Q) -> Q {
        let i = self.0.partition_point(|(x, _)| x <= s);
        if i == 0 {
            return self.0[0].1.clone();
        }
        if i == self.0.len() {
            return self.0[i - 1].1.clone();
        }
        let (x0, y0) = &self.0[i - 1];
        let (x1, y1) = &self.0[i];
        y0 + (y1 - y0) * (s - x0) / (x1 - x0)
    }

    fn plus(&self, other: &Env) -> Env {
        let grid = merge_grid(self, other);
        Env(grid.into_iter().map(|s| {
            let v = self.eval(&s) + other.eval(&s);
            (s, v)
        }).collect()).simplified()
    }

    /// Pointwise minimum, with crossings inserted.
    fn min(&self, other: &Env) -> Env {
        let grid = merge_grid(self, other);
        let vals: Vec<(Q, Q)> = grid.iter().map(|s| (self.eval(s), other.eval(s))).collect();
        let mut pts = Vec::with_capacity(grid.len() + 2);
        for i in 0..grid.len() {
            let (a, b) = &vals[i];
            pts.push((grid[i].clone(), a.min(b).clone()));
            if i + 1 < grid.len() {
                let d0 = a - b;
                let (a1, b1) = &vals[i + 1];
                let d1 = a1 - b1;
                if (d0.is_positive() && d1.is_negative()) || (d0.is_negative() && d1.is_positive()) {
                    let s = &grid[i] + (&grid[i + 1] - &grid[i]) * &d0 / (&d0 - &d1);
                    let v = self.eval(&s);
                    pts.push((s, v));
                }
            }
        }
        Env(pts).simplified()
    }

    /// True if `self < other` at some point.
    fn below_somewhere(&self, other: &Env) -> bool {
        merge_grid(self, other).iter().any(|s| self.eval(s) < other.eval(s))
    }

    fn simplified(self) -> Env {
        let mut out: Vec<(Q, Q)> = Vec::with_capacity(self.0.len());
        for p in self.0 {
            if let Some(last) = out.last() {
                if last.0 == p.0 {
                    continue;
                }
            }
            while out.len() >= 2 {
                let (x0, y0) = &out[out.len() - 2];
                let (x1, y1) = &out[out.len() - 1];
                if (y1 - y0) * (&p.0 - x1) == (&p.1 - y1) * (x1 - x0) {
                    out.pop();
                } else {
                    break;
                }
            }
            out.push(p);
        }
        Env(out)
    }
}

fn merge_grid(a: &Env, b: &Env) -> Vec<Q> {
    let mut g: Vec<Q> = a.0.iter().chain(b.0.iter()).map(|p| p.0.clone()).collect();
    g.sort();
    g.dedup();
    g
}

/// Exact labels on one piece where all queues are linear.
fn piece_labels(inst: &Instance, costs: &[Env]) -> Vec<Option<Env>> {
    let n = inst.node_count();
    let t = inst.sink();
    let len = costs.first().map_or_else(|| q(0), |c| c.0.last().expect("nonempty").0.clone());
    let mut labels: Vec<Option<Env>> = vec![None; n];
    labels[t] = Some(Env::linear(&len, &q(0), &q(0)));
    let mut queue = VecDeque::from([t]);
    let mut queued = vec![false; n];
    queued[t] = true;
    while let Some(w) = queue.pop_front() {
        queued[w] = false;
        let lw = labels[w].clone().expect("queued nodes carry labels");
        for &e in inst.in_edges(w) {
            let v = inst.edge(e).tail;
            if v == t {
                continue;
            }
            let cand = lw.plus(&costs[e]);
            let next = match &labels[v] {
                None => Some(cand),
                Some(cur) if cand.below_somewhere(cur) => Some(cur.min(&cand)),
                Some(_) => None,
            };
            if let Some(env) = next {
                labels[v] = Some(env);
                if !queued[v] {
                    queued[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    labels
}

fn check_piece(inst: &Instance, f: &FlowOverTime, queues: &[(Q, Q)], a: &Q, b: &Q) -> Vec<(EdgeId, IdeViolation)> {
    let len = b - a;
    let flowing: Vec<EdgeId> = (0..inst.edges().len())
        .filter(|&e| f.inflow[e].eval(a).is_positive())
        .collect();
    if flowing.is_empty() {
        return Vec::new();
    }
    let costs: Vec<Env> = inst
        .edges()
        .iter()
        .zip(queues)
        .map(|(edge, (q0, dq))| Env::linear(&len, &(&edge.tau + q0 / &edge.nu), &(dq / &edge.nu)))
        .collect();
    let labels = piece_labels(inst, &costs);
    let mut out = Vec::new();
    for e in flowing {
        let edge = inst.edge(e);
        let id = edge.id.clone();
        let lv = &labels[edge.tail];
        let lw = &labels[edge.head];
        let (Some(lv), Some(lw)) = (lv, lw) else {
            let mid = (&len) / q(2);
            out.push((
                e,
                IdeViolation {
                    edge: id,
                    from: a.clone(),
                    to: b.clone(),
                    label_v: lv.as_ref().map(|l| l.eval(&mid)),
                    label_w_plus_c: lw.as_ref().map(|l| l.eval(&mid) + costs[e].eval(&mid)),
                },
            ));
            continue;
        };
        let rhs = lw.plus(&costs[e]);
        let grid = merge_grid(&rhs, lv);
        let gap: Vec<Q> = grid.iter().map(|s| rhs.eval(s) - lv.eval(s)).collect();
        for i in 0..grid.len().saturating_sub(1) {
            if !(gap[i].is_positive() || gap[i + 1].is_positive()) {
                continue;
            }
            let from = a + &grid[i];
            let to = a + &grid[i + 1];
            if let Some((_, last)) = out.last_mut().filter(|(le, v): &&mut (EdgeId, IdeViolation)| *le == e && v.to == from) {
                last.to = to;
                continue;
            }
            let mid = (&grid[i] + &grid[i + 1]) / q(2);
            out.push((
                e,
                IdeViolation {
                    edge: id.clone(),
                    from,
                    to,
                    label_v: Some(lv.eval(&mid)),
                    label_w_plus_c: Some(rhs.eval(&mid)),
                },
            ));
        }
    }
    out
}

/// Verifies the IDE condition: every edge with positive inflow rate is active,
/// i.e. `ℓ_v(θ) = ℓ_w(θ) + c_e(θ)`, checked exactly on `[start, horizon)`.
pub fn check_ide(inst: &Instance, f: &FlowOverTime) -> Result<IdeReport, DynamicsError> {
    let d = derive(inst, f)?;
    let mut cuts: Vec<Q> = vec![f.start.clone(), f.horizon.clone()];
    for (e, ed) in d.edges.iter().enumerate() {
        cuts.extend(f.inflow[e].breakpoints().iter().cloned());
        cuts.extend(ed.queue.breakpoints().iter().cloned());
    }
    cuts.retain(|t| *t >= f.start && *t <= f.horizon);
    cuts.sort();
    cuts.dedup();
    let pieces: Vec<(Q, Q)> = cuts.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
    let found: Vec<Vec<(EdgeId, IdeViolation)>> = pieces
        .par_iter()
        .map(|(a, b)| {
            let queues: Vec<(Q, Q)> = d
                .edges
                .iter()
                .map(|ed| (ed.queue.eval(a), ed.queue.slope_right(a)))
                .collect();
            check_piece(inst, f, &queues, a, b)
        })
        .collect();
    let mut per_edge: Vec<Vec<IdeViolation>> = vec![Vec::new(); inst.edges().len()];
    for (e, v) in found.into_iter().flatten() {
        let list = &mut per_edge[e];
        match list.last_mut() {
            Some(last) if last.to == v.from => last.to = v.to,
            _ => list.push(v),
        }
    }
    let mut violations: Vec<IdeViolation> = per_edge.into_iter().flatten().collect();
    violations.sort_by(|x, y| x.from.cmp(&y.from).then_with(|| x.edge.cmp(&y.edge)));
    Ok(IdeReport {
        pieces_checked: pieces.len(),
        violations,
    })
}
