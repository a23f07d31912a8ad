use super::{fmt, FlowOverTime};
use crate::network::Instance;
use crate::stepfn::{q, ratio, PiecewiseLinear, Q};
use num::{Signed, Zero};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// Flow conservation at a non-sink node.
    Conservation,
    /// No net outflow from the sink.
    Sink,
    /// Outflow before the free-flow travel time elapsed.
    EarlyOutflow,
    /// Queue not discharged at the right rate.
    QueueDischarge,
    /// Negative edge rate.
    NegativeRate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FeasibilityViolation {
    pub constraint: Constraint,
    /// Node name or edge id.
    pub subject: String,
    pub from: String,
    pub to: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FeasibilityReport {
    pub pieces_checked: usize,
    pub violations: Vec<FeasibilityViolation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

struct Collector {
    out: Vec<FeasibilityViolation>,
}

impl Collector {
    fn push(&mut self, constraint: Constraint, subject: &str, a: &Q, b: &Q, lhs: &Q, rhs: &Q) {
        let (lhs, rhs) = (fmt(lhs), fmt(rhs));
        if let Some(last) = self.out.last_mut() {
            if last.constraint == constraint
                && last.subject == subject
                && last.to == fmt(a)
                && last.lhs == lhs
                && last.rhs == rhs
            {
                last.to = fmt(b);
                return;
            }
        }
        self.out.push(FeasibilityViolation {
            constraint,
            subject: subject.to_string(),
            from: fmt(a),
            to: fmt(b),
            lhs,
            rhs,
        });
    }
}

/// Verifies conservation, the sink condition, the free-flow delay and the
/// queue-discharge rule exactly on every piece of the common refinement of all
/// rate functions over `[start, horizon)`.
pub fn check_feasibility(inst: &Instance, f: &FlowOverTime) -> FeasibilityReport {
    let m = inst.edges().len();
    let mut c = Collector { out: Vec::new() };
    if f.inflow.len() != m || f.outflow.len() != m {
        c.push(
            Constraint::Conservation,
            "<flow>",
            &f.start,
            &f.horizon,
            &q(f.inflow.len() as i64),
            &q(m as i64),
        );
        return FeasibilityReport {
            pieces_checked: 0,
            violations: c.out,
        };
    }

    for (i, e) in inst.edges().iter().enumerate() {
        for g in [&f.inflow[i], &f.outflow[i]] {
            for (b, v) in g.breakpoints().iter().zip(g.values()) {
                if v.is_negative() {
                    let end = g.next_breakpoint_after(b).cloned().unwrap_or_else(|| f.horizon.clone());
                    c.push(Constraint::NegativeRate, &e.id, b, &end, v, &q(0));
                }
            }
        }
        let earliest = &f.start + &e.tau;
        if let Some(b) = f.outflow[i].left_bound() {
            if *b < earliest {
                let v = f.outflow[i].eval(b);
                c.push(Constraint::EarlyOutflow, &e.id, b, &earliest, &v, &q(0));
            }
        }
    }

    let mut pts: Vec<Q> = vec![f.start.clone(), f.horizon.clone()];
    let inside = |t: &Q| *t > f.start && *t < f.horizon;
    for (i, e) in inst.edges().iter().enumerate() {
        pts.extend(f.inflow[i].breakpoints().iter().filter(|t| inside(t)).cloned());
        for b in f.outflow[i].breakpoints() {
            if inside(b) {
                pts.push(b.clone());
            }
            let s = b - &e.tau;
            if inside(&s) {
                pts.push(s);
            }
        }
    }
    for u in inst.inflows().values() {
        pts.extend(u.breakpoints().iter().filter(|t| inside(t)).cloned());
    }
    pts.sort();
    pts.dedup();

    let queues: Vec<PiecewiseLinear> = (0..m)
        .map(|i| {
            f.inflow[i]
                .integrate()
                .sub(&f.outflow[i].integrate().shift(&-&inst.edge(i).tau))
        })
        .collect();
    let half = ratio(1, 2);
    let sink = inst.sink();
    let mut pieces = 0usize;
    for w in pts.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        pieces += 1;
        let fp: Vec<Q> = f.inflow.iter().map(|g| g.eval(a)).collect();
        let fm: Vec<Q> = f.outflow.iter().map(|g| g.eval(a)).collect();
        for v in 0..inst.node_count() {
            let out: Q = inst.out_edges(v).iter().fold(q(0), |s, &e| s + &fp[e]);
            let inn: Q = inst.in_edges(v).iter().fold(q(0), |s, &e| s + &fm[e]);
            let lhs = out - inn;
            if v == sink {
                if lhs.is_positive() {
                    c.push(Constraint::Sink, inst.node_name(v), a, b, &lhs, &q(0));
                }
            } else {
                let rhs = inst.inflow(v).map_or_else(|| q(0), |u| u.eval(a));
                if lhs != rhs {
                    c.push(Constraint::Conservation, inst.node_name(v), a, b, &lhs, &rhs);
                }
            }
        }
        let mid = (a + b) * &half;
        for (i, e) in inst.edges().iter().enumerate() {
            let out = f.outflow[i].eval(&(a + &e.tau));
            let qm = queues[i].eval(&mid);
            let expect = if qm.is_positive() {
                e.nu.clone()
            } else if fp[i] < e.nu {
                fp[i].clone()
            } else {
                e.nu.clone()
            };
            if out != expect {
                c.push(Constraint::QueueDischarge, &e.id, a, b, &out, &expect);
            }
        }
    }
    if f.has_bounded_support() {
        // Past the horizon all rates vanish, so no queue may remain there.
        for (i, e) in inst.edges().iter().enumerate() {
            if !queues[i].eval(&f.horizon).is_zero() {
                c.push(Constraint::QueueDischarge, &e.id, &f.horizon, &f.horizon, &q(0), &e.nu);
            }
        }
    }
    FeasibilityReport {
        pieces_checked: pieces,
        violations: c.out,
    }
}
