//! Static flow network over exact rationals: Dinic max flow and successive
//! shortest paths min-cost flow. `None` capacity means unbounded.

use crate::stepfn::{q, Q};
use num::{Signed, Zero};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

#[derive(Clone, Debug)]
struct Arc {
    to: usize,
    cap: Option<Q>,
    flow: Q,
    cost: i64,
}

impl Arc {
    fn residual(&self) -> Option<Q> {
        self.cap.as_ref().map(|c| c - &self.flow)
    }

    fn has_residual(&self) -> bool {
        self.residual().is_none_or(|r| r.is_positive())
    }
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Network {
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
}

fn min_opt(a: Option<Q>, b: Option<Q>) -> Option<Q> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

impl Network {
    pub fn new(n: usize) -> Self {
        Self {
            arcs: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    /// Adds an arc and its reverse; returns the forward arc index.
    pub fn add_arc(&mut self, from: usize, to: usize, cap: Option<Q>, cost: i64) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc {
            to,
            cap,
            flow: q(0),
            cost,
        });
        self.arcs.push(Arc {
            to: from,
            cap: Some(q(0)),
            flow: q(0),
            cost: -cost,
        });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    pub fn flow(&self, arc: usize) -> &Q {
        &self.arcs[arc].flow
    }

    fn push(&mut self, a: usize, amount: &Q) {
        self.arcs[a].flow += amount;
        self.arcs[a ^ 1].flow -= amount;
    }

    /// Dinic; stops once `limit` units have been sent.
    pub fn max_flow(&mut self, s: usize, t: usize, limit: &Q) -> Q {
        let n = self.adj.len();
        let mut total = q(0);
        while total < *limit {
            let mut level = vec![usize::MAX; n];
            level[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &a in &self.adj[v] {
                    let w = self.arcs[a].to;
                    if level[w] == usize::MAX && self.arcs[a].has_residual() {
                        level[w] = level[v] + 1;
                        queue.push_back(w);
                    }
                }
            }
            if level[t] == usize::MAX {
                break;
            }
            let mut next = vec![0usize; n];
            loop {
                let want = limit - &total;
                let pushed = self.blocking(s, t, Some(want), &level, &mut next);
                if pushed.is_zero() {
                    break;
                }
                total += pushed;
                if total >= *limit {
                    break;
                }
            }
        }
        total
    }

    /// One augmenting path in the level graph (iterative DFS with arc pointers).
    fn blocking(&mut self, s: usize, t: usize, want: Option<Q>, level: &[usize], next: &mut [usize]) -> Q {
        let mut path: Vec<usize> = Vec::new();
        let mut v = s;
        loop {
            if v == t {
                let bottleneck = path
                    .iter()
                    .fold(want.clone(), |acc, &a| min_opt(acc, self.arcs[a].residual()))
                    .expect("source arcs are bounded");
                for &a in &path {
                    self.push(a, &bottleneck);
                }
                return bottleneck;
            }
            let mut advanced = false;
            while next[v] < self.adj[v].len() {
                let a = self.adj[v][next[v]];
                let w = self.arcs[a].to;
                if level[w] == level[v] + 1 && self.arcs[a].has_residual() {
                    path.push(a);
                    v = w;
                    advanced = true;
                    break;
                }
                next[v] += 1;
            }
            if !advanced {
                if v == s {
                    return q(0);
                }
                let a = path.pop().expect("nonempty path");
                v = self.arcs[a ^ 1].to;
                next[v] += 1;
            }
        }
    }

    /// Min-cost flow of value up to `limit` by successive shortest paths with
    /// potentials. Costs must be nonnegative. Returns the amount sent.
    pub fn min_cost_flow(&mut self, s: usize, t: usize, limit: &Q) -> Q {
        let n = self.adj.len();
        let mut pot = vec![0i64; n];
        let mut total = q(0);
        while total < *limit {
            let mut dist = vec![i64::MAX; n];
            let mut via = vec![usize::MAX; n];
            dist[s] = 0;
            let mut heap = BinaryHeap::from([Reverse((0i64, s))]);
            while let Some(Reverse((d, v))) = heap.pop() {
                if d > dist[v] {
                    continue;
                }
                for &a in &self.adj[v] {
                    let arc = &self.arcs[a];
                    if !arc.has_residual() {
                        continue;
                    }
                    let w = arc.to;
                    let nd = d + arc.cost + pot[v] - pot[w];
                    if nd < dist[w] {
                        dist[w] = nd;
                        via[w] = a;
                        heap.push(Reverse((nd, w)));
                    }
                }
            }
            if dist[t] == i64::MAX {
                break;
            }
            for v in 0..n {
                if dist[v] != i64::MAX {
                    pot[v] += dist[v];
                }
            }
            let mut path = Vec::new();
            let mut v = t;
            while v != s {
                let a = via[v];
                path.push(a);
                v = self.arcs[a ^ 1].to;
            }
            let bottleneck = path
                .iter()
                .filter_map(|&a| self.arcs[a].residual())
                .fold(limit - &total, |m, r| m.min(r));
            for &a in &path {
                self.push(a, &bottleneck);
            }
            total += bottleneck;
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepfn::ratio;

    #[test]
    fn dinic_matches_cut() {
        let mut n = Network::new(4);
        n.add_arc(0, 1, Some(q(3)), 0);
        n.add_arc(0, 2, Some(ratio(5, 2)), 0);
        n.add_arc(1, 2, None, 0);
        n.add_arc(1, 3, Some(q(2)), 0);
        n.add_arc(2, 3, Some(q(3)), 0);
        assert_eq!(n.max_flow(0, 3, &q(100)), q(5));
    }

    #[test]
    fn min_cost_prefers_cheap_arcs() {
        let mut n = Network::new(3);
        let cheap = n.add_arc(0, 1, Some(q(1)), 1);
        let dear = n.add_arc(0, 1, Some(q(5)), 4);
        n.add_arc(1, 2, None, 0);
        assert_eq!(n.min_cost_flow(0, 2, &q(2)), q(2));
        assert_eq!(n.flow(cheap), &q(1));
        assert_eq!(n.flow(dear), &q(1));
    }
}
