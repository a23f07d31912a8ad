//! Small random instances for property tests.

use super::{Instance, InstanceBuilder};
use crate::stepfn::{q, ratio, StepFunction};
use rand::Rng;

#[derive(Clone, Debug)]
pub struct RandomSpec {
    /// Total node count including the sink (at least 2).
    pub nodes: usize,
    /// Probability of each optional forward edge.
    pub edge_prob: f64,
    /// Forbid backward edges.
    pub acyclic: bool,
    /// Draw capacities from `{1, 2, 3}` only.
    pub integer_capacities: bool,
}

impl Default for RandomSpec {
    fn default() -> Self {
        Self {
            nodes: 5,
            edge_prob: 0.4,
            acyclic: false,
            integer_capacities: false,
        }
    }
}

/// Erdős–Rényi-style graph over a random spanning structure that reaches the
/// sink, with one or two sources carrying short piecewise-constant inflows.
pub fn random_instance<R: Rng>(rng: &mut R, spec: &RandomSpec) -> Instance {
    let n = spec.nodes.max(2);
    let mut b = InstanceBuilder::new();
    let ids: Vec<usize> = (0..n)
        .map(|i| b.node(if i == n - 1 { "t".to_string() } else { format!("n{i}") }))
        .collect();
    let t = ids[n - 1];
    let tau = |rng: &mut R| ratio(rng.gen_range(1..=6), 2);
    let nu = |rng: &mut R| {
        if spec.integer_capacities {
            q(rng.gen_range(1..=3))
        } else {
            ratio(rng.gen_range(1..=6), 2)
        }
    };
    let mut count = 0usize;
    let mut next_id = || {
        count += 1;
        format!("e{count}")
    };
    for i in 0..n - 1 {
        let j = rng.gen_range(i + 1..n);
        let (tt, nn) = (tau(rng), nu(rng));
        b.edge(next_id(), ids[i], ids[j], tt, nn);
        for j2 in i + 1..n {
            if j2 != j && rng.gen_bool(spec.edge_prob) {
                let (tt, nn) = (tau(rng), nu(rng));
                b.edge(next_id(), ids[i], ids[j2], tt, nn);
            }
        }
        if !spec.acyclic {
            for j2 in 0..i {
                if rng.gen_bool(spec.edge_prob / 2.0) {
                    let (tt, nn) = (tau(rng), nu(rng));
                    b.edge(next_id(), ids[i], ids[j2], tt, nn);
                }
            }
        }
    }
    let sources = rng.gen_range(1..=2.min(n - 1));
    let mut chosen: Vec<usize> = Vec::new();
    while chosen.len() < sources {
        let v = rng.gen_range(0..n - 1);
        if !chosen.contains(&v) {
            chosen.push(v);
        }
    }
    chosen.sort();
    for v in chosen {
        let mut start = ratio(rng.gen_range(0..=2), 2);
        let mut pieces = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            pieces.push((start.clone(), q(rng.gen_range(0..=4))));
            start += ratio(rng.gen_range(1..=3), 2);
        }
        if pieces.iter().all(|(_, r)| *r == q(0)) {
            pieces[0].1 = q(1);
        }
        pieces.push((start, q(0)));
        b.inflow(ids[v], StepFunction::from_pieces(pieces));
    }
    b.build(t).expect("random instance is well-formed")
}
