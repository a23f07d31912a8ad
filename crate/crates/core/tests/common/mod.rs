#![allow(dead_code)]

use ide_flows::dynamics::FlowOverTime;
use ide_flows::engine::{simulate, FixedSplitPolicy};
use ide_flows::network::random::{random_instance, RandomSpec};
use ide_flows::stepfn::{q, ratio, Q};
use ide_flows::{compute_ide, IdeOptions, Instance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_instance(seed: u64, acyclic: bool) -> Instance {
    instance_with(seed, acyclic, seed.is_multiple_of(2))
}

pub fn instance_with(seed: u64, acyclic: bool, integer_capacities: bool) -> Instance {
    let mut r = rng(seed);
    let spec = RandomSpec {
        nodes: 3 + (seed % 4) as usize,
        edge_prob: 0.45,
        acyclic,
        integer_capacities,
    };
    random_instance(&mut r, &spec)
}

pub fn ide_flow(inst: &Instance) -> FlowOverTime {
    let tr = compute_ide(inst, &IdeOptions::default()).expect("engine run");
    assert!(tr.terminated(), "engine run did not terminate");
    tr.flow
}

/// Feasible flow under random time-varying splits; usually not an IDE.
pub fn random_split_flow(inst: &Instance, seed: u64) -> FlowOverTime {
    let mut r = rng(seed ^ 0x5eed);
    let start = inst.earliest_time().min(q(0));
    let until = inst.theta0() + q(4);
    let mut policy = FixedSplitPolicy::random(&mut r, inst, &start, &until, &ratio(1, 2));
    let out = simulate(inst, &mut policy, &q(10_000), 100_000).expect("split run");
    out.flow
}

/// Random rational in `[a, b]` on a grid of 1/16.
pub fn rand_time<R: rand::Rng>(r: &mut R, a: &Q, b: &Q) -> Q {
    let steps = ((b - a) * q(16)).floor().to_integer();
    let steps: i64 = steps.try_into().unwrap_or(0);
    a + ratio(r.gen_range(0..=steps.max(0)), 16)
}
