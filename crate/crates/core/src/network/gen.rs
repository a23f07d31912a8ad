use super::{Fragment, Instance, InstanceBuilder, NetworkError, NodeId};
use crate::stepfn::{q, ratio, StepFunction, Q};

/// Parameters `(K, L)` of the slow-termination and price-of-anarchy families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GadgetParams {
    pub k: u32,
    pub l: u32,
}

impl GadgetParams {
    pub fn new(k: u32, l: u32) -> Result<Self, NetworkError> {
        if k < 1 || l < 1 {
            return Err(NetworkError::Parameter(format!("need K >= 1 and L >= 1, got K={k}, L={l}")));
        }
        Ok(Self { k, l })
    }
}

fn pow3(e: i64) -> Q {
    if e >= 0 {
        q(3i64.pow(e as u32))
    } else {
        ratio(1, 3i64.pow((-e) as u32))
    }
}

fn pow3i(e: u32) -> usize {
    3usize.pow(e)
}

/// The four-node example: two routes of equal free-flow length from `s1`.
pub fn example_fig1() -> Instance {
    let mut b = InstanceBuilder::new();
    let s1 = b.node("s1");
    let v = b.node("v");
    let s2 = b.node("s2");
    let t = b.node("t");
    b.edge("s1v", s1, v, q(1), q(2));
    b.edge("s1t", s1, t, q(3), q(1));
    b.edge("vs2", v, s2, q(1), q(2));
    b.edge("s2t", s2, t, q(1), q(1));
    b.edge("s2s1", s2, s1, q(1), q(1));
    b.inflow(s1, StepFunction::indicator(q(0), q(1), q(3)));
    b.inflow(s2, StepFunction::indicator(q(1), q(2), q(4)));
    b.build(t).expect("static instance")
}

/// `U_{K,L}`.
pub fn u_kl(p: GadgetParams) -> Q {
    let (k, l) = (p.k as i64, p.l as i64);
    let p2 = pow3(k + 2);
    (q(l - 1) * (q(1) + &p2 + q(2 * k)) + q(4 * l) * &p2 + &p2 + q(1)) / q(2)
}

/// Travel time of the connecting edges `e'_{j'}` at level `k` of `B_{K,k}`.
fn tau_connector(kk: u32, k: u32) -> Q {
    let (kk, k) = (kk as i64, k as i64);
    pow3(kk + 1) + pow3(kk - k + 1) - pow3(kk - k)
}

/// Closed form `τ(P_j^k)` of a port-to-port path in `B_{K,k}`.
pub fn tau_path_blocking(kk: u32, k: u32) -> Q {
    let (kk, k) = (kk as i64, k as i64);
    q(k - 1) * (pow3(kk + 1) + q(1)) + q(1) - pow3(kk - k) + pow3(kk - 1)
}

/// Closed-form edge-length sum of `B_{K,k}`; exceeds [`tau_blocking`] by `(3^k - 3)/2`.
pub fn tau_blocking_closed_form(kk: u32, k: u32) -> Q {
    let kk = kk as i64;
    let sum = (1..=k as i64).fold(q(0), |acc, kp| {
        acc + q(4) * pow3(kp - 1) + (pow3(kp + 1) + q(2)) * pow3(kk - 1)
    });
    sum - q(11) * pow3(kk - 1) - q(1)
}

/// Edge-length sum of `B_{K,k}` by the construction's recursion.
pub fn tau_blocking(kk: u32, k: u32) -> Q {
    if k == 1 {
        return q(3);
    }
    pow3(k as i64) + pow3(k as i64 - 1) * tau_connector(kk, k) + tau_blocking(kk, k - 1)
}

/// `τ(C_K) = (3+K)·3^{K+1} + 3`.
pub fn tau_cycling(kk: u32) -> Q {
    q(3 + kk as i64) * pow3(kk as i64 + 1) + q(3)
}

/// Travel time of `e_{3^K+1}`: `τ_{e_1} + τ(P_1^K) + τ_{e_0}`.
pub fn tau_e_last(kk: u32) -> Q {
    pow3(kk as i64 + 1) - q(5) + tau_path_blocking(kk, kk) + q(1)
}

/// `ε = (4 + τ_{e_{3^K+1}}) / (2 U_{K,L})`.
pub fn poa_epsilon(p: GadgetParams) -> Q {
    (q(4) + tau_e_last(p.k)) / (q(2) * u_kl(p))
}

fn build_blocking(
    b: &mut InstanceBuilder,
    kk: u32,
    k: u32,
    entries: &[NodeId],
    exit: NodeId,
    prefix: &str,
) {
    if k == 1 {
        for &v in entries {
            b.arc(v, exit, q(1), q(1));
        }
        return;
    }
    let copies = pow3i(k - 1);
    let inner_prefix = format!("{prefix}b.");
    let mut inner_entries = Vec::with_capacity(copies);
    for j in 1..=copies {
        let w = b.node(format!("{prefix}w{j}"));
        for i in 0..3 {
            b.arc(entries[3 * (j - 1) + i], w, q(1), q(1));
        }
        let port = b.node(format!("{inner_prefix}v{j}"));
        b.edge(format!("{prefix}e'{j}"), w, port, tau_connector(kk, k), q(3));
        inner_entries.push(port);
    }
    build_blocking(b, kk, k - 1, &inner_entries, exit, &inner_prefix);
}

fn add_blocking(b: &mut InstanceBuilder, kk: u32, k: u32, prefix: &str) -> (Vec<NodeId>, NodeId) {
    let exit = b.node(format!("{prefix}v0"));
    let entries: Vec<NodeId> = (1..=pow3i(k)).map(|j| b.node(format!("{prefix}v{j}"))).collect();
    build_blocking(b, kk, k, &entries, exit, prefix);
    (entries, exit)
}

/// Blocking gadget `B_{K,k}` as a fragment with ports `v_1..v_{3^k}` and exit `v_0`.
/// The exit doubles as the sink so that the fragment validates.
pub fn blocking_gadget(kk: u32, k: u32) -> Result<Instance, NetworkError> {
    if k < 1 || k > kk {
        return Err(NetworkError::Parameter(format!("need 1 <= k <= K, got K={kk}, k={k}")));
    }
    let mut b = InstanceBuilder::new();
    let (entries, exit) = add_blocking(&mut b, kk, k, "");
    Ok(b.build(exit)?.with_fragment(Fragment { entries, exit }))
}

/// Node ids of the slow-termination network that later constructions attach to.
struct SlowTermination {
    builder: InstanceBuilder,
    sink: NodeId,
    entry: NodeId,
    cap: Q,
}

fn build_slow_termination(p: GadgetParams) -> SlowTermination {
    let kk = p.k;
    let n = pow3i(kk);
    let u_total = u_kl(p);
    let big = q(2) * &u_total;
    let mut b = InstanceBuilder::new();

    let u: Vec<NodeId> = (1..=n + 1).map(|j| b.node(format!("u_{j}"))).collect();
    let mut x: Vec<NodeId> = Vec::with_capacity(n + 1);
    for j in 1..=n {
        let (uj, vj, wj) = (u[j - 1], b.node(format!("v_{j}")), b.node(format!("w_{j}")));
        let up = b.node(format!("u'_{j}"));
        let vp = b.node(format!("v'_{j}"));
        let wp = b.node(format!("w'_{j}"));
        let xj = b.node(format!("x_{j}"));
        b.arc(uj, vj, q(1), big.clone());
        b.arc(vj, wj, q(1), big.clone());
        b.arc(wj, u[j], q(1), big.clone());
        b.arc(uj, up, q(1), q(3));
        b.arc(vj, vp, q(1), q(3));
        b.arc(wj, wp, q(1), q(3));
        b.arc(up, xj, q(1), q(1));
        b.arc(vp, xj, q(1), q(1));
        b.arc(wp, xj, q(1), q(1));
        x.push(xj);
    }
    let x_last = b.node(format!("x_{}", n + 1));
    x.push(x_last);
    for k in 0..kk {
        let step = pow3i(k);
        for j in 1..=pow3i(kk - k) {
            let (from, to) = (u[(j - 1) * step], u[j * step]);
            b.edge(
                format!("shortcut_{k}_{j}"),
                from,
                to,
                pow3(k as i64 + 1),
                big.clone(),
            );
        }
    }
    b.arc(u[n], x_last, q(2), q(1));
    b.arc(u[n], u[0], q(1), big.clone());

    let (entries, exit) = add_blocking(&mut b, kk, kk, "B.");
    let t = b.node("t");
    for j in 0..n {
        b.edge(format!("e_{}", j + 1), x[j], entries[j], pow3(kk as i64 + 1) - q(5), q(3));
    }
    b.edge("e_0", exit, t, q(1), q(3));
    b.edge(format!("e_{}", n + 1), x_last, t, tau_e_last(kk), q(1));
    SlowTermination {
        builder: b,
        sink: t,
        entry: u[n],
        cap: big,
    }
}

/// `G_{K,L}`: cycling gadget plus blocking gadget, inflow `2U·1_[−1/2, 0)` at `u_{3^K+1}`.
pub fn slow_termination(p: GadgetParams) -> Instance {
    let mut g = build_slow_termination(p);
    g.builder
        .inflow(g.entry, StepFunction::indicator(ratio(-1, 2), q(0), g.cap.clone()));
    g.builder.build(g.sink).expect("generated instance")
}

/// `G_{K,L}` with a source `s` whose direct route to `t` is slightly longer than
/// the detour via `v`.
pub fn poa_instance(p: GadgetParams) -> Instance {
    let mut g = build_slow_termination(p);
    let rate = &g.cap + q(1);
    let b = &mut g.builder;
    let s = b.node("s");
    let v = b.node("v");
    b.arc(s, v, q(1), rate.clone());
    b.arc(v, g.entry, q(1), rate.clone());
    b.arc(s, g.sink, q(3), rate.clone());
    b.arc(v, g.sink, q(1), q(1));
    let start = ratio(-1, 2) - poa_epsilon(p);
    b.inflow(s, StepFunction::indicator(start, q(0), rate));
    g.builder.build(g.sink).expect("generated instance")
}
