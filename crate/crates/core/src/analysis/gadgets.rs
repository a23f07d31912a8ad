use super::AnalysisError;
use crate::dynamics::derive;
use crate::engine::{compute_ide, IdeOptions};
use crate::network::{Instance, InstanceBuilder};
use crate::stepfn::{q, ratio, serde_q, PiecewiseLinear, StepFunction, Q};
use num::Signed;
use serde::Serialize;

fn scale3(k: u32) -> Q {
    q(3i64.pow(k))
}

fn staircase(theta0: &Q, k: u32, cuts: [Q; 6]) -> StepFunction {
    let s = scale3(k);
    let pieces = cuts
        .into_iter()
        .zip([1, 2, 3, 2, 1, 0])
        .map(|(c, v)| (theta0 + c * &s, q(v)));
    StepFunction::from_pieces(pieces)
}

fn polyline(theta0: &Q, k: u32, pts: &[(Q, i64)]) -> PiecewiseLinear {
    let s = scale3(k);
    let mut points = vec![(theta0.clone(), q(0))];
    points.extend(pts.iter().map(|(t, y)| (theta0 + t * &s, q(*y) * &s)));
    PiecewiseLinear::from_points(&points, q(0))
}

/// Lower inflow staircase: rates 1,2,3,2,1 on unit steps from `θ₀+3^k` to `θ₀+6·3^k`.
pub fn lower_drive(theta0: &Q, k: u32) -> StepFunction {
    staircase(theta0, k, [q(1), q(2), q(3), q(4), q(5), q(6)])
}

/// Upper inflow staircase with breakpoints `0.5, 1.5, 2.5, 5, 6, 7` (times `3^k`).
pub fn upper_drive(theta0: &Q, k: u32) -> StepFunction {
    staircase(theta0, k, [ratio(1, 2), ratio(3, 2), ratio(5, 2), q(5), q(6), q(7)])
}

/// Lower queue envelope, peak `4·3^k`.
pub fn queue_lower(theta0: &Q, k: u32) -> PiecewiseLinear {
    polyline(theta0, k, &[(q(2), 0), (q(3), 1), (q(4), 3), (q(5), 4), (q(6), 4), (q(10), 0)])
}

/// Upper queue envelope, peak `7·3^k`.
pub fn queue_upper(theta0: &Q, k: u32) -> PiecewiseLinear {
    polyline(
        theta0,
        k,
        &[(ratio(3, 2), 0), (ratio(5, 2), 1), (q(5), 6), (q(6), 7), (q(7), 7), (q(14), 0)],
    )
}

fn out_pulse(theta0: &Q, k: u32, from: Q, to: Q) -> StepFunction {
    let s = scale3(k);
    StepFunction::indicator(theta0 + from * &s + q(1), theta0 + to * &s + q(1), q(1))
}

fn max_on(g: &PiecewiseLinear, a: &Q, b: &Q) -> Q {
    -g.scale(&q(-1)).min_on(a, b)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EnvelopeReport {
    pub queue_within: bool,
    pub outflow_within: bool,
    /// Waiting time at most `0.5·3^k` on `[θ₀+2·3^k−1/2, θ₀+2·3^k]`.
    pub early_wait_small: bool,
    /// Waiting time at least `3.5·3^k` on `[θ₀+5·3^k−1/2, θ₀+5·3^k]`.
    pub late_wait_large: bool,
    /// Waiting time at most `6·3^k` on `[θ₀, θ₀+5·3^k]`.
    pub wait_capped: bool,
    /// `|q'| ≤ 2` throughout.
    pub slope_bounded: bool,
    #[serde(with = "serde_q")]
    pub peak_queue: Q,
    #[serde(with = "serde_q::opt")]
    pub outflow_start: Option<Q>,
    #[serde(with = "serde_q::opt")]
    pub outflow_end: Option<Q>,
}

impl EnvelopeReport {
    pub fn holds(&self) -> bool {
        self.queue_within
            && self.outflow_within
            && self.early_wait_small
            && self.late_wait_large
            && self.wait_capped
            && self.slope_bounded
    }
}

/// Drives an empty edge with `ν = τ = 1` by `drive` and checks queue and
/// outflow against the staircase envelopes for level `k`.
pub fn envelope_check_cap1_edge(drive: &StepFunction, k: u32, theta0: &Q) -> Result<EnvelopeReport, AnalysisError> {
    let lo = lower_drive(theta0, k);
    let hi = upper_drive(theta0, k);
    if !drive.sub(&lo).is_nonnegative() || !hi.sub(drive).is_nonnegative() {
        return Err(AnalysisError::Precondition(
            "drive is not between the lower and upper staircases".into(),
        ));
    }
    let mut b = InstanceBuilder::new();
    let v1 = b.node("v1");
    let v0 = b.node("v0");
    b.edge("e", v1, v0, q(1), q(1));
    b.inflow(v1, drive.clone());
    let inst = b.build(v0).expect("two-node instance");
    let trace = compute_ide(&inst, &IdeOptions::default())?;
    let d = derive(&inst, &trace.flow)?;
    let queue = &d.edges[0].queue;
    let out = &trace.flow.outflow[0];
    let s = scale3(k);
    let half = ratio(1, 2);
    let end = theta0 + q(14) * &s;
    let queue_within = queue.sub(&queue_lower(theta0, k)).min_on(theta0, &end) >= q(0)
        && queue_upper(theta0, k).sub(queue).min_on(theta0, &end) >= q(0);
    let outflow_within = out.sub(&out_pulse(theta0, k, q(1), q(10))).is_nonnegative()
        && out_pulse(theta0, k, half.clone(), q(14)).sub(out).is_nonnegative();
    let t2 = theta0 + q(2) * &s;
    let t5 = theta0 + q(5) * &s;
    let early_wait_small = max_on(queue, &(&t2 - &half), &t2) <= &half * &s;
    let late_wait_large = queue.min_on(&(&t5 - &half), &t5) >= ratio(7, 2) * &s;
    let wait_capped = max_on(queue, theta0, &t5) <= q(6) * &s;
    let slope = queue.derivative();
    let slope_bounded = slope.max_value() <= q(2) && slope.min_value() >= q(-2);
    Ok(EnvelopeReport {
        queue_within,
        outflow_within,
        early_wait_small,
        late_wait_large,
        wait_capped,
        slope_bounded,
        peak_queue: max_on(queue, theta0, &(&end + q(1))),
        outflow_start: out.left_bound().cloned(),
        outflow_end: out.support_end(),
    })
}

/// Observed and predicted edge inflows of the split gadget.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SplitReport {
    #[serde(with = "serde_q")]
    pub epsilon: Q,
    #[serde(with = "serde_q")]
    pub switch_time: Q,
    pub expected_uu: StepFunction,
    pub actual_uu: StepFunction,
    pub expected_uv: StepFunction,
    pub actual_uv: StepFunction,
    pub expected_pu: StepFunction,
    pub actual_pu: StepFunction,
}

impl SplitReport {
    pub fn matches(&self) -> bool {
        self.expected_uu == self.actual_uu && self.expected_uv == self.actual_uv && self.expected_pu == self.actual_pu
    }
}

/// The split gadget: supply `y` at `u` on `[θ₀−x, θ₀)`, edges `uu'` (capacity
/// `ν`) and `uv` (capacity `y`), with continuations `u'→t` and `v→t` whose
/// travel times differ by 1.
pub fn split_instance(y: &Q, nu: &Q, x: &Q, theta0: &Q) -> Instance {
    let mut b = InstanceBuilder::new();
    let u = b.node("u");
    let v = b.node("v");
    let up = b.node("u'");
    let t = b.node("t");
    b.edge("uu'", u, up, q(1), nu.clone());
    b.edge("uv", u, v, q(1), y.clone());
    b.edge("P_u", up, t, q(1), y.clone());
    b.edge("P_v", v, t, q(2), y.clone());
    b.inflow(u, StepFunction::indicator(theta0 - x, theta0.clone(), y.clone()));
    b.build(t).expect("four-node instance")
}

/// Runs the IDE engine on the split gadget and compares the inflows of `uu'`,
/// `uv` and `u'→t` with the predicted three-piece split.
pub fn flow_split_check(y: &Q, nu: &Q, x: &Q, theta0: &Q) -> Result<SplitReport, AnalysisError> {
    if !nu.is_positive() || y <= nu {
        return Err(AnalysisError::Precondition("need y > ν > 0".into()));
    }
    let eps = nu / (y - nu);
    if !(x.is_positive() && *x <= ratio(1, 2) && eps <= *x) {
        return Err(AnalysisError::Precondition("need 1/2 ≥ x ≥ ν/(y−ν)".into()));
    }
    let inst = split_instance(y, nu, x, theta0);
    let trace = compute_ide(&inst, &IdeOptions::default())?;
    let start = theta0 - x;
    let switch = &start + &eps;
    let (expected_uu, expected_uv) = if switch < *theta0 {
        (
            StepFunction::from_pieces([
                (start.clone(), y.clone()),
                (switch.clone(), nu.clone()),
                (theta0.clone(), q(0)),
            ]),
            StepFunction::indicator(switch.clone(), theta0.clone(), y - nu),
        )
    } else {
        (StepFunction::indicator(start.clone(), theta0.clone(), y.clone()), StepFunction::zero())
    };
    let expected_pu = StepFunction::indicator(&start + q(1), theta0 + q(2), nu.clone());
    let edge = |id: &str| inst.edge_index(id).expect("gadget edge");
    Ok(SplitReport {
        epsilon: eps,
        switch_time: switch,
        expected_uu,
        actual_uu: trace.flow.inflow[edge("uu'")].clone(),
        expected_uv,
        actual_uv: trace.flow.inflow[edge("uv")].clone(),
        expected_pu,
        actual_pu: trace.flow.inflow[edge("P_u")].clone(),
    })
}
