use super::{derive, fmt, DerivedState, DynamicsError, FlowOverTime};
use crate::network::Instance;
use crate::stepfn::{integral_of_product, q, StepFunction, Q};

/// First time at or after `θ₀` at which the network is empty; `None` if that
/// does not happen within the horizon.
pub fn makespan(inst: &Instance, d: &DerivedState) -> Option<Q> {
    let from = inst.theta0().max(d.start.clone());
    d.f_delta.first_root_at_or_after(&from, Some(&d.horizon))
}

/// Net arrival rate at the sink, `Z'`.
pub fn arrival_rate(inst: &Instance, f: &FlowOverTime) -> StepFunction {
    let t = inst.sink();
    StepFunction::signed_sum(
        inst.in_edges(t)
            .iter()
            .map(|&e| (&f.outflow[e], false))
            .chain(inst.out_edges(t).iter().map(|&e| (&f.inflow[e], true))),
    )
}

/// The three expressions for total travel time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TravelTime {
    pub value: Q,
    /// `Σ_e ∫ c_e f⁺_e`.
    pub by_costs: Q,
    /// `∫ θ Z'(θ) − Σ_v ∫ θ u_v(θ)`.
    pub by_arrivals: Q,
    /// `∫ F^Δ`.
    pub by_volume: Q,
}

fn moment_of_inflows(inst: &Instance) -> Q {
    inst.inflows()
        .values()
        .map(|u| u.moment().expect("bounded inflow"))
        .fold(q(0), |a, b| a + b)
}

/// Total travel time of a terminating flow, computed three ways and required to agree.
pub fn total_travel_time(inst: &Instance, f: &FlowOverTime) -> Result<TravelTime, DynamicsError> {
    let d = derive(inst, f)?;
    let end = makespan(inst, &d).ok_or(DynamicsError::NotTerminated)?;
    let start = &d.start;
    let mut by_costs = q(0);
    let mut per_edge = Vec::with_capacity(inst.edges().len());
    for (i, e) in inst.edges().iter().enumerate() {
        let mass = f.inflow[i].integral(start, &end);
        let waiting = integral_of_product(&d.edges[i].queue, &f.inflow[i], start, &end);
        let cost = &e.tau * mass + waiting / &e.nu;
        per_edge.push(cost.clone());
        by_costs += cost;
    }
    let z_rate = arrival_rate(inst, f);
    let by_arrivals = z_rate.moment().ok_or(DynamicsError::NotTerminated)? - moment_of_inflows(inst);
    let by_volume = d.f_delta.integral(start, &end);
    if by_costs != by_arrivals || by_costs != by_volume {
        let residuals = inst
            .edges()
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let rhs = f.outflow[i].moment().unwrap_or_else(|| q(0)) - f.inflow[i].moment().unwrap_or_else(|| q(0));
                (e.id.clone(), fmt(&(&per_edge[i] - rhs)))
            })
            .collect();
        return Err(DynamicsError::TravelTimeMismatch {
            by_costs: fmt(&by_costs),
            by_arrivals: fmt(&by_arrivals),
            by_volume: fmt(&by_volume),
            residuals,
        });
    }
    Ok(TravelTime {
        value: by_costs.clone(),
        by_costs,
        by_arrivals,
        by_volume,
    })
}

/// Total delay `∫ θ Z'(θ) dθ` of a terminating flow.
pub fn total_delay(inst: &Instance, f: &FlowOverTime) -> Result<Q, DynamicsError> {
    arrival_rate(inst, f).moment().ok_or(DynamicsError::NotTerminated)
}

/// Residual of the volume identity for node set `w` at time `t`:
/// `Σ_{E(W)} load − (Σ_{δ⁻W} F⁻ + Σ_W U_v − Σ_{δ⁺W} F⁺ − [t∈W]·Z)`.
pub fn volume_identity_residual(inst: &Instance, d: &DerivedState, w: &[bool], t: &Q) -> Q {
    let mut lhs = q(0);
    let mut rhs = q(0);
    for (i, e) in inst.edges().iter().enumerate() {
        match (w[e.tail], w[e.head]) {
            (true, true) => lhs += d.edges[i].load.eval(t),
            (false, true) => rhs += d.edges[i].f_minus.eval(t),
            (true, false) => rhs -= d.edges[i].f_plus.eval(t),
            (false, false) => {}
        }
    }
    for (v, inside) in w.iter().enumerate() {
        if *inside {
            rhs += d.cumulative_inflow(v, t);
        }
    }
    if w[inst.sink()] {
        rhs -= d.z.eval(t);
    }
    lhs - rhs
}
