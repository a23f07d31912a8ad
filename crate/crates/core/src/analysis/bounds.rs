use super::AnalysisError;
use crate::dynamics::{derive, makespan, total_travel_time};
use crate::engine::IdeTrace;
use crate::network::{longest_path_tau, Instance};
use crate::stepfn::{q, serde_q, Q};
use num::Integer;
use serde::Serialize;

/// The termination time bound `θ̂` with its ingredients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThetaHat {
    #[serde(with = "serde_q")]
    pub value: Q,
    /// Total volume, divided by `ν_min` when some capacity is below 1.
    #[serde(with = "serde_q")]
    pub volume: Q,
    /// `Σ_e (τ_e + 1/(2ν_e))`.
    #[serde(with = "serde_q")]
    pub sigma: Q,
    #[serde(with = "serde_q")]
    pub tau_pmax: Q,
    /// False when `tau_pmax` is the `Στ_e` fallback on a cyclic graph.
    pub tau_pmax_exact: bool,
}

impl ThetaHat {
    /// `⌈3U⌉·U·(2τ(P_max) + Σ + 1)`.
    pub fn travel_time_bound(&self) -> Q {
        let u3 = q(3) * &self.volume;
        let ceil = Q::from_integer(u3.numer().div_ceil(u3.denom()));
        ceil * &self.volume * (q(2) * &self.tau_pmax + &self.sigma + q(1))
    }
}

/// `θ̂ = θ₀ + 2U Σ_e(τ_e + 1/(2ν_e)) + τ(P_max) + 1/2`.
pub fn theta_hat(inst: &Instance) -> ThetaHat {
    let mut volume = inst.total_volume();
    if let Some(nu_min) = inst.min_capacity() {
        if nu_min < q(1) {
            volume /= nu_min;
        }
    }
    let sigma = inst
        .edges()
        .iter()
        .fold(q(0), |acc, e| acc + &e.tau + q(1) / (q(2) * &e.nu));
    let (tau_pmax, tau_pmax_exact) = longest_path_tau(inst);
    let value = inst.theta0() + q(2) * &volume * &sigma + &tau_pmax + crate::stepfn::ratio(1, 2);
    ThetaHat {
        value,
        volume,
        sigma,
        tau_pmax,
        tau_pmax_exact,
    }
}

/// Both termination bounds set against a terminated run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TerminationCertificate {
    pub bound: ThetaHat,
    #[serde(with = "serde_q")]
    pub makespan: Q,
    #[serde(with = "serde_q")]
    pub travel_time: Q,
    #[serde(with = "serde_q")]
    pub travel_time_bound: Q,
}

/// Checks `makespan ≤ θ̂` and `Ψ ≤ ⌈3U⌉U(2τ(P_max)+Σ+1)` on a terminated trace.
/// A violation is reported as an error: it contradicts the bound and points to a bug.
pub fn termination_certificate(inst: &Instance, trace: &IdeTrace) -> Result<TerminationCertificate, AnalysisError> {
    if !trace.terminated() {
        return Err(AnalysisError::NotTerminated);
    }
    let d = derive(inst, &trace.flow)?;
    let mk = makespan(inst, &d).ok_or(AnalysisError::NotTerminated)?;
    let psi = total_travel_time(inst, &trace.flow)?.value;
    let bound = theta_hat(inst);
    let psi_bound = bound.travel_time_bound();
    if mk > bound.value {
        return Err(AnalysisError::BoundViolated(format!(
            "makespan {} exceeds {}",
            crate::stepfn::format_q(&mk),
            crate::stepfn::format_q(&bound.value)
        )));
    }
    if psi > psi_bound {
        return Err(AnalysisError::BoundViolated(format!(
            "travel time {} exceeds {}",
            crate::stepfn::format_q(&psi),
            crate::stepfn::format_q(&psi_bound)
        )));
    }
    Ok(TerminationCertificate {
        bound,
        makespan: mk,
        travel_time: psi,
        travel_time_bound: psi_bound,
    })
}
