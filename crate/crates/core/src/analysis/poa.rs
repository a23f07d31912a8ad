use super::{opt_makespan_bounds, opt_travel_time_lower, termination_certificate, theta_hat, AnalysisError};
use super::{TerminationCertificate, ThetaHat};
use crate::dynamics::{derive, makespan, total_travel_time};
use crate::engine::{compute_ide, IdeOptions, StopReason};
use crate::network::Instance;
use crate::stepfn::{serde_q, Q};
use serde::Serialize;

/// IDE against OPT on one instance. Ratios divide the IDE value by an OPT
/// upper bound, so they are certified lower bounds on the price of anarchy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PoAReport {
    pub instance: String,
    pub stop: StopReason,
    pub phases: usize,
    #[serde(with = "serde_q::opt")]
    pub ide_makespan: Option<Q>,
    #[serde(with = "serde_q::opt")]
    pub ide_travel_time: Option<Q>,
    #[serde(with = "serde_q")]
    pub delta: Q,
    #[serde(with = "serde_q")]
    pub opt_makespan_lower: Q,
    #[serde(with = "serde_q")]
    pub opt_makespan_upper: Q,
    #[serde(with = "serde_q")]
    pub opt_travel_time_lower: Q,
    #[serde(with = "serde_q")]
    pub opt_travel_time_upper: Q,
    #[serde(with = "serde_q::opt")]
    pub makespan_ratio_lower: Option<Q>,
    #[serde(with = "serde_q::opt")]
    pub travel_ratio_lower: Option<Q>,
    /// Upper bounds every IDE obeys on this instance.
    pub bounds: ThetaHat,
    #[serde(with = "serde_q")]
    pub travel_time_ceiling: Q,
    pub certificate: Option<TerminationCertificate>,
    pub notes: Vec<String>,
}

/// Runs the engine, the OPT bounds at grid step `delta` and the termination
/// certificate. A run that does not terminate yields no ratios.
pub fn poa_report(inst: &Instance, name: &str, opts: &IdeOptions, delta: &Q) -> Result<PoAReport, AnalysisError> {
    let trace = compute_ide(inst, opts)?;
    let opt = opt_makespan_bounds(inst, delta)?;
    let bounds = theta_hat(inst);
    let mut notes = Vec::new();
    let (ide_makespan, ide_travel_time, certificate) = if trace.terminated() {
        let d = derive(inst, &trace.flow)?;
        let mk = makespan(inst, &d);
        let psi = total_travel_time(inst, &trace.flow)?.value;
        (mk, Some(psi), Some(termination_certificate(inst, &trace)?))
    } else {
        notes.push(format!("IDE run stopped by {:?}; no ratio reported", trace.stop));
        (None, None, None)
    };
    let ratio = |num: &Option<Q>, den: &Q| -> Option<Q> {
        match num {
            Some(x) if *den > Q::from_integer(0.into()) => Some(x / den),
            _ => None,
        }
    };
    if opt.lower == opt.upper {
        notes.push("optimal makespan determined exactly by the grid bounds".into());
    }
    Ok(PoAReport {
        instance: name.to_string(),
        stop: trace.stop,
        phases: trace.phase_count(),
        makespan_ratio_lower: ratio(&ide_makespan, &opt.upper),
        travel_ratio_lower: ratio(&ide_travel_time, &opt.upper_travel_time),
        ide_makespan,
        ide_travel_time,
        delta: opt.delta.clone(),
        opt_makespan_lower: opt.lower,
        opt_makespan_upper: opt.upper,
        opt_travel_time_lower: opt_travel_time_lower(inst),
        opt_travel_time_upper: opt.upper_travel_time,
        travel_time_ceiling: bounds.travel_time_bound(),
        bounds,
        certificate,
        notes,
    })
}
