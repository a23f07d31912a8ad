use super::{IdeTrace, Phase};
use crate::dynamics::FlowOverTime;
use crate::network::Instance;
use crate::stepfn::{format_q, q, StepFunction, Q};
use num::Signed;
use serde_json::{json, Map, Value};

fn phase_json(inst: &Instance, p: &Phase) -> Value {
    let mut obj = Map::new();
    obj.insert("start".into(), json!(format_q(&p.start)));
    obj.insert("end".into(), json!(format_q(&p.end)));
    obj.insert("event".into(), serde_json::to_value(p.event).expect("enum"));
    if let Some(ls) = &p.labels {
        let labels: Map<String, Value> = ls
            .labels
            .iter()
            .enumerate()
            .map(|(v, l)| (inst.node_name(v).to_string(), l.as_ref().map_or(Value::Null, |x| json!(format_q(x)))))
            .collect();
        let derivs: Map<String, Value> = ls
            .derivs
            .iter()
            .enumerate()
            .map(|(v, l)| (inst.node_name(v).to_string(), l.as_ref().map_or(Value::Null, |x| json!(format_q(x)))))
            .collect();
        obj.insert("labels".into(), Value::Object(labels));
        obj.insert("label_derivatives".into(), Value::Object(derivs));
        obj.insert(
            "active_edges".into(),
            json!(ls.active.iter().map(|&e| inst.edge(e).id.clone()).collect::<Vec<_>>()),
        );
    }
    let rates: Map<String, Value> = p
        .rates
        .iter()
        .map(|(e, x)| (inst.edge(*e).id.clone(), json!(format_q(x))))
        .collect();
    let slopes: Map<String, Value> = p
        .queue_slopes
        .iter()
        .map(|(e, x)| (inst.edge(*e).id.clone(), json!(format_q(x))))
        .collect();
    obj.insert("allocations".into(), Value::Object(rates));
    obj.insert("queue_slopes".into(), Value::Object(slopes));
    Value::Object(obj)
}

impl IdeTrace {
    /// Trace export: stop reason, phase list and resulting flow.
    pub fn to_json_value(&self, inst: &Instance) -> Value {
        json!({
            "stop": self.stop,
            "phase_count": self.phases.len(),
            "phases": self.phases.iter().map(|p| phase_json(inst, p)).collect::<Vec<_>>(),
            "flow": self.flow.to_json_value(inst),
        })
    }

    pub fn to_json_string(&self, inst: &Instance) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value(inst)).expect("serializable");
        s.push('\n');
        s
    }

    /// Rebuilds the flow from the phase list alone: inflows are the phase
    /// rates, outflows follow from replayed queues and the discharge rule.
    pub fn reconstruct_flow(&self, inst: &Instance) -> FlowOverTime {
        let m = inst.edges().len();
        let mut queues = vec![q(0); m];
        let mut ins: Vec<Vec<(Q, Q)>> = vec![Vec::new(); m];
        let mut outs: Vec<Vec<(Q, Q)>> = vec![Vec::new(); m];
        for p in &self.phases {
            for (e, edge) in inst.edges().iter().enumerate() {
                let x = p.rate(e);
                let out = if queues[e].is_positive() || x >= edge.nu {
                    edge.nu.clone()
                } else {
                    x.clone()
                };
                push_change(&mut ins[e], p.start.clone(), x);
                push_change(&mut outs[e], &p.start + &edge.tau, out);
                queues[e] += p.queue_slope(e) * (&p.end - &p.start);
            }
        }
        if self.terminated() {
            for list in ins.iter_mut() {
                push_change(list, self.flow.horizon.clone(), q(0));
            }
        }
        let start = self.phases.first().map_or_else(|| self.flow.start.clone(), |p| p.start.clone());
        FlowOverTime {
            start,
            horizon: self.phases.last().map_or_else(|| self.flow.horizon.clone(), |p| p.end.clone()),
            inflow: ins.into_iter().map(StepFunction::from_pieces).collect(),
            outflow: outs.into_iter().map(StepFunction::from_pieces).collect(),
        }
    }
}

fn push_change(list: &mut Vec<(Q, Q)>, at: Q, rate: Q) {
    let last = list.last().map_or_else(|| q(0), |p| p.1.clone());
    if last != rate {
        list.push((at, rate));
    }
}

/// Extracts the flow from either a bare flow JSON or a trace JSON (`"flow"` key).
pub fn flow_from_json(v: Value, inst: &Instance) -> Result<FlowOverTime, crate::dynamics::FlowParseError> {
    match v {
        Value::Object(mut obj) if obj.contains_key("phases") => {
            let flow = obj.remove("flow").unwrap_or(Value::Null);
            FlowOverTime::from_json_value(flow, inst)
        }
        other => FlowOverTime::from_json_value(other, inst),
    }
}
