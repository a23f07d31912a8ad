use crate::network::Instance;
use crate::stepfn::{q, serde_q, StepFunction, Q};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Edge inflow and outflow rates over `[start, horizon]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowOverTime {
    pub start: Q,
    pub horizon: Q,
    pub inflow: Vec<StepFunction>,
    pub outflow: Vec<StepFunction>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlowParseError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("flow references unknown edge {0:?}")]
    UnknownEdge(String),
    #[error("flow misses edge {0:?}")]
    MissingEdge(String),
}

#[derive(Serialize, Deserialize)]
pub(crate) struct FlowFile {
    #[serde(with = "serde_q")]
    start: Q,
    #[serde(with = "serde_q")]
    horizon: Q,
    edges: Vec<EdgeFlowFile>,
}

#[derive(Serialize, Deserialize)]
struct EdgeFlowFile {
    id: String,
    inflow: StepFunction,
    outflow: StepFunction,
}

impl FlowOverTime {
    /// The flow that never sends anything.
    pub fn zero(inst: &Instance) -> Self {
        let m = inst.edges().len();
        Self {
            start: inst.earliest_time().min(q(0)),
            horizon: inst.theta0(),
            inflow: vec![StepFunction::zero(); m],
            outflow: vec![StepFunction::zero(); m],
        }
    }

    /// True when every rate vanishes eventually.
    pub fn has_bounded_support(&self) -> bool {
        self.inflow.iter().chain(&self.outflow).all(|f| f.tail_value() == q(0))
    }

    pub(crate) fn to_file(&self, inst: &Instance) -> FlowFile {
        FlowFile {
            start: self.start.clone(),
            horizon: self.horizon.clone(),
            edges: inst
                .edges()
                .iter()
                .enumerate()
                .map(|(i, e)| EdgeFlowFile {
                    id: e.id.clone(),
                    inflow: self.inflow[i].clone(),
                    outflow: self.outflow[i].clone(),
                })
                .collect(),
        }
    }

    pub(crate) fn from_file(file: FlowFile, inst: &Instance) -> Result<Self, FlowParseError> {
        let m = inst.edges().len();
        let mut inflow: Vec<Option<StepFunction>> = vec![None; m];
        let mut outflow = vec![StepFunction::zero(); m];
        for ef in file.edges {
            let i = inst
                .edge_index(&ef.id)
                .ok_or_else(|| FlowParseError::UnknownEdge(ef.id.clone()))?;
            inflow[i] = Some(ef.inflow);
            outflow[i] = ef.outflow;
        }
        let inflow = inflow
            .into_iter()
            .enumerate()
            .map(|(i, f)| f.ok_or_else(|| FlowParseError::MissingEdge(inst.edge(i).id.clone())))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            start: file.start,
            horizon: file.horizon,
            inflow,
            outflow,
        })
    }

    /// JSON with one entry per edge, keyed by edge id, in instance order.
    pub fn to_json_value(&self, inst: &Instance) -> serde_json::Value {
        serde_json::to_value(self.to_file(inst)).expect("serializable")
    }

    pub fn from_json_value(v: serde_json::Value, inst: &Instance) -> Result<Self, FlowParseError> {
        let file: FlowFile = serde_json::from_value(v).map_err(|e| FlowParseError::Parse(e.to_string()))?;
        Self::from_file(file, inst)
    }

    pub fn to_json_string(&self, inst: &Instance) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file(inst)).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_json_str(s: &str, inst: &Instance) -> Result<Self, FlowParseError> {
        let file: FlowFile = serde_json::from_str(s).map_err(|e| FlowParseError::Parse(e.to_string()))?;
        Self::from_file(file, inst)
    }
}
