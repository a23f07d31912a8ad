use super::{Edge, Fragment, Instance, NetworkError};
use crate::stepfn::{serde_q, StepFunction, Q};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    nodes: Vec<String>,
    edges: Vec<EdgeFile>,
    sink: String,
    #[serde(default)]
    inflows: BTreeMap<String, StepFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fragment: Option<FragmentFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeFile {
    id: String,
    tail: String,
    head: String,
    #[serde(with = "serde_q")]
    tau: Q,
    #[serde(with = "serde_q")]
    nu: Q,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FragmentFile {
    entries: Vec<String>,
    exit: String,
}

fn to_file(inst: &Instance) -> InstanceFile {
    let name = |v: usize| inst.node_name(v).to_string();
    InstanceFile {
        nodes: inst.nodes().to_vec(),
        edges: inst
            .edges()
            .iter()
            .map(|e| EdgeFile {
                id: e.id.clone(),
                tail: name(e.tail),
                head: name(e.head),
                tau: e.tau.clone(),
                nu: e.nu.clone(),
            })
            .collect(),
        sink: name(inst.sink()),
        inflows: inst.inflows().iter().map(|(&v, f)| (name(v), f.clone())).collect(),
        fragment: inst.fragment().map(|fr| FragmentFile {
            entries: fr.entries.iter().map(|&v| name(v)).collect(),
            exit: name(fr.exit),
        }),
    }
}

fn from_file(file: InstanceFile) -> Result<Instance, NetworkError> {
    let index: BTreeMap<&str, usize> = file.nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let lookup = |name: &str, field: String| {
        index.get(name).copied().ok_or_else(|| NetworkError::UnknownNode {
            field,
            name: name.to_string(),
        })
    };
    let mut edges = Vec::with_capacity(file.edges.len());
    for (i, e) in file.edges.iter().enumerate() {
        edges.push(Edge {
            id: e.id.clone(),
            tail: lookup(&e.tail, format!("edges[{i}].tail"))?,
            head: lookup(&e.head, format!("edges[{i}].head"))?,
            tau: e.tau.clone(),
            nu: e.nu.clone(),
        });
    }
    let sink = lookup(&file.sink, "sink".into())?;
    let mut inflows = BTreeMap::new();
    for (name, f) in &file.inflows {
        inflows.insert(lookup(name, format!("inflows.{name}"))?, f.clone());
    }
    let fragment = match &file.fragment {
        None => None,
        Some(fr) => Some(Fragment {
            entries: fr
                .entries
                .iter()
                .enumerate()
                .map(|(i, n)| lookup(n, format!("fragment.entries[{i}]")))
                .collect::<Result<_, _>>()?,
            exit: lookup(&fr.exit, "fragment.exit".into())?,
        }),
    };
    let inst = Instance::new(file.nodes.clone(), edges, sink, inflows)?;
    Ok(match fragment {
        Some(fr) => inst.with_fragment(fr),
        None => inst,
    })
}

/// Canonical pretty-printed JSON (trailing newline included).
pub fn to_json_string(inst: &Instance) -> String {
    let mut s = serde_json::to_string_pretty(&to_file(inst)).expect("serializable");
    s.push('\n');
    s
}

/// Parses instance JSON; errors carry line/column and the offending field.
pub fn from_json_str(s: &str) -> Result<Instance, NetworkError> {
    let file: InstanceFile = serde_json::from_str(s).map_err(|e| NetworkError::Parse(e.to_string()))?;
    from_file(file)
}

pub fn save(inst: &Instance, path: impl AsRef<Path>) -> Result<(), NetworkError> {
    let path = path.as_ref();
    std::fs::write(path, to_json_string(inst)).map_err(|e| NetworkError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn load(path: impl AsRef<Path>) -> Result<Instance, NetworkError> {
    let path = path.as_ref();
    let s = std::fs::read_to_string(path).map_err(|e| NetworkError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    from_json_str(&s)
}
