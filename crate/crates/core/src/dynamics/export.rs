use super::DerivedState;
use crate::network::Instance;
use crate::stepfn::{decimal_string, format_q, PiecewiseLinear, Q};

/// A named time series of a derived state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Series {
    Queue(usize),
    Load(usize),
    FDelta,
    Z,
}

impl Series {
    /// Parses `q:<edge>`, `load:<edge>`, `F_delta` or `Z`.
    pub fn parse(inst: &Instance, s: &str) -> Option<Self> {
        match s {
            "F_delta" => Some(Series::FDelta),
            "Z" => Some(Series::Z),
            _ => {
                if let Some(id) = s.strip_prefix("q:") {
                    inst.edge_index(id).map(Series::Queue)
                } else if let Some(id) = s.strip_prefix("load:") {
                    inst.edge_index(id).map(Series::Load)
                } else {
                    None
                }
            }
        }
    }

    pub fn name(&self, inst: &Instance) -> String {
        match self {
            Series::Queue(e) => format!("q:{}", inst.edge(*e).id),
            Series::Load(e) => format!("load:{}", inst.edge(*e).id),
            Series::FDelta => "F_delta".into(),
            Series::Z => "Z".into(),
        }
    }

    fn function<'a>(&self, d: &'a DerivedState) -> &'a PiecewiseLinear {
        match self {
            Series::Queue(e) => &d.edges[*e].queue,
            Series::Load(e) => &d.edges[*e].load,
            Series::FDelta => &d.f_delta,
            Series::Z => &d.z,
        }
    }
}

/// CSV with a `time` column and one column per series, one row per breakpoint
/// of any series within `[start, horizon]`. With `exact`, every series gets a
/// `rational:<name>` sibling column.
pub fn time_series_csv(inst: &Instance, d: &DerivedState, series: &[Series], exact: bool) -> String {
    let mut times: Vec<Q> = vec![d.start.clone(), d.horizon.clone()];
    for s in series {
        times.extend(
            s.function(d)
                .breakpoints()
                .iter()
                .filter(|t| **t > d.start && **t < d.horizon)
                .cloned(),
        );
    }
    times.sort();
    times.dedup();
    let mut header = vec!["time".to_string()];
    if exact {
        header.push("rational:time".into());
    }
    for s in series {
        header.push(s.name(inst));
        if exact {
            header.push(format!("rational:{}", s.name(inst)));
        }
    }
    let mut out = header.join(",");
    out.push('\n');
    for t in &times {
        let mut row = vec![decimal_string(t, 12)];
        if exact {
            row.push(format_q(t));
        }
        for s in series {
            let v = s.function(d).eval(t);
            row.push(decimal_string(&v, 12));
            if exact {
                row.push(format_q(&v));
            }
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
