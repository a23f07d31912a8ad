use crate::{Failure, Outcome};
use anyhow::{anyhow, Context};
use ide_flows::analysis::{opt_makespan_bounds, poa_report, sink_like_check, AnalysisError, SinkLikeQuery};
use ide_flows::dynamics::{
    check_feasibility, derive, makespan, time_series_csv, total_delay, total_travel_time, Series,
};
use ide_flows::engine::{check_ide, flow_from_json, EngineError, StopReason};
use ide_flows::network::{
    blocking_gadget, example_fig1, load, poa_epsilon, poa_instance, slow_termination, to_json_string, total_tau,
    u_kl, GadgetParams, Severity,
};
use ide_flows::stepfn::{decimal_string, format_q, parse_q, Q};
use ide_flows::{compute_ide, IdeOptions, Instance};
use log::{info, warn};
use rayon::prelude::*;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

pub fn rational(s: &str, flag: &str) -> Result<Q, Failure> {
    parse_q(s).with_context(|| format!("{flag}: expected a rational like 3, 1/2 or 0.25")).map_err(Failure::from)
}

fn positive(x: Q, flag: &str) -> Result<Q, Failure> {
    if x > Q::from_integer(0.into()) {
        Ok(x)
    } else {
        Err(anyhow!("{flag} must be positive").into())
    }
}

fn qs(x: &Q) -> Value {
    json!(format_q(x))
}

fn opt_qs(x: &Option<Q>) -> Value {
    x.as_ref().map_or(Value::Null, qs)
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Loads an instance and rejects it when validation reports errors.
fn load_valid(path: &Path) -> Result<Instance, Failure> {
    let inst = load(path).with_context(|| format!("loading instance {}", path.display()))?;
    let mut errors = Vec::new();
    for v in inst.validate() {
        match v.severity {
            Severity::Error => errors.push(v.to_string()),
            Severity::Warning => warn!("{v}"),
        }
    }
    if !errors.is_empty() {
        return Err(anyhow!("invalid instance {}:\n  {}", path.display(), errors.join("\n  ")).into());
    }
    Ok(inst)
}

fn engine_failure(e: EngineError) -> Failure {
    match e {
        EngineError::NotRunnable | EngineError::InvalidInstance(_) => Failure::Input(e.into()),
        other => Failure::Violation(format!("engine error: {other}")),
    }
}

fn analysis_failure(e: AnalysisError) -> Failure {
    match e {
        AnalysisError::Engine(inner) => engine_failure(inner),
        AnalysisError::Precondition(_) | AnalysisError::Query(_) | AnalysisError::Cyclic => Failure::Input(e.into()),
        other => Failure::Violation(other.to_string()),
    }
}

pub fn gen(spec: &[String], output: Option<&Path>) -> Outcome {
    let nums = |expected: usize| -> Result<Vec<u32>, Failure> {
        let args = &spec[1..];
        if args.len() != expected {
            return Err(anyhow!("`{}` takes {expected} integer arguments", spec[0]).into());
        }
        args.iter()
            .map(|a| a.parse::<u32>().with_context(|| format!("bad integer {a:?}")).map_err(Failure::from))
            .collect()
    };
    let params = |v: Vec<u32>| GadgetParams::new(v[0], v[1]).map_err(|e| Failure::Input(e.into()));
    let mut extra = String::new();
    let inst = match spec[0].as_str() {
        "fig1" => {
            nums(0)?;
            example_fig1()
        }
        "blocking" => {
            let v = nums(2)?;
            blocking_gadget(v[0], v[1]).map_err(anyhow::Error::from)?
        }
        "slow-termination" => {
            let p = params(nums(2)?)?;
            extra = format!("U_KL {}\n", format_q(&u_kl(p)));
            slow_termination(p)
        }
        "poa" => {
            let p = params(nums(2)?)?;
            let (ukl, eps) = (u_kl(p), poa_epsilon(p));
            extra = format!(
                "U_KL {}\nepsilon {}\nU = (1/2 + {})(2*{} + 1)\n",
                format_q(&ukl),
                format_q(&eps),
                format_q(&eps),
                format_q(&ukl)
            );
            poa_instance(p)
        }
        other => {
            return Err(anyhow!("unknown generator {other:?}; use fig1, blocking K k, slow-termination K L or poa K L").into())
        }
    };
    let volume = inst.total_volume();
    let summary = format!(
        "nodes {}\nedges {}\nU {} ({})\n{extra}sum_tau {}\ntheta0 {}\nrunnable {}\n",
        inst.node_count(),
        inst.edges().len(),
        format_q(&volume),
        decimal_string(&volume, 6),
        format_q(&total_tau(&inst)),
        format_q(&inst.theta0()),
        inst.is_runnable(),
    );
    match output {
        Some(path) => {
            write(path, &to_json_string(&inst))?;
            print!("{summary}");
        }
        None => {
            print!("{}", to_json_string(&inst));
            eprint!("{summary}");
        }
    }
    Ok(())
}

fn default_series(inst: &Instance) -> Vec<Series> {
    let mut s = vec![Series::FDelta, Series::Z];
    s.extend((0..inst.edges().len()).map(Series::Queue));
    s
}

fn parse_series(inst: &Instance, names: &[String]) -> Result<Vec<Series>, Failure> {
    if names.is_empty() {
        return Ok(default_series(inst));
    }
    names
        .iter()
        .map(|n| {
            Series::parse(inst, n)
                .ok_or_else(|| Failure::Input(anyhow!("unknown series {n:?}; use F_delta, Z, q:<edge> or load:<edge>")))
        })
        .collect()
}

/// Simulates one instance into `out_dir` and returns its metrics.
fn simulate_one(
    path: &Path,
    opts: &IdeOptions,
    out_dir: &Path,
    series: &[String],
    exact: bool,
) -> Result<(Value, StopReason), Failure> {
    let inst = load_valid(path)?;
    let series = parse_series(&inst, series)?;
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let trace = compute_ide(&inst, opts).map_err(engine_failure)?;
    info!("{}: {} phases, stop {:?}", path.display(), trace.phase_count(), trace.stop);
    let d = derive(&inst, &trace.flow).map_err(|e| Failure::Violation(e.to_string()))?;
    let (mk, psi, delay) = if trace.terminated() {
        let psi = total_travel_time(&inst, &trace.flow).map_err(|e| Failure::Violation(e.to_string()))?;
        let delay = total_delay(&inst, &trace.flow).map_err(|e| Failure::Violation(e.to_string()))?;
        (makespan(&inst, &d), Some(psi.value), Some(delay))
    } else {
        (None, None, None)
    };
    let metrics = json!({
        "instance": path.file_stem().map(|s| s.to_string_lossy().into_owned()),
        "stop": trace.stop,
        "phase_count": trace.phase_count(),
        "start": qs(&trace.flow.start),
        "end": qs(&trace.flow.horizon),
        "volume": qs(&inst.total_volume()),
        "theta0": qs(&inst.theta0()),
        "makespan": opt_qs(&mk),
        "travel_time": opt_qs(&psi),
        "total_delay": opt_qs(&delay),
    });
    write(&out_dir.join("trace.json"), &trace.to_json_string(&inst))?;
    write(&out_dir.join("metrics.json"), &pretty(&metrics))?;
    write(&out_dir.join("series.csv"), &time_series_csv(&inst, &d, &series, exact))?;
    Ok((metrics, trace.stop))
}

fn cap_failure(stop: StopReason) -> Outcome {
    match stop {
        StopReason::Terminated => Ok(()),
        StopReason::Horizon => Err(Failure::Cap("horizon reached before the network emptied".into())),
        StopReason::MaxPhases => Err(Failure::Cap("phase limit reached before the network emptied".into())),
    }
}

pub fn simulate(input: &Path, opts: &IdeOptions, out_dir: &Path, series: &[String], exact: bool) -> Outcome {
    if !input.is_dir() {
        let (metrics, stop) = simulate_one(input, opts, out_dir, series, exact)?;
        print!("{}", pretty(&metrics));
        return cap_failure(stop);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(input)
        .with_context(|| format!("reading {}", input.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(anyhow!("no *.json instances in {}", input.display()).into());
    }
    let results: Vec<Result<(Value, StopReason), Failure>> = files
        .par_iter()
        .map(|f| {
            let stem = f.file_stem().expect("json file").to_string_lossy().into_owned();
            simulate_one(f, opts, &out_dir.join(stem), series, exact)
        })
        .collect();
    let mut worst: Outcome = Ok(());
    let mut summary = Vec::new();
    for (f, r) in files.iter().zip(results) {
        let name = f.display().to_string();
        let status = match r {
            Ok((metrics, stop)) => {
                let status = cap_failure(stop);
                summary.push(metrics);
                status
            }
            Err(e) => {
                summary.push(json!({ "instance": name, "error": describe(&e) }));
                Err(e)
            }
        };
        worst = pick_worse(worst, status);
    }
    print!("{}", pretty(&Value::Array(summary)));
    worst
}

fn describe(f: &Failure) -> String {
    match f {
        Failure::Violation(m) | Failure::Cap(m) => m.clone(),
        Failure::Input(e) => format!("{e:#}"),
    }
}

fn rank(o: &Outcome) -> u8 {
    match o {
        Ok(()) => 0,
        Err(Failure::Cap(_)) => 1,
        Err(Failure::Violation(_)) => 2,
        Err(Failure::Input(_)) => 3,
    }
}

fn pick_worse(a: Outcome, b: Outcome) -> Outcome {
    if rank(&b) > rank(&a) {
        b
    } else {
        a
    }
}

pub fn verify(input: &Path, flow_path: &Path) -> Outcome {
    let inst = load_valid(input)?;
    let text = std::fs::read_to_string(flow_path).with_context(|| format!("reading {}", flow_path.display()))?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", flow_path.display()))?;
    let flow = flow_from_json(value, &inst).with_context(|| format!("reading flow from {}", flow_path.display()))?;
    let feas = check_feasibility(&inst, &flow);
    let ide = if feas.is_feasible() {
        Some(check_ide(&inst, &flow).map_err(|e| Failure::Violation(e.to_string()))?)
    } else {
        None
    };
    let feasible = feas.is_feasible();
    let is_ide = ide.as_ref().map(|r| r.is_ide());
    let report = json!({
        "feasible": feasible,
        "feasibility": feas,
        "is_ide": is_ide,
        "ide": ide,
    });
    print!("{}", pretty(&report));
    if !feasible {
        return Err(Failure::Violation(format!("{} feasibility violation(s)", feas.violations.len())));
    }
    match ide {
        Some(r) if !r.is_ide() => Err(Failure::Violation(format!("{} IDE violation(s)", r.violations.len()))),
        _ => Ok(()),
    }
}

pub struct ScanArgs {
    pub path: PathBuf,
    pub step: Q,
    pub window: Q,
}

fn sink_like_scan(inst: &Instance, d: &ide_flows::DerivedState, scan: &ScanArgs) -> Result<String, Failure> {
    let step = positive(scan.step.clone(), "--scan-step")?;
    if scan.window < Q::from_integer(0.into()) {
        return Err(anyhow!("--scan-window must be nonnegative").into());
    }
    let nodes: Vec<usize> = (0..inst.node_count()).collect();
    let mut out = String::from("time,rational:time,vol,rational:vol,sink_like\n");
    let mut t = d.start.clone();
    while t <= d.horizon {
        let query = SinkLikeQuery {
            nodes: nodes.clone(),
            from: t.clone(),
            to: &t + &scan.window,
        };
        let r = sink_like_check(inst, d, &query).map_err(analysis_failure)?;
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            decimal_string(&t, 12),
            format_q(&t),
            decimal_string(&r.vol, 12),
            format_q(&r.vol),
            r.is_sink_like()
        ));
        t += &step;
    }
    Ok(out)
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned())
}

pub struct AnalyzeOutputs {
    pub scan: Option<ScanArgs>,
    /// Time series of the best OPT-candidate flow found on the grid.
    pub opt_csv: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

pub fn analyze(input: &Path, delta: &Q, opts: &IdeOptions, outputs: AnalyzeOutputs) -> Outcome {
    let AnalyzeOutputs { scan, opt_csv, report: output } = outputs;
    let delta = positive(delta.clone(), "--delta")?;
    let inst = load_valid(input)?;
    let report = poa_report(&inst, &stem(input), opts, &delta).map_err(analysis_failure)?;
    let trace = compute_ide(&inst, opts).map_err(engine_failure)?;
    let feas = check_feasibility(&inst, &trace.flow);
    let ide = check_ide(&inst, &trace.flow).map_err(|e| Failure::Violation(e.to_string()))?;
    let d = derive(&inst, &trace.flow).map_err(|e| Failure::Violation(e.to_string()))?;
    if let Some(scan) = &scan {
        write(&scan.path, &sink_like_scan(&inst, &d, scan)?)?;
    }
    if let Some(path) = &opt_csv {
        let bounds = opt_makespan_bounds(&inst, &delta).map_err(analysis_failure)?;
        let od = derive(&inst, &bounds.upper_flow).map_err(|e| Failure::Violation(e.to_string()))?;
        write(path, &time_series_csv(&inst, &od, &default_series(&inst), true))?;
    }
    let value = json!({
        "report": report,
        "verification": {
            "feasible": feas.is_feasible(),
            "feasibility_violations": feas.violations.len(),
            "is_ide": ide.is_ide(),
            "ide_violations": ide.violations.len(),
        },
    });
    match output {
        Some(p) => write(&p, &pretty(&value))?,
        None => print!("{}", pretty(&value)),
    }
    if !feas.is_feasible() || !ide.is_ide() {
        return Err(Failure::Violation("engine flow failed verification".into()));
    }
    cap_failure(trace.stop)
}

pub fn poa(input: &Path, delta: &Q, opts: &IdeOptions) -> Outcome {
    let delta = positive(delta.clone(), "--delta")?;
    let inst = load_valid(input)?;
    let report = poa_report(&inst, &stem(input), opts, &delta).map_err(analysis_failure)?;
    print!("{}", pretty(&serde_json::to_value(&report).map_err(anyhow::Error::from)?));
    cap_failure(report.stop)
}
