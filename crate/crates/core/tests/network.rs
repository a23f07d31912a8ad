use ide_flows::network::{
    blocking_gadget, dist_to_sink, example_fig1, from_json_str, is_acyclic, load, longest_path_tau, poa_epsilon,
    poa_instance, reaches_sink, save, slow_termination, tau_blocking, tau_cycling, tau_e_last,
    tau_path_blocking, to_json_string, total_tau, u_kl, GadgetParams, InstanceBuilder, Rule, Severity,
};
use ide_flows::stepfn::{q, ratio, StepFunction};

#[test]
fn fig1_shape() {
    let g = example_fig1();
    assert_eq!(g.node_count(), 4);
    assert_eq!(g.edges().len(), 5);
    assert_eq!(g.total_volume(), q(7));
    assert_eq!(total_tau(&g), q(7));
    assert_eq!(g.theta0(), q(2));
    assert_eq!(g.min_capacity(), Some(q(1)));
    assert!(g.validate().is_empty());
    assert!(!is_acyclic(&g));
    let d = dist_to_sink(&g);
    assert_eq!(d[g.node_index("s1").unwrap()], Some(q(3)));
    assert_eq!(d[g.node_index("v").unwrap()], Some(q(2)));
    assert_eq!(d[g.sink()], Some(q(0)));
}

#[test]
fn validation_flags_bad_instances() {
    let mut b = InstanceBuilder::new();
    let s = b.node("s");
    let lone = b.node("lone");
    let t = b.node("t");
    b.edge("st", s, t, q(1), q(0));
    b.inflow(lone, StepFunction::indicator(q(0), q(1), q(1)));
    let g = b.build(t).unwrap();
    let v = g.validate();
    assert!(v.iter().any(|x| x.rule == Rule::NonPositiveCapacity && x.subject == "st"));
    assert!(v
        .iter()
        .any(|x| x.rule == Rule::SinkUnreachable && x.subject == "lone" && x.severity == Severity::Error));
    assert_eq!(reaches_sink(&g), vec![true, false, true]);

    let mut b = InstanceBuilder::new();
    let s = b.node("s");
    let t = b.node("t");
    b.edge("st", s, t, q(0), q(1));
    b.edge("st", s, s, q(1), q(1));
    b.inflow(s, StepFunction::from_pieces([(q(0), q(1))]));
    b.inflow(t, StepFunction::indicator(q(0), q(1), q(1)));
    let rules: Vec<Rule> = b.build(t).unwrap().validate().into_iter().map(|x| x.rule).collect();
    for r in [
        Rule::NonPositiveTravelTime,
        Rule::SelfLoop,
        Rule::DuplicateEdgeId,
        Rule::UnboundedInflow,
        Rule::InflowAtSink,
    ] {
        assert!(rules.contains(&r), "{r:?} missing from {rules:?}");
    }
}

#[test]
fn builder_rejects_unknown_and_duplicate_nodes() {
    let mut b = InstanceBuilder::new();
    b.node("a");
    b.node("a");
    assert!(b.build(0).is_err());
    let mut b = InstanceBuilder::new();
    b.node("a");
    assert!(b.build(3).is_err());
}

#[test]
fn normalization_shifts_inflows() {
    let mut b = InstanceBuilder::new();
    let s = b.node("s");
    let t = b.node("t");
    b.edge("st", s, t, q(1), q(1));
    b.inflow(s, StepFunction::indicator(q(3), q(5), q(1)));
    let g = b.build(t).unwrap();
    let (n, off) = g.normalize_time_origin();
    assert_eq!(off, q(-3));
    assert_eq!(n.inflow(s).unwrap(), &StepFunction::indicator(q(0), q(2), q(1)));
    assert_eq!(n.total_volume(), g.total_volume());
    let (same, zero) = n.normalize_time_origin();
    assert_eq!(zero, q(0));
    assert_eq!(same, n);
}

#[test]
fn longest_path_on_single_edge() {
    let mut b = InstanceBuilder::new();
    let s = b.node("s");
    let t = b.node("t");
    b.edge("st", s, t, q(5), q(1));
    let g = b.build(t).unwrap();
    assert_eq!(longest_path_tau(&g), (q(5), true));
    let (_, exact) = longest_path_tau(&example_fig1());
    assert!(!exact);
}

#[test]
fn smallest_blocking_gadget() {
    let b = blocking_gadget(1, 1).unwrap();
    assert_eq!(b.node_count(), 4);
    assert_eq!(b.edges().len(), 3);
    assert_eq!(total_tau(&b), q(3));
    assert!(b.fragment().is_some());
    assert!(!b.is_runnable());
    assert!(blocking_gadget(1, 2).is_err());
    assert!(blocking_gadget(2, 0).is_err());
}

#[test]
fn blocking_tau_matches_recursion() {
    for kk in 1..=3 {
        for k in 1..=kk {
            let g = blocking_gadget(kk, k).unwrap();
            assert_eq!(total_tau(&g), tau_blocking(kk, k), "K={kk} k={k}");
            assert_eq!(g.fragment().unwrap().entries.len(), 3usize.pow(k));
            assert!(is_acyclic(&g));
            // Every port-to-port path has the same closed-form length.
            let (lp, exact) = longest_path_tau(&g);
            assert!(exact);
            assert_eq!(lp, tau_path_blocking(kk, k), "K={kk} k={k}");
        }
    }
}

#[test]
fn slow_termination_totals() {
    for (k, l) in [(1, 1), (1, 2), (2, 1)] {
        let p = GadgetParams::new(k, l).unwrap();
        let g = slow_termination(p);
        assert!(g.validate().is_empty());
        assert_eq!(g.total_volume(), u_kl(p));
        assert_eq!(g.theta0(), q(0));
        assert_eq!(g.earliest_time(), ratio(-1, 2));
        let n = 3i64.pow(k);
        let p3 = q(3i64.pow(k + 1));
        let shortcuts = (0..k).fold(q(0), |acc, j| acc + q(3i64.pow(k - j)) * q(3i64.pow(j + 1)));
        // Cycling part, blocking part, connectors e_1..e_n, e_0 and e_last.
        let expected = q(9 * n + 1 + 2) + shortcuts + tau_blocking(k, k) + q(n) * (&p3 - q(5)) + q(1) + tau_e_last(k);
        assert_eq!(total_tau(&g), expected, "K={k} L={l}");
        let cycling_part = &expected - tau_blocking(k, k) - q(n) * (&p3 - q(5)) - q(1) - tau_e_last(k);
        assert_eq!(cycling_part, tau_cycling(k));
    }
    assert!(GadgetParams::new(0, 1).is_err());
}

#[test]
fn poa_instance_shape() {
    let p = GadgetParams::new(1, 2).unwrap();
    let g = poa_instance(p);
    assert!(g.validate().is_empty());
    let eps = poa_epsilon(p);
    assert!(eps > q(0) && eps <= ratio(1, 2));
    let vt = g.edge(g.edge_index("v->t").unwrap());
    assert_eq!((vt.tau.clone(), vt.nu.clone()), (q(1), q(1)));
    let s = g.node_index("s").unwrap();
    let vol = g.inflow(s).unwrap().integral(&q(-5), &q(5));
    assert_eq!(g.total_volume(), vol.clone());
    assert_eq!(vol, (q(2) * u_kl(p) + q(1)) * (ratio(1, 2) + &eps));
    assert_eq!(g.inflows().len(), 1);
    assert_eq!(g.earliest_time(), ratio(-1, 2) - eps);
}

#[test]
fn json_roundtrip_and_errors() {
    let g = poa_instance(GadgetParams::new(1, 1).unwrap());
    let s = to_json_string(&g);
    assert_eq!(from_json_str(&s).unwrap(), g);

    let path = std::env::temp_dir().join(format!("ide_flows_net_{}.json", std::process::id()));
    save(&example_fig1(), &path).unwrap();
    assert_eq!(load(&path).unwrap(), example_fig1());
    std::fs::remove_file(&path).unwrap();
    assert!(load(&path).is_err());

    let half = r#"{"nodes":["s","t"],"edges":[{"id":"st","tail":"s","head":"t","tau":"1/2","nu":"0"}],
        "sink":"t","inflows":{"s":{"breakpoints":["0","1"],"values":["1","0"]}}}"#;
    let g = from_json_str(half).unwrap();
    assert_eq!(g.edge(0).tau, ratio(1, 2));
    assert!(g.validate().iter().any(|v| v.rule == Rule::NonPositiveCapacity));

    assert!(from_json_str(r#"{"nodes":["s"],"edges":[],"sink":"x"}"#).is_err());
    assert!(from_json_str(r#"{"nodes":["t"],"edges":[],"sink":"t","extra":1}"#).is_err());
    assert!(from_json_str("{").is_err());
}
