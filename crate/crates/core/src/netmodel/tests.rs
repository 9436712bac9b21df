use super::*;

fn node(s: &Scenario, id: &str) -> usize {
    s.network.node_by_id(id).unwrap()
}

fn labels(s: &Scenario, od: usize) -> Vec<String> {
    s.ods[od].routes.iter().map(|r| r.label.join(" ")).collect()
}

#[test]
fn sioux_falls_counts() {
    let s = build_sioux_falls();
    assert_eq!(s.signal_agents.len(), 17);
    assert_eq!(s.routing_agents.len(), 12);
    assert_eq!(s.ods.len(), 26);
    assert_eq!(s.control_steps(), 720);
    assert_eq!(s.transition_s, 5);
    let priority = s.network.nodes.iter().filter(|n| n.kind == NodeKind::Priority).count();
    assert_eq!(priority, 7);
    // 38 two-way roads plus 7 gateway connectors.
    assert_eq!(s.network.edges.len(), 2 * (38 + 7));
}

#[test]
fn sioux_falls_rows() {
    let s = build_sioux_falls();
    let od = &s.ods[2];
    assert_eq!(s.node_id(od.origin), "1");
    assert_eq!(s.node_id(od.destination), "7");
    assert_eq!(od.peak_vph, 360.0);
    assert_eq!(labels(&s, 2), ["1 3 4 5 6 8 7", "1 3 4 5 9 8 7"]);
    assert_eq!(od.declared_ras, ["RA1"]);

    let od = &s.ods[12];
    assert_eq!(od.peak_vph, 480.0);
    assert_eq!(od.routes.len(), 3);
    assert_eq!(od.declared_ras, ["RA6", "RA7"]);
}

#[test]
fn sioux_falls_layout_classes() {
    let s = build_sioux_falls();
    let mut by_approaches = std::collections::BTreeMap::<usize, Vec<&str>>::new();
    for &v in &s.signal_agents {
        let n = &s.network.nodes[v];
        by_approaches.entry(n.inbound.len()).or_default().push(&n.id);
    }
    assert_eq!(by_approaches[&4], ["3", "5", "8", "11", "23"]);
    assert_eq!(by_approaches[&5], ["10"]);
    assert_eq!(by_approaches[&3].len(), 11);
    for &v in &s.signal_agents {
        let n = &s.network.nodes[v];
        assert_eq!(n.phases.len(), n.inbound.len(), "node {}", n.id);
    }
}

#[test]
fn sioux_falls_total_peak_matches_hand_sum() {
    let s = build_sioux_falls();
    // Hand sum of the 26 peak flows.
    let rows = [
        240, 240, 360, 360, 120, 120, 240, 240, 360, 120, 360, 240, 480, 360, 120, 240, 240, 360, 240, 360,
        240, 240, 180, 120, 360, 240,
    ];
    assert_eq!(rows.len(), 26);
    assert_eq!(s.total_peak_vph(), rows.iter().sum::<i32>() as f64);
    assert_eq!(s.total_peak_vph(), 6780.0);
}

#[test]
fn four_way_phases_follow_the_split() {
    let s = build_sioux_falls();
    let v = node(&s, "8");
    let net = &s.network;
    let phases = &net.nodes[v].phases;
    assert_eq!(phases.len(), 4);
    let from = |m: usize| net.nodes[net.edges[net.movements[m].from_edge].from].id.as_str();
    let turn = |m: usize| net.movements[m].turn;
    // Node 8: 6 to the north, 16 to the south, 9 west, 7 east.
    for &m in &phases[0].movements {
        assert!(["6", "16"].contains(&from(m)) && turn(m) != Turn::Left);
    }
    for &m in &phases[1].movements {
        assert!(["6", "16"].contains(&from(m)) && turn(m) == Turn::Left);
    }
    for &m in &phases[2].movements {
        assert!(["7", "9"].contains(&from(m)) && turn(m) != Turn::Left);
    }
    for &m in &phases[3].movements {
        assert!(["7", "9"].contains(&from(m)) && turn(m) == Turn::Left);
    }
    let total: usize = phases.iter().map(|p| p.movements.len()).sum();
    assert_eq!(total, 12);
}

#[test]
fn turns_follow_right_hand_traffic() {
    let s = build_sioux_falls();
    let net = &s.network;
    let mv = |u: &str, v: &str, w: &str| {
        let (u, v, w) = (node(&s, u), node(&s, v), node(&s, w));
        let m = net.movement(net.edge_between(u, v).unwrap(), net.edge_between(v, w).unwrap()).unwrap();
        net.movements[m].clone()
    };
    // Southbound into 8 from 6: west (9) is a right turn, east (7) a left.
    assert_eq!(mv("6", "8", "9").turn, Turn::Right);
    assert_eq!(mv("6", "8", "7").turn, Turn::Left);
    assert_eq!(mv("6", "8", "16").turn, Turn::Through);
    // Left turns get lane 0, through and right share lane 1.
    assert_eq!(mv("6", "8", "7").lane, 0);
    assert_eq!(mv("6", "8", "16").lane, 1);
    assert_eq!(mv("6", "8", "9").lane, 1);
}

#[test]
fn no_phase_holds_a_conflict() {
    for text in [SIOUX_FALLS_TOML, MINI_TOML, EXAMPLE_GRID_TOML] {
        let s = Scenario::from_toml(text).unwrap();
        for n in &s.network.nodes {
            for p in &n.phases {
                for (i, &a) in p.movements.iter().enumerate() {
                    for &b in &p.movements[i + 1..] {
                        assert!(!s.network.conflict(a, b));
                    }
                }
            }
        }
    }
}

#[test]
fn crossing_throughs_conflict() {
    let s = build_sioux_falls();
    let net = &s.network;
    let m = |u: &str, v: &str, w: &str| {
        let (u, v, w) = (node(&s, u), node(&s, v), node(&s, w));
        net.movement(net.edge_between(u, v).unwrap(), net.edge_between(v, w).unwrap()).unwrap()
    };
    assert!(net.conflict(m("6", "8", "16"), m("9", "8", "7")));
    assert!(!net.conflict(m("6", "8", "16"), m("16", "8", "6")));
    assert!(net.conflict(m("6", "8", "7"), m("16", "8", "6")));
    // Two movements into the same exit always conflict.
    assert!(net.conflict(m("6", "8", "9"), m("16", "8", "9")));
}

#[test]
fn routes_are_closed_by_gateways() {
    let s = build_sioux_falls();
    let r = &s.ods[2].routes[0];
    let ids: Vec<&str> = r.nodes.iter().map(|&v| s.node_id(v)).collect();
    assert_eq!(ids, ["X1", "1", "3", "4", "5", "6", "8", "7", "X7"]);
    assert_eq!(r.edges.len(), 8);
    assert_eq!(r.movements.len(), 7);
    // 300 / 13.9 = 21.58 -> 22 ticks per edge.
    assert_eq!(r.free_flow_ticks, 8 * 22);
}

#[test]
fn predefined_route_prefers_shorter_then_first_listed() {
    let s = build_sioux_falls();
    // Both routes of row 3 have 7 interior edges.
    assert_eq!(s.ods[2].predefined, 0);
    // Row 13: route 2 has four edges, the others five.
    assert_eq!(s.ods[12].predefined, 1);
    let mini = Scenario::from_toml(MINI_TOML).unwrap();
    assert_eq!(mini.ods[0].predefined, 0);
}

#[test]
fn sioux_falls_placements_match_table() {
    let s = build_sioux_falls();
    let expected = [
        ("RA1", 3, "5"),
        ("RA2", 4, "3"),
        ("RA3", 9, "6"),
        ("RA4", 9, "10"),
        ("RA5", 11, "5"),
        ("RA6", 13, "5"),
        ("RA7", 13, "10"),
        ("RA8", 14, "8"),
        ("RA9", 14, "6"),
        ("RA10", 18, "13"),
        ("RA11", 23, "11"),
        ("RA12", 25, "22"),
    ];
    for (ra, (name, row, fork)) in s.routing_agents.iter().zip(expected) {
        assert_eq!(ra.name, name);
        assert_eq!(ra.od + 1, row);
        assert_eq!(s.node_id(ra.fork_node), fork);
    }
    // RA6 forks at its own origin and watches the gateway connector.
    let ra6 = &s.routing_agents[5];
    let e = &s.network.edges[ra6.upstream_edge];
    assert_eq!((s.node_id(e.from), s.node_id(e.to)), ("X5", "5"));
}

#[test]
fn example_grid_placements() {
    let s = Scenario::from_toml(EXAMPLE_GRID_TOML).unwrap();
    let ras = &s.routing_agents;
    assert_eq!(ras.len(), 3);
    let edge = |ra: &RaPlacement| {
        let e = &s.network.edges[ra.upstream_edge];
        (s.node_id(e.from).to_string(), s.node_id(e.to).to_string())
    };
    assert_eq!(edge(&ras[0]), ("O1".into(), "I1".into()));
    assert_eq!(ras[0].routes, [0, 1, 2]);
    assert_eq!(edge(&ras[1]), ("I1".into(), "I2".into()));
    assert_eq!(ras[1].routes, [0, 1]);
    assert_eq!(edge(&ras[2]), ("O2".into(), "I2".into()));
}

#[test]
fn every_feasible_route_uses_the_upstream_edge() {
    for text in [SIOUX_FALLS_TOML, MINI_TOML, EXAMPLE_GRID_TOML] {
        let s = Scenario::from_toml(text).unwrap();
        for ra in &s.routing_agents {
            for &r in &ra.routes {
                let route = &s.ods[ra.od].routes[r];
                assert_eq!(route.edges[ra.upstream_pos()], ra.upstream_edge);
                assert_eq!(route.nodes[ra.fork_depth], ra.fork_node);
            }
        }
    }
}

#[test]
fn placement_is_idempotent() {
    let s = build_sioux_falls();
    assert_eq!(place_routing_agents(&s), s.routing_agents);
    assert_eq!(place_routing_agents(&s), place_routing_agents(&s));
}

#[test]
fn downstream_hops_start_at_zero() {
    let s = Scenario::from_toml(EXAMPLE_GRID_TOML).unwrap();
    let ra2 = &s.routing_agents[1];
    let hops = |a: &str, b: &str| {
        let e = s.network.edge_between(node(&s, a), node(&s, b)).unwrap();
        ra2.downstream.iter().find(|d| d.edge == e).map(|d| d.hops)
    };
    assert_eq!(hops("I2", "I3"), Some(0));
    assert_eq!(hops("I2", "I5"), Some(0));
    assert_eq!(hops("I3", "I6"), Some(1));
    assert_eq!(hops("I6", "D1"), Some(2));
    assert_eq!(hops("I1", "I4"), None);
}

#[test]
fn single_route_od_has_no_agent() {
    let s = build_sioux_falls();
    assert!(s.routing_agents.iter().all(|ra| s.ods[ra.od].routes.len() > 1));
}

fn mini_doc() -> ScenarioDoc {
    ScenarioDoc::parse(MINI_TOML).unwrap()
}

#[test]
fn unknown_route_node_is_rejected() {
    let mut doc = mini_doc();
    doc.demand.od[1].routes = vec!["NA 99".into()];
    let err = Scenario::from_doc(&doc, String::new()).unwrap_err();
    assert!(err.to_string().contains("unknown node"), "{err}");
}

#[test]
fn empty_demand_is_rejected() {
    let mut doc = mini_doc();
    doc.demand.od.clear();
    doc.demand.expected_total_peak_vph = None;
    let err = Scenario::from_doc(&doc, String::new()).unwrap_err();
    assert!(err.to_string().contains("no demand"), "{err}");
}

#[test]
fn mismatched_declared_agents_are_rejected() {
    let mut doc = mini_doc();
    doc.demand.od[0].ras.clear();
    assert!(Scenario::from_doc(&doc, String::new()).is_err());
}

#[test]
fn peak_sum_guard() {
    let mut doc = mini_doc();
    doc.demand.od[0].peak_vph = 1000.0;
    let err = Scenario::from_doc(&doc, String::new()).unwrap_err();
    assert!(err.to_string().contains("total peak flow"), "{err}");
}

#[test]
fn validate_routes_reports_each_violation() {
    let doc = ScenarioDoc::parse(SIOUX_FALLS_TOML).unwrap();
    assert!(validate_routes(&doc).is_empty());

    let mut bad = doc.clone();
    bad.demand.od[0].routes = vec!["1 6 2".into()];
    let d = validate_routes(&bad);
    assert_eq!(d.len(), 1);
    assert!(d[0].message.contains("no road"), "{}", d[0]);

    let mut bad = doc.clone();
    bad.demand.od[1].routes = vec!["1 3 4".into()];
    let d = validate_routes(&bad);
    assert_eq!(d.len(), 1);
    assert!(d[0].message.contains("destination"), "{}", d[0]);
    assert_eq!((d[0].od, d[0].route), (2, 1));
}

#[test]
fn episode_must_be_a_whole_number_of_steps() {
    let mut doc = mini_doc();
    doc.agents.episode_s = 3602;
    assert!(Scenario::from_doc(&doc, String::new()).is_err());
}

#[test]
fn flow_ratio_lookups() {
    let s = build_sioux_falls();
    let horizon = s.episode_s as f64;
    let constant = FlowProfile::constant(9, 1.0, horizon);
    assert_eq!(flow_ratio(&constant, 1000.0, horizon).unwrap(), 1.0);
    assert_eq!(flow_ratio(s.profile(1), 900.0, horizon).unwrap(), 1.0);
    assert_eq!(flow_ratio(s.profile(2), 1800.0, horizon).unwrap(), 1.0);
    assert_eq!(flow_ratio(s.profile(3), 2700.0, horizon).unwrap(), 1.0);
    assert!((flow_ratio(s.profile(1), 450.0, horizon).unwrap() - 0.7).abs() < 1e-12);
    assert_eq!(flow_ratio(s.profile(4), 10.0, horizon).unwrap(), 0.7);
    assert!(matches!(
        flow_ratio(s.profile(1), 3600.0, horizon),
        Err(ScenarioError::OutOfHorizon { .. })
    ));
    assert!(flow_ratio(s.profile(1), -1.0, horizon).is_err());
}

#[test]
fn demand_is_peak_times_ratio() {
    let s = build_sioux_falls();
    // Row 1 is 240 veh/h on the type-1 profile: 0.4 at t = 0.
    assert!((s.demand_vph(0, 0.0) - 96.0).abs() < 1e-9);
    let half = FlowProfile::constant(1, 0.5, 3600.0);
    assert_eq!(240.0 * half.ratio_at(100.0), 120.0);
}

#[test]
fn document_round_trips() {
    let doc = ScenarioDoc::parse(SIOUX_FALLS_TOML).unwrap();
    let back = ScenarioDoc::parse(&doc.to_toml()).unwrap();
    assert_eq!(doc, back);
}

#[test]
fn load_missing_file_reports_path() {
    let err = load_scenario("/nonexistent/scenario.toml").unwrap_err();
    assert!(err.to_string().contains("/nonexistent/scenario.toml"));
}
