use qdsim::demos::*;

const TOL: f64 = 1e-10;

fn cfg(demo: Demo, scenario: Scenario, ground: bool) -> DemoConfig {
    DemoConfig { scenario, with_ground_prep: ground, ..DemoConfig::new(demo) }
}

#[test]
fn braid_demo_distributions() {
    for ground in [false, true] {
        for (sc, expect) in [(Scenario::Braid, [0.0, 0.0, 1.0]), (Scenario::NoBraid, [0.0, 1.0, 0.0]), (Scenario::Ground, [1.0, 0.0, 0.0])] {
            let r = run_demo(&cfg(Demo::Braid, sc, ground)).unwrap();
            for (k, p) in expect.iter().enumerate() {
                assert!((r.probability(&format!("|{k}>")) - p).abs() < TOL, "{sc} ground={ground}: {:?}", r.outcome_distribution);
            }
            assert_eq!(r.qudits, 4);
        }
    }
}

#[test]
fn fuse_demo_uses_six_qudits_and_matches_oracle() {
    for ground in [false, true] {
        for sc in [Scenario::Independent, Scenario::VacuumPair, Scenario::Ground] {
            let r = run_demo(&cfg(Demo::Fuse, sc, ground)).unwrap();
            assert_eq!(r.qudits, 6);
            let (p, o) = (r.vacuum_probability.unwrap(), r.oracle_vacuum_probability.unwrap());
            assert!((p - o).abs() < TOL, "{sc}: {p} vs {o}");
            if sc != Scenario::Independent {
                assert!((p - 1.0).abs() < TOL, "{sc}: {p}");
                assert_eq!(r.inferred_state, "vacuum after fusion");
            }
        }
    }
}

#[test]
fn ground_prep_does_not_change_distributions() {
    for (demo, sc) in [(Demo::Braid, Scenario::Braid), (Demo::Fuse, Scenario::Independent), (Demo::Fuse, Scenario::VacuumPair)] {
        let a = run_demo(&cfg(demo, sc, false)).unwrap();
        let b = run_demo(&cfg(demo, sc, true)).unwrap();
        for (k, p) in &a.outcome_distribution {
            assert!((p - b.probability(k)).abs() < TOL);
        }
    }
}

#[test]
fn sampled_agrees_with_exact_within_five_sigma() {
    let shots = 400;
    for (demo, sc) in [(Demo::Fuse, Scenario::Independent), (Demo::Braid, Scenario::Braid)] {
        let exact = run_demo(&cfg(demo, sc, true)).unwrap();
        let sampled = run_demo(&DemoConfig { shots: Shots::Count(shots), seed: 7, ..cfg(demo, sc, true) }).unwrap();
        assert_eq!(sampled.mode, "sampled");
        for (k, p) in &exact.outcome_distribution {
            let sigma = (p * (1.0 - p) / shots as f64).sqrt().max(1.0 / shots as f64);
            assert!((sampled.probability(k) - p).abs() <= 5.0 * sigma, "{k}: {} vs {p}", sampled.probability(k));
        }
    }
}

#[test]
fn sampled_runs_are_reproducible() {
    let c = DemoConfig { shots: Shots::Count(50), seed: 3, ..cfg(Demo::Fuse, Scenario::Independent, true) };
    let a = run_demo(&c).unwrap();
    let b = run_demo(&c).unwrap();
    assert_eq!(a.outcome_distribution, b.outcome_distribution);
}

#[test]
fn unreduced_runs_keep_duplicates_identical() {
    for (demo, sc) in [(Demo::Braid, Scenario::Braid), (Demo::Fuse, Scenario::Independent), (Demo::Fuse, Scenario::VacuumPair)] {
        for ground in [false, true] {
            let reduced = run_demo(&cfg(demo, sc, ground)).unwrap();
            let full = run_demo(&DemoConfig { check_reduction: true, ..cfg(demo, sc, ground) }).unwrap();
            assert_eq!(full.duplicates_identical, Some(true), "{sc} ground={ground}");
            assert_eq!(full.qudits, reduced.qudits + 2);
            for (k, p) in &reduced.outcome_distribution {
                assert!((p - full.probability(k)).abs() < TOL, "{sc} {k}");
            }
        }
    }
}

#[test]
fn report_serializes_with_version() {
    let r = run_demo(&cfg(Demo::Braid, Scenario::Braid, false)).unwrap();
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(v["schema_version"], REPORT_VERSION);
    assert_eq!(v["outcome_distribution"]["|2>"], 1.0);
    assert!(v.get("gate_counts").is_some());
    assert!(r.to_csv().starts_with("outcome,probability\n"));
    assert_eq!(r.inferred_state, "|1_R2>");
}

#[test]
fn scenario_mismatch_is_rejected() {
    assert!(run_demo(&cfg(Demo::Braid, Scenario::VacuumPair, false)).is_err());
}
