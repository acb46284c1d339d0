//! Acceptance run: criteria 1-10 on the default configuration, one line each.
//!
//! Every suite runs once; criteria 7 and 8 share the solver suite, which
//! holds both the Eulerian identities and the flow-map checks on a run. The
//! suite times its flow-map part separately so each criterion is charged
//! for its own work.

use std::collections::BTreeMap;

use bml::cli_io::{run_suite, Fault, RunConfig, Suite, SuiteResult};

struct Criterion {
    id: u32,
    title: &'static str,
    budget_seconds: f64,
    /// (suite, margin keys; empty means every margin of the suite)
    parts: &'static [(Suite, &'static [&'static str])],
}

const SOLVER_EULERIAN: &[&str] = &["l1_identity", "positivity", "energy", "support", "tv_bitwise", "richardson_order"];
const SOLVER_LAGRANGIAN: &[&str] = &["flow_det_defect", "flow_gradient_bound", "flow_neumann_residual", "lagrangian_source"];

const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, title: "partition of unity and reconstruction", budget_seconds: 60.0, parts: &[(Suite::Partition, &[])] },
    Criterion { id: 2, title: "Bony identity", budget_seconds: 120.0, parts: &[(Suite::Bony, &[])] },
    Criterion { id: 3, title: "product-estimate corpus", budget_seconds: 300.0, parts: &[(Suite::Product, &[])] },
    Criterion { id: 4, title: "log-interpolation", budget_seconds: 120.0, parts: &[(Suite::LogInterp, &[])] },
    Criterion { id: 5, title: "heat smoothing", budget_seconds: 120.0, parts: &[(Suite::Heat, &[])] },
    Criterion { id: 6, title: "measure invariants", budget_seconds: 120.0, parts: &[(Suite::Measures, &[])] },
    Criterion { id: 7, title: "solver identities", budget_seconds: 600.0, parts: &[(Suite::Solver, SOLVER_EULERIAN)] },
    Criterion {
        id: 8,
        title: "Lagrangian suite",
        budget_seconds: 180.0,
        parts: &[(Suite::Flowmap, &[]), (Suite::Solver, SOLVER_LAGRANGIAN)],
    },
    Criterion { id: 9, title: "approximation ladder", budget_seconds: 900.0, parts: &[(Suite::Ladder, &[])] },
    Criterion { id: 10, title: "stability and determinism", budget_seconds: 900.0, parts: &[(Suite::Stability, &[])] },
];

fn charged_seconds(r: &SuiteResult, keys: &[&str]) -> f64 {
    let flow = r.measured.get("flow_seconds").copied().unwrap_or(0.0);
    if keys == SOLVER_LAGRANGIAN {
        flow
    } else if keys == SOLVER_EULERIAN {
        r.seconds - flow
    } else {
        r.seconds
    }
}

fn verdict(c: &Criterion, results: &BTreeMap<&'static str, SuiteResult>) -> (bool, String) {
    let mut ok = true;
    let mut notes = Vec::new();
    for (suite, keys) in c.parts {
        let r = &results[suite.name()];
        if !r.detail.is_empty() && r.detail.starts_with("error") {
            ok = false;
            notes.push(format!("{}: {}", r.name, r.detail));
            continue;
        }
        let selected: Vec<(&String, &f64)> = if keys.is_empty() {
            r.margins.iter().collect()
        } else {
            keys.iter()
                .map(|k| r.margins.get_key_value(*k).unwrap_or_else(|| panic!("suite {} lacks margin {k}", r.name)))
                .collect()
        };
        assert!(!selected.is_empty(), "suite {} recorded no margins", r.name);
        for (key, margin) in selected {
            if !(*margin >= 0.0) {
                ok = false;
                notes.push(format!("{key} margin {margin:e}"));
            }
        }
    }
    let seconds: f64 = c.parts.iter().map(|(s, keys)| charged_seconds(&results[s.name()], keys)).sum();
    if seconds > c.budget_seconds {
        ok = false;
        notes.push(format!("runtime {seconds:.1}s over {:.0}s", c.budget_seconds));
    }
    notes.insert(0, format!("{seconds:.1}s"));
    (ok, notes.join("; "))
}

#[test]
fn acceptance_criteria() {
    let cfg = RunConfig::default();
    let out = tempfile::tempdir().unwrap();
    let mut results = BTreeMap::new();
    let mut rows = Vec::new();
    for suite in Suite::ALL {
        let r = run_suite(suite, &cfg, Fault::None, out.path(), &mut rows);
        results.insert(suite.name(), r);
    }
    let mut failed = Vec::new();
    for c in CRITERIA {
        let (ok, note) = verdict(c, &results);
        println!("criterion {:>2} {} {} ({note})", c.id, if ok { "PASS" } else { "FAIL" }, c.title);
        if !ok {
            failed.push(c.id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
