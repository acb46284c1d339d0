use std::path::PathBuf;

use bml::cli_io::config::{parse_config, RunConfig, Suite};
use bml::solver::Scenario;
use proptest::prelude::*;

#[test]
fn documented_example_parses() {
    let text = r#"
sigma = 0.25
scenario = "two_atom"
seed = 11
suites = ["partition", "measures"]

[grid]
n = 128
L = 4.0

[time]
T = 0.5
dt = 0.005

[mollify]
n = 4

[output]
dir = "runs/two"
cadence = 10
"#;
    let cfg = parse_config(text).unwrap();
    assert_eq!(cfg.grid.n, 128);
    assert_eq!(cfg.grid.half_length, 4.0);
    assert_eq!(cfg.time.t_final, 0.5);
    assert_eq!(cfg.scenario, Scenario::TwoAtom);
    assert_eq!(cfg.output.dir, PathBuf::from("runs/two"));
    assert_eq!(cfg.selected_suites(), vec![Suite::Partition, Suite::Measures]);
    assert_eq!(cfg.verify, RunConfig::default().verify);
}

#[test]
fn dotted_keys_work_at_top_level() {
    let cfg = parse_config("grid.n = 64\ngrid.L = 2.0\nmollify.n = 2\n").unwrap();
    assert_eq!((cfg.grid.n, cfg.grid.half_length, cfg.mollify.n), (64, 2.0, 2));
}

#[test]
fn empty_suite_selection_is_allowed() {
    let cfg = parse_config("suites = []\n").unwrap();
    assert!(cfg.selected_suites().is_empty());
}

#[test]
fn errors_name_the_key() {
    let cases = [
        ("grid.n = 100\n", "grid.n"),
        ("grid.L = -1.0\n", "grid.L"),
        ("sigma = 2.0\n", "sigma"),
        ("time.dt = 0.0\n", "time.dt"),
        ("mollify.n = 64\n", "mollify.n"),
        ("[verify]\ngrids = [128, 512]\n", "verify.grids"),
        ("[time]\nstep = 1\n", "time.step"),
        ("seed = 9223372036854775807\nsigma = 3.0\n", "sigma"),
    ];
    for (text, key) in cases {
        let e = parse_config(text).unwrap_err();
        assert_eq!(e.key.as_deref(), Some(key), "{text:?} gave {e}");
        assert!(e.line.is_some() && e.column.is_some(), "{text:?} lacks a position");
        assert!(e.to_string().contains(key));
    }
    let mut cfg = RunConfig::default();
    cfg.seed = u64::MAX;
    assert_eq!(cfg.to_toml().unwrap_err().key.as_deref(), Some("seed"));
    let e = parse_config("scenario = \"three_atom\"\n").unwrap_err();
    assert_eq!(e.line, Some(1));
    let e = parse_config("[grid\nn = 64\n").unwrap_err();
    assert_eq!(e.line, Some(1));
}

fn arb_config() -> impl Strategy<Value = RunConfig> {
    (
        (4u32..9, 1.0f64..16.0, 0.1f64..4.0, 0.0f64..1.0),
        (0.01f64..1.99, 0usize..3, 0..=i64::MAX as u64, 0usize..50),
        proptest::option::of(proptest::sample::subsequence(Suite::ALL.to_vec(), 0..=10)),
        ("[a-z]{1,8}(/[a-z0-9_]{1,8}){0,2}", 1usize..300),
    )
        .prop_map(|((log_n, l, t, dt_frac), (sigma, sc, seed, cadence), suites, (dir, fields))| {
            let mut cfg = RunConfig::default();
            cfg.grid.n = 1 << log_n;
            cfg.grid.half_length = l;
            cfg.time.t_final = t;
            cfg.time.dt = t * (0.001 + 0.999 * dt_frac);
            let cell = 2.0 * l / cfg.grid.n as f64;
            // largest n whose radius still spans three cells, at least 1
            cfg.mollify.n = ((1.0 / (3.0 * cell)).floor() as u32).clamp(1, 8);
            cfg.sigma = sigma;
            cfg.scenario = Scenario::ALL[sc];
            cfg.seed = seed;
            cfg.output.cadence = cadence;
            cfg.output.dir = PathBuf::from(dir);
            cfg.suites = suites;
            cfg.verify.fields = fields;
            cfg
        })
        .prop_filter("valid", |c| c.validate().is_ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn serialize_then_parse_is_identity(cfg in arb_config()) {
        let text = cfg.to_toml().unwrap();
        let back = parse_config(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.grid.half_length.to_bits(), cfg.grid.half_length.to_bits());
        prop_assert_eq!(back.time.dt.to_bits(), cfg.time.dt.to_bits());
        prop_assert_eq!(back.sigma.to_bits(), cfg.sigma.to_bits());
        prop_assert_eq!(back.to_toml().unwrap(), text);
    }
}
