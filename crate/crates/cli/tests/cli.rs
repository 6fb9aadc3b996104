use std::collections::BTreeMap;

use proptest::prelude::*;

use radial_sbp::weights::Method;
use radial_sbp::{BoundarySpec, GridKind, WeightTable};
use radial_sbp_cli::commands::naive_exact_error;
use radial_sbp_cli::{build, dispatch, formats, merge, parse_text, CliError, Command, MethodArg, RunConfig};

fn config(text: &str) -> Result<RunConfig, CliError> {
    build(&parse_text(text)?)
}

#[test]
fn defaults() {
    let c = config("command=verify p=2").unwrap();
    assert_eq!(c.command, Command::Verify);
    assert_eq!(c.method, MethodArg::Sbp42);
    assert_eq!(c.kind, GridKind::Centred);
    assert_eq!(c.lambda, 0.25);
    assert_eq!(c.radius, 1.0);
    assert_eq!(c.bc, BoundarySpec::PiDerivative { rho: 1.0, mu: 1.0 });
    assert_eq!(c.tag, "sbp42_p2_centred");
}

#[test]
fn comments_and_dashes() {
    let c = config("# a run\ncommand=evolve  p=3 # trailing\nkind=staggered M=40.5\nbc=max_dissipative bc-sigma=2\n").unwrap();
    assert_eq!(c.p, 3);
    assert_eq!(c.half_steps(), 81);
    assert_eq!(c.bc, BoundarySpec::MaxDissipative { rho: 1.0, sigma: 2.0 });
}

#[test]
fn unknown_key() {
    assert!(matches!(config("command=verify p=2 colour=red"), Err(CliError::UnknownKey(k)) if k == "colour"));
    let flags = BTreeMap::from([("bogus".to_string(), "1".to_string())]);
    assert!(matches!(merge(BTreeMap::new(), flags), Err(CliError::UnknownKey(_))));
}

#[test]
fn harmonic_index() {
    assert_eq!(config("command=verify l=1 n=3").unwrap().p, 5);
    assert!(matches!(config("command=verify p=2 l=1 n=3"), Err(CliError::InconsistentCombination(_))));
    assert!(matches!(config("command=verify l=1"), Err(CliError::InconsistentCombination(_))));
    assert!(matches!(config("command=verify"), Err(CliError::Missing(_))));
}

#[test]
fn evans_odd_p_centred() {
    match config("command=evolve method=evans p=3 kind=centred") {
        Err(CliError::InconsistentCombination(reason)) => assert!(reason.contains("odd p"), "{reason}"),
        other => panic!("{other:?}"),
    }
    assert!(config("command=evolve method=evans p=3 kind=staggered M=64.5").is_ok());
}

#[test]
fn grid_and_method_consistency() {
    assert!(matches!(config("command=verify p=2 kind=staggered M=64"), Err(CliError::InconsistentCombination(_))));
    assert!(matches!(config("command=verify p=2 kind=centred M=64.5"), Err(CliError::InconsistentCombination(_))));
    assert!(matches!(config("command=evolve method=sbp4 p=2"), Err(CliError::InconsistentCombination(_))));
    assert!(config("command=weights method=sbp4 p=2 kind=staggered i_star=1000").is_ok());
}

#[test]
fn boundary_validation() {
    assert!(matches!(config("command=evolve p=2 bc=pi_derivative bc_mu=0"), Err(CliError::Core(_))));
    assert!(matches!(config("command=evolve p=2 bc=max_dissipative bc_rho=1 bc_sigma=-1"), Err(CliError::Core(_))));
    assert!(matches!(config("command=evolve p=2 bc=robin"), Err(CliError::InvalidValue { .. })));
}

#[test]
fn flags_override_file() {
    let file = parse_text("command=verify p=2 lambda=0.5").unwrap();
    let flags = BTreeMap::from([("lambda".to_string(), "0.125".to_string()), ("M".to_string(), "32".to_string())]);
    let c = build(&merge(file, flags).unwrap()).unwrap();
    assert_eq!(c.lambda, 0.125);
    assert_eq!(c.m, 32.0);
}

#[test]
fn weight_table_round_trip() {
    for (method, p, kind) in [(Method::Sbp4, 2, GridKind::Staggered), (Method::Sbp2, 3, GridKind::Centred), (Method::Evans, 2, GridKind::Centred)] {
        let table = WeightTable::build(method, p, kind, 1000).unwrap();
        let text = formats::write_weight_table(&table);
        let back = formats::read_weight_table(&text).unwrap();
        assert_eq!(back, table, "{method} p={p} {kind}");
    }
}

#[test]
fn malformed_table_is_rejected() {
    assert!(formats::read_weight_table("").is_err());
    assert!(formats::read_weight_table("# method=sbp2 p=2 kind=centred i_star=8 chi=1\ni,wbar,vbar,u\n0,1,1\n").is_err());
}

#[test]
fn weights_command_writes_content_addressed_files() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(&format!("command=weights method=sbp4 p=2 kind=staggered i_star=1000 out={}", dir.path().display())).unwrap();
    let out = dispatch(&c).unwrap();
    assert!(out.passed());
    assert!(dir.path().join("weights_sbp4_p2_staggered_1000.csv").exists());
    assert!(dir.path().join("delta_sbp4_p2_staggered_1000.csv").exists());
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let base = format!("p=2 M=32 t_end=0.5 out={}", dir.path().display());
        for cmd in ["evolve", "verify"] {
            assert!(dispatch(&config(&format!("command={cmd} {base}")).unwrap()).unwrap().passed());
        }
    }
    for name in ["sbp42_p2_centred_fields.csv", "sbp42_p2_centred_energy.csv", "sbp42_p2_centred_scheme.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn dissipative_evolution_passes_its_checks() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(&format!("command=evolve p=2 M=32 bc=max_dissipative out={}", dir.path().display())).unwrap();
    let out = dispatch(&c).unwrap();
    assert!(out.passed(), "{:?}", out.failures);
    assert!(out.lines.iter().any(|l| l.starts_with("ok energy_non_increasing")));
}

#[test]
fn probe_command() {
    let out = dispatch(&config("command=probe p=2 b=1").unwrap()).unwrap();
    assert!(out.passed(), "{:?}", out.failures);
}

#[test]
fn naive_error_series() {
    for i in [1.0, 2.0, 7.0] {
        assert!((naive_exact_error(2, i) - 1.0 / (i * i)).abs() < 1e-15);
        // p = 4: ((i+1)^5 - (i-1)^5) / (2 i^4) - 5 = 10/i^2 + 1/i^4.
        let expected = 10.0 / (i * i) + 1.0 / (i * i * i * i);
        assert!((naive_exact_error(4, i) - expected).abs() < 1e-13);
    }
}

fn key_value() -> impl Strategy<Value = (String, String)> {
    prop_oneof![
        (1u32..12).prop_map(|p| ("p".to_string(), p.to_string())),
        (0.05..1.0f64).prop_map(|x| ("lambda".to_string(), x.to_string())),
        (0.5..4.0f64).prop_map(|x| ("R".to_string(), x.to_string())),
        (8u32..200).prop_map(|m| ("M".to_string(), m.to_string())),
        prop_oneof![Just("evans"), Just("sbp2"), Just("sbp41"), Just("sbp42")].prop_map(|m| ("method".to_string(), m.to_string())),
    ]
}

proptest! {
    #[test]
    fn later_entries_win(entries in prop::collection::vec(key_value(), 1..12)) {
        let text: Vec<String> = entries.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let map = parse_text(&text.join(" ")).unwrap();
        for (k, v) in &map {
            let last = entries.iter().rev().find(|e| &e.0 == k).unwrap();
            prop_assert_eq!(&last.1, v);
        }
        let split = parse_text(&text.join("\n")).unwrap();
        prop_assert_eq!(map, split);
    }
}
