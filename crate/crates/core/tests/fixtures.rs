use kreinlab::fixtures::{fixtures_dir, list_fixtures, load_fixture, regenerate_fixture, run_fixture, run_fixture_in, FixtureInput, Origin};
use kreinlab::{KreinError, ToleranceConfig};

#[test]
fn every_fixture_matches() {
    let dir = fixtures_dir();
    let names = list_fixtures(&dir).unwrap();
    assert!(names.len() >= 3, "{names:?}");
    // golden files are only rewritten on explicit request
    if std::env::var("KREINLAB_REGEN_FIXTURES").as_deref() == Ok("1") {
        for name in &names {
            regenerate_fixture(&dir, name, &ToleranceConfig::default()).unwrap();
        }
    }
    for name in &names {
        if let Err(e) = run_fixture(name) {
            panic!("{e}");
        }
    }
}

#[test]
fn fixtures_carry_origin_and_oracle() {
    let dir = fixtures_dir();
    for name in list_fixtures(&dir).unwrap() {
        let fx = load_fixture(&dir, &name).unwrap();
        assert!(!fx.expected.statement.trim().is_empty(), "{name}: empty statement");
        assert!(fx.oracle.contains("Origin:"), "{name}: oracle.md lacks an origin line");
        if fx.expected.origin == Origin::Derived {
            assert!(fx.oracle.contains("Oracle"), "{name}: derived fixture without an oracle");
        }
    }
}

#[test]
fn required_examples_present() {
    let dir = fixtures_dir();
    assert_eq!(run_fixture("finex-sigma-plus").unwrap().sig, Some(0));
    let idx = run_fixture("index-example-A-zero").unwrap();
    assert_eq!(idx.sig, idx.index);
    let kc = run_fixture("kc-2x2").unwrap();
    let ev = kc.events.unwrap();
    assert_eq!(ev.len(), 1);
    // closed form: eigenvalues ±√(s² − 1) meet at s = 1
    assert!((ev[0].t0 - 1.0).abs() <= 1e-4);
    assert!(matches!(load_fixture(&dir, "kc-2x2").unwrap().input, FixtureInput::Track { .. }));
}

#[test]
fn mismatch_is_reported() {
    let tmp = std::env::temp_dir().join(format!("kreinlab-fixture-{}", std::process::id()));
    let src = fixtures_dir().join("j-on-2-1");
    let dst = tmp.join("broken");
    std::fs::create_dir_all(&dst).unwrap();
    for f in ["input.json", "oracle.md"] {
        std::fs::copy(src.join(f), dst.join(f)).unwrap();
    }
    let exp = std::fs::read_to_string(src.join("expected.json")).unwrap().replace("\"sig\": 1,", "\"sig\": 3,");
    std::fs::write(dst.join("expected.json"), exp).unwrap();
    let err = run_fixture_in(&tmp, "broken", &ToleranceConfig::default()).unwrap_err();
    std::fs::remove_dir_all(&tmp).ok();
    match err {
        KreinError::FixtureMismatch { name, diff } => {
            assert_eq!(name, "broken");
            assert!(diff.contains("sig"), "{diff}");
        }
        e => panic!("unexpected {e}"),
    }
}
