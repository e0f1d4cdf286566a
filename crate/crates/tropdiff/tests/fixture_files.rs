//! The JSON fixture corpus under `fixtures/` mirrors the programmatic
//! builders exactly. Regenerate with
//! `TROPDIFF_REGEN_FIXTURES=1 cargo test -p tropdiff --test fixture_files`.

use std::fs;
use std::path::PathBuf;

use tropdiff::complex::TropicalReductionDatum;
use tropdiff::fixtures;
use tropdiff::formats;

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn corpus() -> Vec<(String, TropicalReductionDatum)> {
    let mut all: Vec<(String, TropicalReductionDatum)> = fixtures::all_valid_names()
        .into_iter()
        .map(str::to_string)
        .zip(fixtures::all_valid())
        .collect();
    for (name, _, datum) in fixtures::all_invalid() {
        all.push((name.to_string(), datum));
    }
    all
}

#[test]
fn fixture_files_match_builders() {
    let dir = fixture_dir();
    let regen = std::env::var("TROPDIFF_REGEN_FIXTURES").is_ok();
    if regen {
        fs::create_dir_all(&dir).unwrap();
    }
    for (name, datum) in corpus() {
        let path = dir.join(format!("{name}.json"));
        let expected = formats::datum_to_string(&datum);
        if regen {
            fs::write(&path, format!("{expected}\n")).unwrap();
            continue;
        }
        let text = fs::read_to_string(&path)
            .unwrap_or_else(|e| panic!("missing fixture {}: {e}", path.display()));
        let parsed = formats::datum_from_str(&text)
            .unwrap_or_else(|e| panic!("unparsable fixture {}: {e}", path.display()));
        assert_eq!(
            parsed, datum,
            "fixture {} differs from its builder",
            path.display()
        );
    }
}

#[test]
fn invalid_fixtures_fail_their_condition() {
    for (name, expected_check, datum) in fixtures::all_invalid() {
        if expected_check.starts_with("structure/") {
            // surfaces as a structural failure entry
            let rep = tropdiff::complex::validate(&datum);
            assert!(
                !rep.failures_for(expected_check).is_empty(),
                "{name}: expected a {expected_check} failure:\n{rep}"
            );
            continue;
        }
        let rep = tropdiff::complex::validate(&datum);
        assert!(
            !rep.failures_for(expected_check).is_empty(),
            "{name}: expected a {expected_check} failure:\n{rep}"
        );
    }
}

#[test]
fn valid_fixtures_validate() {
    for (name, datum) in fixtures::all_valid_names().iter().zip(fixtures::all_valid()) {
        let rep = tropdiff::complex::validate(&datum);
        assert!(rep.passed(), "{name}: {rep}");
    }
}
