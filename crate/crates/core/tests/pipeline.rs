use std::path::{Path, PathBuf};

use pmlf::cyclo::CycloNumber;
use pmlf::lvalues::build::{ingest_lambda_table, trace_relation_check};
use pmlf::lvalues::table::{parse_normalization, LambdaTable};
use pmlf::pipeline::config::{Backend, PipelineConfig};
use pmlf::pipeline::suites::run_suite;
use pmlf::pipeline::{all_reps, twist_level_candidates, Pipeline};
use pmlf::Error;

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

fn configs(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

#[test]
fn golden_tables_satisfy_exact_trace_relations() {
    for (dir, count) in [("32a", 1), ("27a", 1), ("d4", 5)] {
        let mut seen = 0;
        for entry in std::fs::read_dir(data(dir)).unwrap() {
            let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
            let (table, report) = ingest_lambda_table(&text, &CycloNumber::one(1), None, 0.0).unwrap();
            assert!(report.trace.exact && report.trace.passed());
            assert!(parse_normalization(&table.normalization).is_some());
            assert_eq!(LambdaTable::from_text(&table.to_text()).unwrap(), table);
            seen += 1;
        }
        assert_eq!(seen, count, "{dir}");
    }
}

#[test]
fn tampered_table_is_rejected() {
    let text = std::fs::read_to_string(data("32a/32a.lambda")).unwrap();
    let bad = text.replacen("LAMBDA 2 1 ", "LAMBDA 2 1 1+", 1);
    assert_ne!(bad, text);
    let err = ingest_lambda_table(&bad, &CycloNumber::one(1), None, 0.0);
    assert!(matches!(err, Err(Error::Validation(_)) | Err(Error::Format { .. })), "{err:?}");
}

#[test]
fn ingest_preset_resolves_relative_paths() {
    let c = PipelineConfig::from_file(&configs("27a-ingest.conf")).unwrap();
    match c.backend {
        Backend::Ingest(p) => assert!(p.join("27a.lambda").exists()),
        Backend::Numeric => panic!("expected ingest backend"),
    }
}

#[test]
fn ingested_and_reconstructed_tables_agree() {
    let cache = tempfile::tempdir().unwrap();
    let ingest = Pipeline::from_file(&configs("27a-ingest.conf"), cache.path()).unwrap();
    let numeric = Pipeline::from_file(&configs("27a.conf"), cache.path()).unwrap();
    assert_eq!(ingest.base().unwrap().table.entries, numeric.base().unwrap().table.entries);
    let r = run_suite(&ingest, "interpolation").unwrap();
    assert!(r.passed(), "{}", r.to_text());
    let t = &ingest.base().unwrap().table;
    assert!(trace_relation_check(t, &CycloNumber::one(1), 0.0).unwrap().passed());
}

#[test]
fn suites_on_the_small_preset() {
    let cache = tempfile::tempdir().unwrap();
    let pipe = Pipeline::from_file(&configs("32a.conf"), cache.path()).unwrap();
    let r = run_suite(&pipe, "all").unwrap();
    assert!(r.passed(), "{}", r.to_text());
    assert!(r.findings.iter().any(|f| f["finding"] == "trivial-character constants"));
    assert!(r.findings.iter().any(|f| f["finding"] == "conductor p^0 clause"));
    assert!(matches!(run_suite(&pipe, "nonsense"), Err(Error::Usage(_))));
}

#[test]
fn build_is_deterministic_and_cache_is_checked() {
    let cache = tempfile::tempdir().unwrap();
    let out1 = tempfile::tempdir().unwrap();
    let out2 = tempfile::tempdir().unwrap();
    let pipe = Pipeline::from_file(&configs("32a.conf"), cache.path()).unwrap();
    let m1 = pipe.build(out1.path()).unwrap();
    let again = Pipeline::from_file(&configs("32a.conf"), cache.path()).unwrap();
    let m2 = again.build(out2.path()).unwrap();
    assert_eq!(m1, m2);
    for f in m1["files"].as_array().unwrap() {
        let rel = f["file"].as_str().unwrap();
        assert_eq!(std::fs::read(out1.path().join(rel)).unwrap(), std::fs::read(out2.path().join(rel)).unwrap());
    }
    let conv = &m1["conventions"];
    for key in ["gamma_generator", "sqrt", "epsilon_odd_root", "table_normalization", "log_values", "log_mu", "embeddings"] {
        assert!(!conv[key].is_null(), "{key}");
    }
    let qexp = std::fs::read_dir(cache.path().join("an"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|x| x == "qexp"))
        .unwrap();
    let text = std::fs::read_to_string(&qexp).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines[5] = "7 0";
    std::fs::write(&qexp, lines.join("\n") + "\n").unwrap();
    let third = Pipeline::from_file(&configs("32a.conf"), cache.path()).unwrap();
    assert!(matches!(third.build(out2.path()), Err(Error::Validation(_))));
}

#[test]
fn level_candidates_and_representations() {
    assert_eq!(twist_level_candidates(32, 8), vec![32, 64, 128, 256, 512, 1024, 2048]);
    assert_eq!(twist_level_candidates(27, 1), vec![27]);
    let group = pmlf::characters::AbelianGroup::cyclic_with_inversion(4);
    // c-fixed characters 0 and 2 give two one-dimensional reps each, {1, 3} one induced
    let reps = all_reps(&group, &[0], 3, &[2]).unwrap();
    assert_eq!(reps.len(), (2 * 2 + 1) * 2);
    // per Gamma-character the squared dimensions add up to the order of the dihedral group
    assert_eq!(reps.iter().map(|r| r.dim() * r.dim()).sum::<u32>(), 8 * 2);
}
