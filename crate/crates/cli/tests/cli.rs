use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mini() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/mini")
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_narrative-arcs"));
    c.env_remove("NARRATIVE_ARCS_CONFIG").env_remove("RUST_LOG");
    c
}

fn with_inputs(out: &Path) -> Command {
    let m = mini();
    let mut c = bin();
    c.arg("--metadata")
        .arg(m.join("metadata.csv"))
        .arg("--embeddings")
        .arg(m.join("embeddings.txt"))
        .arg("--sentiment-lexicon")
        .arg(m.join("sentiment_lexicon.csv"))
        .arg("--output")
        .arg(out);
    c
}

fn run(c: &mut Command) -> Output {
    c.output().expect("binary runs")
}

/// Compares against a checked-in file; `UPDATE_GOLDEN=1` rewrites it.
fn check_golden(name: &str, actual: &str) {
    let path = golden(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "golden file {name} differs");
}

fn report(out: &Path) -> Vec<u8> {
    let o = run(with_inputs(out).arg("report"));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read(out.join("report.json")).unwrap()
}

#[test]
fn report_has_every_section_and_matches_schema() {
    let dir = tempfile::tempdir().unwrap();
    let bytes = report(dir.path());
    assert_eq!(bytes.last(), Some(&b'\n'));
    let value: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    for key in ["corpus", "axis_validation", "arcs", "slopes", "levels", "networks", "verbs", "endorsement"] {
        assert!(value.get(key).is_some(), "missing section {key}");
    }
    assert_eq!(value["networks"].as_array().unwrap().len(), 4);

    let schema_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json");
    let schema: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(schema_path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(&value).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{errors:#?}");

    // the schema is not vacuous
    let mut broken = value.clone();
    broken.as_object_mut().unwrap().remove("verbs");
    assert!(!validator.is_valid(&broken));
}

#[test]
fn gap_out_of_range_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(with_inputs(dir.path()).args(["--gap", "11", "report"]));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--gap"));
}

#[test]
fn usage_and_data_errors_have_distinct_codes() {
    assert_eq!(run(bin().arg("frobnicate")).status.code(), Some(1));
    assert_eq!(run(bin().arg("--help")).status.code(), Some(0));
    // required input missing
    assert_eq!(run(bin().arg("report")).status.code(), Some(1));
    assert_eq!(run(bin().args(["--metadata", "/no/such.csv", "report"])).status.code(), Some(1));

    // embeddings that lack every seed word
    let dir = tempfile::tempdir().unwrap();
    let emb = dir.path().join("emb.txt");
    std::fs::write(&emb, "2 2\nfoo 1 0\nbar 0 1\n").unwrap();
    let o = run(bin()
        .arg("--metadata")
        .arg(mini().join("metadata.csv"))
        .arg("--embeddings")
        .arg(&emb)
        .arg("--output")
        .arg(dir.path())
        .arg("report"));
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn warm_cache_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cold = report(dir.path());
    let n_cached = std::fs::read_dir(dir.path().join("cache")).unwrap().count();
    assert_eq!(n_cached, 5);
    let o = run(with_inputs(dir.path()).args(["-v", "report"]));
    assert!(o.status.success());
    let log = String::from_utf8_lossy(&o.stderr);
    assert_eq!(log.matches("(cached)").count(), 5, "{log}");
    let warm = std::fs::read(dir.path().join("report.json")).unwrap();
    assert_eq!(cold, warm);

    // a different gap reuses the scores but recomputes the slopes
    let o = run(with_inputs(dir.path()).args(["-v", "--gap", "3", "slopes"]));
    assert!(o.status.success());
    assert_eq!(String::from_utf8_lossy(&o.stderr).matches("(cached)").count(), 0);
}

#[test]
fn config_file_and_environment() {
    let dir = tempfile::tempdir().unwrap();
    let m = mini();
    let cfg = dir.path().join("run.conf");
    std::fs::write(
        &cfg,
        format!(
            "# mini corpus\nmetadata = {}\nembeddings = {}\ngap = 2\noutput = out\n",
            m.join("metadata.csv").display(),
            m.join("embeddings.txt").display()
        ),
    )
    .unwrap();
    let o = run(bin().env("NARRATIVE_ARCS_CONFIG", &cfg).arg("slopes"));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["gap"], 2);
    // flags win over the file
    let o = run(bin().env("NARRATIVE_ARCS_CONFIG", &cfg).args(["--gap", "4", "slopes"]));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["gap"], 4);
    // bad value inside the file
    std::fs::write(&cfg, "gap = 12\n").unwrap();
    assert_eq!(run(bin().arg("--config").arg(&cfg).arg("slopes")).status.code(), Some(1));
}

#[test]
fn golden_ingest_counts() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(with_inputs(dir.path()).arg("ingest"));
    assert!(o.status.success());
    check_golden("ingest.json", &String::from_utf8(o.stdout).unwrap());
}

#[test]
fn golden_skyline() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(with_inputs(dir.path()).args(["arc", "--story", "cinderella"]));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let svg = std::fs::read_to_string(dir.path().join("arcs/cinderella.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    check_golden("cinderella.svg", &svg);
    let csv = std::fs::read_to_string(dir.path().join("arcs/cinderella.csv")).unwrap();
    assert_eq!(csv.lines().count(), 98);
}

#[test]
fn golden_endorse_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(with_inputs(dir.path()).args(["endorse", "--outcome", "rating"]));
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let summary = format!("rows {}\nexcluded {}\n", v["n_rows"], v["excluded"]);
    check_golden("endorse_rows.txt", &summary);

    let o = run(with_inputs(dir.path()).args(["endorse", "--format", "table"]));
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("rows: 4"));
}

#[test]
fn network_exports() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(with_inputs(dir.path()).args(["network", "--gender", "female", "--mode", "cooccur", "--label-threshold", "2"]));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let tsv = std::fs::read_to_string(dir.path().join("networks/female-cooccur.tsv")).unwrap();
    assert!(tsv.lines().all(|l| l.split('\t').count() == 3));
    let graphml = std::fs::read_to_string(dir.path().join("networks/female-cooccur.graphml")).unwrap();
    assert!(graphml.contains("<graphml"));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["n_edges_distinct"].as_u64().unwrap() as usize, tsv.lines().count());
}

#[test]
fn other_subcommands_run() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["validate-axis"],
        vec!["levels"],
        vec!["verbs"],
        vec!["slopes", "--group", "genre"],
        vec!["slopes", "--group", "period", "--period-bins", "1990,2000,2020"],
        vec!["slopes", "--gap-sweep"],
    ] {
        let o = run(with_inputs(dir.path()).args(&args));
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(serde_json::from_slice::<serde_json::Value>(&o.stdout).is_ok(), "{args:?}");
        assert!(o.stdout.ends_with(b"\n"));
    }
    let o = run(with_inputs(dir.path()).args(["slopes", "--group", "period", "--period-bins", "2000,1990"]));
    assert_eq!(o.status.code(), Some(1));
}
