use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn models() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn model(name: &str) -> String {
    models().join(name).display().to_string()
}

/// Runs the binary inside `dir` with its own cache and manifest.
fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_proofslice"))
        .current_dir(dir)
        .args(args)
        .args(["--cache-dir", "cache", "--manifest", "manifest.json", "-q"])
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn reach_counts_and_caches() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "reach",
        &model("simple_consensus.gap"),
        &model("n2v2.inst"),
        "--project",
        "leader,decided",
    ];
    let first = run(dir.path(), &args);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let out = stdout(&first);
    assert!(out.contains("reachable states: 336"), "{out}");
    assert!(out.contains("projection {leader,decided}:"), "{out}");
    assert!(std::fs::read_dir(dir.path().join("cache")).unwrap().count() > 0);

    let m = manifest(dir.path());
    assert_eq!(m["command"], "reach");
    assert_eq!(m["exit_code"], 0);
    let inputs = m["inputs"].as_array().unwrap();
    assert_eq!(inputs.len(), 2);
    assert!(inputs.iter().all(|i| i["sha256"].as_str().unwrap().len() == 64));

    let second = run(dir.path(), &args);
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(stdout(&second), out);
}

#[test]
fn missing_input_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["reach", "nope.gap", &model("n2v2.inst")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.gap"));

    let bad = dir.path().join("bad.gap");
    std::fs::write(&bad, "protocol P\nvar x : bool;\n").unwrap();
    let o = run(dir.path(), &["slice", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.gap:"));
}

#[test]
fn slice_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "slice",
            &model("simple_consensus.gap"),
            "--lemma",
            "NoConflictingValues",
            "--grammar",
            &model("simple_consensus.grm"),
            "--instance",
            &model("n3v2.inst"),
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let decide = out.lines().find(|l| l.contains("\tDecide\t")).unwrap();
    assert!(decide.contains("{leader, decided}"), "{decide}");
    assert!(decide.contains("8/22"), "{decide}");
}

#[test]
fn infer_reproduces_the_golden_graph() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "infer",
            &model("simple_consensus.gap"),
            &model("n2v2.inst"),
            &model("simple_consensus.grm"),
            "-o",
            "out",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    for ext in ["graph.json", "dot", "report.txt"] {
        assert!(out.join(format!("NoConflictingValues.{ext}")).exists(), "{ext}");
    }
    let graph = std::fs::read_to_string(out.join("NoConflictingValues.graph.json")).unwrap();
    let golden = std::fs::read_to_string(models().join("golden/simple_consensus_n2v2.graph.json")).unwrap();
    assert_eq!(graph, golden);
    let m = manifest(dir.path());
    assert_eq!(m["outcome"]["outcome"], "valid");
    assert!(m["wall_time_secs"].as_f64().unwrap() > 0.0);
    assert_eq!(m["artifacts"].as_array().unwrap().len(), 3);
}

#[test]
fn check_verdicts_and_hashes() {
    let dir = tempfile::tempdir().unwrap();
    let golden = model("golden/simple_consensus_n2v2.graph.json");
    let spec = model("simple_consensus.gap");
    let ok = run(dir.path(), &["check", &spec, &model("n2v2.inst"), &golden, "--report", "verdicts.json"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(stdout(&ok).contains("verdict: valid"));
    let verdicts: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("verdicts.json")).unwrap()).unwrap();
    assert_eq!(verdicts["valid"], true);

    // Drop the support edges of the Decide node.
    let mut file: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&golden).unwrap()).unwrap();
    file["edges"]
        .as_array_mut()
        .unwrap()
        .retain(|e| !(e["lemma"] == "NoConflictingValues" && e["action"] == "Decide"));
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, serde_json::to_string_pretty(&file).unwrap()).unwrap();
    let bad = run(dir.path(), &["check", &spec, &model("n2v2.inst"), broken.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(4));
    let out = stdout(&bad);
    assert!(out.contains("verdict: invalid"));
    assert!(out.lines().any(|l| l.starts_with("FAIL") && l.contains("NoConflictingValues") && l.contains("Decide")), "{out}");

    let other = run(dir.path(), &["check", &spec, &model("n3v2.inst"), &golden]);
    assert_eq!(other.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&other.stderr).contains("hash"));
}

#[test]
fn export_dot() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "export-dot",
            &model("simple_consensus.gap"),
            &model("n2v2.inst"),
            &model("golden/simple_consensus_n2v2.graph.json"),
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let dot = stdout(&o);
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("V_slice={leader,decided}"));
}

#[test]
fn partial_and_timed_out_runs() {
    let dir = tempfile::tempdir().unwrap();
    let grm = dir.path().join("weak.grm");
    std::fs::write(&grm, "template;\npred a = 0;\nmaxliterals 1;\n").unwrap();
    let args = |extra: &[&str]| {
        let mut v = vec![
            "infer".to_string(),
            model("ring_counter.gap"),
            model("ring.inst"),
            grm.display().to_string(),
            "-o".into(),
            "out".into(),
        ];
        v.extend(extra.iter().map(|s| s.to_string()));
        v
    };
    let a = args(&[]);
    let o = run(dir.path(), &a.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("partial"));
    let report = std::fs::read_to_string(dir.path().join("out/WellFormedA.report.txt")).unwrap();
    assert!(report.contains("Pass"));

    let a = args(&["--global-timeout", "0"]);
    let o = run(dir.path(), &a.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(o.status.code(), Some(2));
}
