mod common;

use common::pipeline::{ok, outputs, rerun, run, softrec};

#[test]
fn manifest_rerun_is_byte_identical() {
    let root = tempfile::tempdir().unwrap();
    run(root.path());
    for (first, again) in rerun(root.path()) {
        let (a, b) = (outputs(&first), outputs(&again));
        assert!(!a.is_empty());
        assert_eq!(a, b, "{} differs", first.display());
    }
    let manifest = std::fs::read_to_string(root.path().join("train/manifest.toml")).unwrap();
    assert!(manifest.contains("command = \"train\""));
    assert!(manifest.contains("[manifest.input_checksums]"));
    assert!(manifest.contains("wall_time_secs"));
}

#[test]
fn stale_checkpoint_is_refused() {
    let root = tempfile::tempdir().unwrap();
    run(root.path());
    let p = |s: &str| root.path().join(s).display().to_string();
    ok(&[
        "--seed", "7", "--out-dir", &p("corpus7"), "ingest",
        "--interactions", &p("gen/interactions.tsv"), "--friendships", &p("gen/friendships.tsv"),
    ]);
    let out = softrec(&["--out-dir", &p("eval7"), "evaluate", "--corpus", &p("corpus7"), "--checkpoint", &p("train/factors.bin")]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error[stale-checkpoint]"), "{err}");
}

#[test]
fn bad_inputs_fail_with_a_category() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().display().to_string();
    let cases: [(&[&str], &str); 4] = [
        (&["cluster", "--corpus", "/nonexistent/corpus"], "error[io]"),
        (&["--set", "train.betta=1", "cluster"], "error[config]"),
        (&["--preset", "nope", "cluster"], "error[config]"),
        (&["train", "--method", "pop", "--corpus", "x"], "error[config]"),
    ];
    for (args, prefix) in cases {
        let mut all = vec!["--out-dir", out_dir.as_str()];
        all.extend_from_slice(args);
        let out = softrec(&all);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.starts_with(prefix), "{args:?}: {err}");
    }
}

#[test]
fn overrides_reach_the_manifest() {
    let root = tempfile::tempdir().unwrap();
    let out = root.path().join("gen").display().to_string();
    ok(&["--out-dir", &out, "--set", "synthetic.users_per_cluster=12", "--seed", "5", "gen-synthetic"]);
    let manifest = std::fs::read_to_string(root.path().join("gen/manifest.toml")).unwrap();
    assert!(manifest.contains("users_per_cluster = 12"));
    assert!(manifest.contains("seed = 5"));
    let users: std::collections::BTreeSet<String> = std::fs::read_to_string(root.path().join("gen/interactions.tsv"))
        .unwrap()
        .lines()
        .map(|l| l.split('\t').next().unwrap().to_owned())
        .collect();
    assert_eq!(users.len(), 24);
}
