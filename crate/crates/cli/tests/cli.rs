use std::path::Path;
use std::process::{Command, Output};

use l3ppi::synth::SynthConfig;
use l3ppi_cli::config::{Config, KEYS};
use l3ppi_cli::pipeline;

fn l3ppi(args: &[&str], root: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_l3ppi"))
        .args(args)
        .env("L3PPI_OUT_ROOT", root)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn synth(root: &Path) -> (String, String) {
    let o = l3ppi(&["synth", "--synth.n", "60", "--synth.shapes", "3", "--synth.q_hit", "0.5"], root);
    assert!(o.status.success(), "{}", stderr(&o));
    let dir = root.join("synth");
    (dir.join("network.tsv").display().to_string(), dir.join("embeddings.emb").display().to_string())
}

#[test]
fn help_lists_every_key_with_its_default() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [vec!["--help"], vec!["tune", "--help"]] {
        let o = l3ppi(&args, tmp.path());
        assert!(o.status.success());
        let text = String::from_utf8_lossy(&o.stdout);
        for k in KEYS {
            let line = text
                .lines()
                .find(|l| l.split_whitespace().next() == Some(k.name) && l.contains(" default "))
                .unwrap_or_else(|| panic!("{}", k.name));
            let default = if k.default.is_empty() { "\"\"" } else { k.default };
            assert!(line.contains(&format!("default {default}")), "{line}");
        }
    }
}

#[test]
fn unknown_key_is_a_config_error_listing_valid_keys() {
    let tmp = tempfile::tempdir().unwrap();
    let o = l3ppi(&["synth", "--synth.nn", "5"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("synth.nn") && err.contains("synth.q_hit") && err.contains("tune.lambda_pn"), "{err}");

    let cfg = tmp.path().join("bad.json");
    std::fs::write(&cfg, r#"{"tune.kk": 3}"#).unwrap();
    let o = l3ppi(&["synth", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!tmp.path().join("synth").exists());
}

#[test]
fn exit_codes_separate_config_and_data_failures() {
    let tmp = tempfile::tempdir().unwrap();
    let o = l3ppi(&["validate-l3"], tmp.path());
    assert_eq!(o.status.code(), Some(2), "missing --net: {}", stderr(&o));
    let o = l3ppi(&["validate-l3", "--net", "/nonexistent/net.tsv"], tmp.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let bad = tmp.path().join("loop.tsv");
    std::fs::write(&bad, "A\tB\nA\tA\n").unwrap();
    let o = l3ppi(&["validate-l3", "--net", bad.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = l3ppi(&["synth", "--tune.gamma", "abc"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let o = l3ppi(&["synth", "--synth.q_hit", "0.001", "--synth.q_noise", "0.5"], tmp.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn validate_l3_writes_one_summary_row_per_length() {
    let tmp = tempfile::tempdir().unwrap();
    let (net, emb) = synth(tmp.path());
    let o = l3ppi(
        &["validate-l3", "--net", &net, "--emb", &emb, "--kmax", "7", "--seed", "0", "--census.n_pos", "30", "--census.n_neg", "30"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(tmp.path().join("validate-l3/l3_summary.csv")).unwrap();
    let ks: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ks, ["2", "3", "4", "5", "6", "7"]);
    assert!(tmp.path().join("validate-l3/manifest.json").exists());
}

#[test]
fn split_is_deterministic_and_flags_override_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    let (net, _) = synth(tmp.path());
    let cfg = tmp.path().join("split.json");
    std::fs::write(&cfg, r#"{"split.scheme": "random", "seed": 9}"#).unwrap();
    for out in ["a", "b"] {
        let dir = tmp.path().join(out).display().to_string();
        let o = l3ppi(
            &["split", "--config", cfg.to_str().unwrap(), "--net", &net, "--scheme", "bfs", "--t", "6", "--seed", "3", "--out", &dir],
            tmp.path(),
        );
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = std::fs::read(tmp.path().join("a/split.tsv")).unwrap();
    let b = std::fs::read(tmp.path().join("b/split.tsv")).unwrap();
    assert_eq!(a, b);
    let sidecar: serde_json::Value =
        serde_json::from_slice(&std::fs::read(tmp.path().join("a/split.json")).unwrap()).unwrap();
    assert_eq!(sidecar["scheme"], "bfs");
    assert_eq!(sidecar["seed"], 3);
}

#[test]
fn rerun_refuses_changed_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let (net, _) = synth(tmp.path());
    let o = l3ppi(&["split", "--net", &net], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = tmp.path().join("split/manifest.json");
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(&manifest).unwrap()).unwrap();
    assert_eq!(m["subcommand"], "split");
    assert_eq!(m["config"].as_object().unwrap().len(), KEYS.len());
    assert_eq!(m["inputs"]["net"]["sha256"].as_str().unwrap().len(), 64);

    let o = l3ppi(&["rerun", manifest.to_str().unwrap()], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        std::fs::read(tmp.path().join("split/metrics.json")).unwrap(),
        std::fs::read(tmp.path().join("split-rerun/metrics.json")).unwrap()
    );

    let mut text = std::fs::read_to_string(&net).unwrap();
    text.push_str("P00000\tP00001\n");
    std::fs::write(&net, text).unwrap();
    let o = l3ppi(&["rerun", manifest.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn ablate_sweep_runs_one_tune_per_value() {
    let grid = {
        let mut c = Config::default();
        c.set("ablate.sweep", "K=4,16,64").unwrap();
        l3ppi_cli::commands::ablation_grid(&c).unwrap()
    };
    let ks: Vec<usize> = grid.iter().map(|(c, _)| c.usize("tune.k")).collect();
    assert_eq!(ks, [4, 16, 64]);
    assert!(grid.iter().all(|(c, _)| c.str("tune.strategy") == "P->G"));

    let all = l3ppi_cli::commands::ablation_grid(&Config::default()).unwrap();
    assert_eq!(all.len(), 6);
    let mut bad = Config::default();
    bad.set("ablate.sweep", "synth.n=3").unwrap();
    assert!(l3ppi_cli::commands::ablation_grid(&bad).is_err());
}

#[test]
fn committed_synth_defaults_match_the_library() {
    let mut cfg = Config::default();
    cfg.merge_file(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/synth_default.json"))
        .unwrap();
    assert_eq!(pipeline::synth_config(&cfg), SynthConfig::default());
    assert_eq!(pipeline::synth_config(&Config::default()), SynthConfig::default());
}

#[test]
fn benchmark_config_only_uses_known_keys() {
    let mut cfg = Config::default();
    cfg.merge_file(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/benchmark.json"))
        .unwrap();
    pipeline::tune_config(&cfg).unwrap();
    assert_eq!(cfg.usize("tune.k"), 16);
}
