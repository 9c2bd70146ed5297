//! Command-line behaviour: configuration round trips, reproducible tables,
//! exit codes and routing failures reported as rows.

use std::path::Path;
use std::process::{Command, Output};

use qst_experiments::ExperimentConfig;

fn qst(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qst")).args(args).output().expect("run qst")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

/// Table body without the `#` metadata header.
fn body(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

const SMALL_DISORDER: &str = r#"
realizations = 6
[disorder]
n = [11]
sigma_d_nm = [0.0, 1.0]
t1_ms = [200.0, inf]
"#;

#[test]
fn print_config_round_trips() {
    let out = qst(&["print-config"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), ExperimentConfig::default());
}

#[test]
fn disorder_tables_are_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "d.toml", SMALL_DISORDER);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, threads) in [(&a, "1"), (&b, "3")] {
        let o = qst(&["disorder-sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--threads", threads]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for table in ["fidelity", "realizations", "pr_histogram", "pr_summary"] {
        let name = format!("disorder-sweep_{table}.csv");
        assert_eq!(body(&a.join(&name)), body(&b.join(&name)), "{table}");
    }
    let header = std::fs::read_to_string(a.join("disorder-sweep_fidelity.csv")).unwrap();
    for key in ["# seed: 20240601", "# realizations: 6", "# config_sha256: ", "# code_version: "] {
        assert!(header.contains(key), "{key}");
    }
    let sidecar: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(a.join("disorder-sweep.json")).unwrap()).unwrap();
    assert_eq!(sidecar["metadata"]["seed"], 20240601);
}

#[test]
fn seed_changes_the_draws() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "d.toml", SMALL_DISORDER);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, seed) in [(&a, "1"), (&b, "2")] {
        assert!(qst(&["disorder-sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", seed]).status.success());
    }
    let name = "disorder-sweep_realizations.csv";
    assert_ne!(body(&a.join(name)), body(&b.join(name)));
}

#[test]
fn unreachable_destination_becomes_an_error_row() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "grid.txt", "R.#.\nR.#R\n");
    let cfg = write(
        dir.path(),
        "m.toml",
        "[mirror]\nsizes = [2, 4]\nlattice_file = \"grid.txt\"\nroutes = [[[0, 0], [0, 3]], [[0, 0], [1, 1]]]\n",
    );
    let out = dir.path().join("out");
    let o = qst(&["mirror-verify", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let routes = body(&out.join("mirror-verify_routes.csv"));
    let rows: Vec<&str> = routes.lines().skip(1).collect();
    assert!(rows[0].contains(",error,") && rows[0].contains("unreachable"), "{}", rows[0]);
    assert!(rows[1].contains(",ok,"), "{}", rows[1]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let code = |cmd: &str, text: &str| {
        let cfg = write(dir.path(), "c.toml", text);
        qst(&[cmd, "--config", &cfg, "--out", out]).status.code()
    };
    assert_eq!(code("bosonic", "not_a_key = 1\n"), Some(2));
    assert_eq!(code("bosonic", "[bosonic]\nn = 8\n"), Some(2));
    assert_eq!(code("bosonic", "kind = \"perturbative\"\n"), Some(2));
    assert_eq!(code("mirror-verify", "[mirror]\nsizes = [2]\nlattice = \"R.x\\n\"\n"), Some(2));
    assert_eq!(code("dipolar-ed", "[dipolar]\nn_total = [18]\nmodels = [\"full_dipolar\"]\n"), Some(3));
    assert_eq!(code("bosonic", "[bosonic]\nkt_over_omega = [1.0]\n"), Some(0));
    assert_eq!(qst(&["bosonic", "--config", "/nonexistent/c.toml"]).status.code(), Some(2));
}
