use std::fs;
use std::path::Path;
use std::process::Command;

use mfjump::cli::{EXIT_IO, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION};

fn mfjump(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_mfjump"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs");
    let text = String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().expect("exit code"), text)
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn validate_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(mfjump(tmp.path(), &["validate", "--model", "lin-lip", "--out", "a"]).0, EXIT_OK);
    assert_eq!(mfjump(tmp.path(), &["validate", "--model", "loclip", "--out", "b"]).0, EXIT_OK);
    let (code, text) = mfjump(tmp.path(), &["validate", "--model", "nope", "--out", "c"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(text.contains("nope"));
    assert!(!tmp.path().join("c").exists());

    fs::write(
        tmp.path().join("hot.toml"),
        "out = \"hot\"\n[model]\nrate = { constant = 2.0 }\nbounds = { drift = 0.0, diffusion = 0.0, rate = 1.0, self_jump_exp = 1.0 }\n",
    )
    .unwrap();
    let (code, text) = mfjump(tmp.path(), &["validate", "--config", "hot.toml"]);
    assert_eq!(code, EXIT_VALIDATION, "{text}");
    let report = fs::read_to_string(tmp.path().join("hot/report.json")).unwrap();
    assert!(report.contains("\"passed\": false"));
}

#[test]
fn bad_flags_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(mfjump(tmp.path(), &["solve", "--bogus"]).0, EXIT_USAGE);
    assert_eq!(mfjump(tmp.path(), &["solve", "--dt", "-1"]).0, EXIT_USAGE);
    assert_eq!(mfjump(tmp.path(), &["--help"]).0, EXIT_OK);
}

#[test]
fn zero_model_bounds_report_zero_constant() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("zero.toml"),
        "[model]\nbounds = { drift = 0.0, diffusion = 0.0, rate = 0.0 }\n",
    )
    .unwrap();
    let (code, text) = mfjump(tmp.path(), &["bounds", "--config", "zero.toml", "--out", "z"]);
    assert_eq!(code, EXIT_OK, "{text}");
    let report: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("z/bounds.json")).unwrap()).unwrap();
    assert_eq!(report["gronwall_k"], 0.0);
    assert_eq!(report["exp_moment_bound"], report["initial_exp_moment"]);
}

#[test]
fn solve_reports_convergence_through_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, _) = mfjump(tmp.path(), &["solve", "--model", "pure-drift", "--samples", "100", "--out", "pd"]);
    assert_eq!(code, EXIT_OK);
    let flow = fs::read_to_string(tmp.path().join("pd/flow.csv")).unwrap();
    assert!(flow.starts_with("t,position,weight\n"));
    let diag = fs::read_to_string(tmp.path().join("pd/diagnostics.json")).unwrap();
    assert!(diag.contains("\"converged\": true"));

    let args = [
        "solve", "--model", "lin-lip", "--max-iter", "1", "--samples", "200", "--horizon", "0.2", "--dt", "0.01",
        "--tol", "1e-6", "--out", "capped",
    ];
    assert_eq!(mfjump(tmp.path(), &args).0, EXIT_NOT_CONVERGED);
    assert!(tmp.path().join("capped/diagnostics.json").exists());
}

#[test]
fn chaos_on_unconverged_flow_refuses() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "chaos", "--model", "loclip", "--max-iter", "1", "--tol", "1e-9", "--samples", "100", "--horizon", "0.1",
        "--dt", "0.01", "--ns", "3", "--replicas", "2", "--out", "c",
    ];
    assert_eq!(mfjump(tmp.path(), &args).0, EXIT_NOT_CONVERGED);
    assert!(!tmp.path().join("c").exists());
    assert!(!tmp.path().join(".c.partial").exists());
}

#[test]
fn same_config_gives_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let common = ["--n", "12", "--horizon", "0.3", "--dt", "0.005", "--seed", "77"];
    let run = |out: &str| {
        let mut args = vec!["simulate", "--out", out];
        args.extend(common);
        assert_eq!(mfjump(tmp.path(), &args).0, EXIT_OK);
    };
    run("first");
    run("second");
    let a = files(&tmp.path().join("first"));
    let b = files(&tmp.path().join("second"));
    let names: Vec<_> = a.iter().map(|f| f.0.as_str()).collect();
    assert_eq!(names, ["jumps.csv", "metadata.json", "paths.csv", "summary.json"]);
    for (x, y) in a.iter().zip(&b) {
        if x.0 != "metadata.json" {
            assert_eq!(x, y);
        }
    }
    // rerunning into the same directory replaces it with identical content
    run("first");
    assert_eq!(files(&tmp.path().join("first")), a);
}

#[test]
fn metadata_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "rates", "--experiment", "gn", "--model", "loclip", "--ns", "4,8,16", "--replicas", "3", "--horizon", "0.2",
        "--dt", "0.01", "--seed", "5", "--out", "orig",
    ];
    assert_eq!(mfjump(tmp.path(), &args).0, EXIT_OK);
    let (code, text) = mfjump(tmp.path(), &["rates", "--config", "orig/metadata.json", "--out", "again"]);
    assert_eq!(code, EXIT_OK, "{text}");
    let a = files(&tmp.path().join("orig"));
    let b = files(&tmp.path().join("again"));
    for (x, y) in a.iter().zip(&b) {
        if x.0 == "metadata.json" {
            let strip = |v: &[u8]| {
                let mut j: serde_json::Value = serde_json::from_slice(v).unwrap();
                j.as_object_mut().unwrap().remove("out");
                j
            };
            assert_eq!(strip(&x.1), strip(&y.1));
        } else {
            assert_eq!(x, y);
        }
    }
}

#[test]
fn thread_count_does_not_change_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let base = [
        "rates", "--experiment", "moments", "--model", "lin-lip", "--ns", "5,10", "--replicas", "4", "--horizon",
        "0.2", "--dt", "0.01",
    ];
    let mut one = base.to_vec();
    one.extend(["--threads", "1", "--out", "t1"]);
    let mut three = base.to_vec();
    three.extend(["--threads", "3", "--out", "t3"]);
    assert_eq!(mfjump(tmp.path(), &one).0, EXIT_OK);
    assert_eq!(mfjump(tmp.path(), &three).0, EXIT_OK);
    let a = fs::read(tmp.path().join("t1/rates.csv")).unwrap();
    let b = fs::read(tmp.path().join("t3/rates.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn chaos_command_matches_library() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "chaos", "--model", "lin-lip", "--samples", "200", "--horizon", "0.2", "--dt", "0.01", "--ns", "4,8",
        "--replicas", "3", "--seed", "2", "--out", "ch",
    ];
    let (code, text) = mfjump(tmp.path(), &args);
    assert_eq!(code, EXIT_OK, "{text}");
    let cfg = mfjump::config::RunConfig::load(&tmp.path().join("ch/metadata.json")).unwrap();
    let spec = cfg.model_spec().unwrap();
    let opts = mfjump::experiments::ChaosOptions {
        ns: cfg.ns.clone(),
        horizon: cfg.horizon,
        dt: cfg.dt,
        replicas: cfg.replicas,
        seed: cfg.seed,
        independent_initial: cfg.independent_initial,
        n_mark_samples: cfg.n_mark_samples,
        picard: cfg.picard_options(),
    };
    let lib = mfjump::experiments::run_chaos(&spec, &opts).unwrap();
    let mut csv = Vec::new();
    lib.write_csv(&mut csv).unwrap();
    assert_eq!(fs::read(tmp.path().join("ch/chaos.csv")).unwrap(), csv);
}

#[test]
fn foreign_output_directory_is_left_alone() {
    let tmp = tempfile::tempdir().unwrap();
    let target = tmp.path().join("mine");
    fs::create_dir(&target).unwrap();
    fs::write(target.join("notes.txt"), "keep").unwrap();
    let (code, _) = mfjump(tmp.path(), &["bounds", "--out", "mine"]);
    assert_eq!(code, EXIT_IO);
    assert_eq!(fs::read_to_string(target.join("notes.txt")).unwrap(), "keep");
    assert!(!tmp.path().join(".mine.partial").exists());
}
