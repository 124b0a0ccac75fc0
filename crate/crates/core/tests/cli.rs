use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use parvote::metrics::BenchmarkReport;

fn parvote(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parvote"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn synth(dir: &Path, rows: usize, separation: f64, seed: u64) -> PathBuf {
    let path = dir.join(format!("synth-{rows}-{seed}.csv"));
    let out = parvote(&[
        "synth",
        "--rows",
        &rows.to_string(),
        "--features",
        "3",
        "--separation",
        &separation.to_string(),
        "--seed",
        &seed.to_string(),
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    path
}

fn report(dir: &Path) -> BenchmarkReport {
    BenchmarkReport::from_json(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn dtree_smoke_run_both_modes() {
    let tmp = tempfile::tempdir().unwrap();
    let data = synth(tmp.path(), 1000, 2.0, 1);
    let out = tmp.path().join("out");
    let o = parvote(&[
        "run",
        "--data",
        data.to_str().unwrap(),
        "--label",
        "label",
        "--algo",
        "dtree",
        "--mode",
        "both",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let r = report(&out);
    assert!(r.equivalence.as_ref().unwrap().holds);
    assert_eq!(r.serial.as_ref().unwrap().configs.len(), 6);
    assert_eq!(
        r.speedup.unwrap(),
        r.serial_seconds.unwrap() / r.parallel_seconds.unwrap()
    );
    for f in [
        "report.txt",
        "plotdata_metrics.csv",
        "plotdata_times.csv",
        "plotdata_summary.csv",
    ] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("speedup"));
}

#[test]
fn forest_split_runs_as_two_tasks() {
    let tmp = tempfile::tempdir().unwrap();
    let data = synth(tmp.path(), 400, 2.0, 2);
    let out = tmp.path().join("out");
    let o = parvote(&[
        "run",
        "--data",
        data.to_str().unwrap(),
        "--label",
        "label",
        "--algo",
        "rforest",
        "--trees",
        "64,66",
        "--workers",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let r = report(&out);
    assert_eq!(r.parallel.as_ref().unwrap().configs.len(), 2);
    assert_eq!(r.parallel.as_ref().unwrap().n_voters, 130);
    assert_eq!(r.serial.as_ref().unwrap().configs.len(), 1);
    assert!(r.equivalence.as_ref().unwrap().holds);
}

#[test]
fn single_modes() {
    let tmp = tempfile::tempdir().unwrap();
    let data = synth(tmp.path(), 300, 2.0, 3);
    for mode in ["serial", "parallel"] {
        let out = tmp.path().join(mode);
        let o = parvote(&[
            "run",
            "--data",
            data.to_str().unwrap(),
            "--label",
            "label",
            "--grid",
            "1-5",
            "--mode",
            mode,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        let r = report(&out);
        assert_eq!(r.serial.is_some(), mode == "serial");
        assert_eq!(r.parallel.is_some(), mode == "parallel");
        assert!(r.speedup.is_none() && r.equivalence.is_none());
    }
}

#[test]
fn usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let data = synth(tmp.path(), 100, 1.0, 4);
    let d = data.to_str().unwrap();
    for args in [
        vec![
            "run",
            "--data",
            d,
            "--label",
            "label",
            "--train-fraction",
            "0",
        ],
        vec![
            "run", "--data", d, "--label", "label", "--algo", "knn", "--trees", "64,66",
        ],
        vec!["run", "--data", d, "--label", "label", "--grid", "3-1"],
        vec!["run", "--label", "label"],
        vec!["run", "--data", d, "--label", "label", "--workers", "0"],
        vec!["run", "--data", d, "--algo", "bogus"],
        vec!["frobnicate"],
    ] {
        let o = parvote(&args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn data_errors_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let constant = tmp.path().join("constant.csv");
    fs::write(&constant, "a,b,label\n1,2,yes\n3,4,yes\n5,6,yes\n").unwrap();
    let ragged = tmp.path().join("ragged.csv");
    fs::write(&ragged, "a,label\n1,0\n2\n").unwrap();
    let missing = tmp.path().join("absent.csv");
    for (path, label) in [
        (&constant, "label"),
        (&ragged, "label"),
        (&missing, "label"),
        (&constant, "nope"),
    ] {
        let o = parvote(&["run", "--data", path.to_str().unwrap(), "--label", label]);
        assert_eq!(
            o.status.code(),
            Some(3),
            "{path:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn config_file_layering() {
    let tmp = tempfile::tempdir().unwrap();
    let data = synth(tmp.path(), 300, 2.0, 5);
    let out = tmp.path().join("out");
    let cfg = tmp.path().join("exp.toml");
    fs::write(
        &cfg,
        format!(
            "data = {:?}\nlabel = \"label\"\nalgo = \"dtree\"\ngrid = \"depth:2,3\"\nseed = 11\nout = {:?}\n",
            data.to_str().unwrap(),
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = parvote(&["run", "--config", cfg.to_str().unwrap(), "--seed", "12"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let r = report(&out);
    assert_eq!(r.algorithm, "dtree");
    assert_eq!(r.dataset.seed, 12);
    assert_eq!(r.serial.as_ref().unwrap().configs.len(), 2);

    fs::write(&cfg, "data = \"x.csv\"\nwokers = 2\n").unwrap();
    let o = parvote(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn synth_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let fa = fs::read(synth(a.path(), 200, 1.0, 77)).unwrap();
    let fb = fs::read(synth(b.path(), 200, 1.0, 77)).unwrap();
    assert_eq!(fa, fb);
}

#[test]
fn report_subcommand_renders_table() {
    let tmp = tempfile::tempdir().unwrap();
    let data = synth(tmp.path(), 200, 3.0, 6);
    let out = tmp.path().join("out");
    let o = parvote(&[
        "run",
        "--data",
        data.to_str().unwrap(),
        "--label",
        "label",
        "--grid",
        "1,3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let o = parvote(&["report", out.join("report.json").to_str().unwrap()]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text, fs::read_to_string(out.join("report.txt")).unwrap());

    let o = parvote(&["report", tmp.path().join("nope.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn feature_selection_and_exclusion() {
    let tmp = tempfile::tempdir().unwrap();
    let data = synth(tmp.path(), 300, 3.0, 8);
    let out = tmp.path().join("out");
    let o = parvote(&[
        "run",
        "--data",
        data.to_str().unwrap(),
        "--label",
        "label",
        "--exclude",
        "f2",
        "--select-features",
        "anova:1",
        "--grid",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(report(&out).dataset.n_features, 1);

    let o = parvote(&[
        "run",
        "--data",
        data.to_str().unwrap(),
        "--label",
        "label",
        "--exclude",
        "label",
    ]);
    assert_eq!(o.status.code(), Some(2));
}
