use eg_orthant::problems::io::{quantize, read_image_csv, read_pgm};
use eg_orthant::trace::read_trace_csv;
use eg_orthant::verification::{OracleReport, BATTERY_SIZE};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_eg-orthant"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn solve_small(dir: &Path, extra: &[&str]) -> Output {
    let out = dir.to_str().unwrap();
    let mut args = vec!["solve", "--n-side", "8", "--out", out];
    args.extend_from_slice(extra);
    run(&args)
}

fn relative_rows(path: &Path) -> (Vec<String>, Vec<Vec<Option<f64>>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut rd = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = rd.headers().unwrap().iter().map(str::to_string).collect();
    let rows = rd
        .records()
        .map(|r| r.unwrap().iter().skip(1).map(|v| v.parse().ok()).collect())
        .collect();
    (header, rows)
}

#[test]
fn eg_on_small_instance_gives_monotone_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = solve_small(dir.path(), &["--methods", "EG"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let records = read_trace_csv(fs::File::open(dir.path().join("trace_EG.csv")).unwrap()).unwrap();
    assert!(records.windows(2).all(|w| w[1].f <= w[0].f));
    assert!(records
        .windows(2)
        .all(|w| w[1].matvec_count >= w[0].matvec_count));
    for name in ["summary.json", "recon_EG.pgm", "relative_values.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let (shape, _) = read_pgm(fs::File::open(dir.path().join("recon_EG.pgm")).unwrap()).unwrap();
    assert_eq!((shape.height, shape.width), (8, 8));
}

#[test]
fn identical_specs_give_identical_csv_outputs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert!(solve_small(d.path(), &["--seed", "5", "--noisy"])
            .status
            .success());
    }
    for name in [
        "trace_EG.csv",
        "trace_PoiCG.csv",
        "trace_IPgRGD.csv",
        "trace_IPeMD.csv",
        "relative_values.csv",
    ] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn full_comparison_writes_four_traces_and_relative_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["solve", "--out", dir.path().to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for m in ["EG", "PoiCG", "IPgRGD", "IPeMD"] {
        let records =
            read_trace_csv(fs::File::open(dir.path().join(format!("trace_{m}.csv"))).unwrap())
                .unwrap();
        assert!(!records.is_empty());
        let (shape, _) =
            read_pgm(fs::File::open(dir.path().join(format!("recon_{m}.pgm"))).unwrap()).unwrap();
        assert_eq!((shape.height, shape.width), (64, 64));
    }
    let first = fs::read_to_string(dir.path().join("relative_values.csv")).unwrap();
    assert!(first.starts_with("# relative value = (f_k - f_best) / (f_0 - f_best)"));
    let (header, rows) = relative_rows(&dir.path().join("relative_values.csv"));
    assert_eq!(header, ["k", "EG", "PoiCG", "IPgRGD", "IPeMD"]);
    for v in rows[0].iter().flatten() {
        assert!((0.0..=1.0).contains(v));
    }
    // EG and IPeMD are monotone methods
    for col in [0, 3] {
        let column: Vec<f64> = rows.iter().filter_map(|r| r[col]).collect();
        assert!(
            column.windows(2).all(|w| w[1] <= w[0]),
            "column {}",
            header[col + 1]
        );
    }
}

#[test]
fn summary_echoes_resolved_spec() {
    let dir = tempfile::tempdir().unwrap();
    assert!(
        solve_small(dir.path(), &["--methods", "EG,IPeMD", "--seed", "11"])
            .status
            .success()
    );
    let s: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(s["spec"]["problem"]["seed"], 11);
    assert_eq!(s["spec"]["problem"]["n_side"], 8);
    assert_eq!(s["spec"]["methods"], serde_json::json!(["EG", "IPeMD"]));
    assert_eq!(s["spec"]["max_iterations"], 300);
    let runs = s["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 2);
    for r in runs {
        assert!(r["terminal_status"].is_string());
        assert!(r["total_matvecs"].as_u64().unwrap() > 0);
    }
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out_dir = dir.path().join("out");
    fs::write(
        &cfg,
        format!(
            "# small run\nn_side = 8\nmethods = PoiCG\nseed = 1\nmax-iterations = 7\nout = {}\n",
            out_dir.display()
        ),
    )
    .unwrap();
    let out = run(&["solve", "--config", cfg.to_str().unwrap(), "--seed", "4"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let s: serde_json::Value =
        serde_json::from_slice(&fs::read(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["spec"]["problem"]["seed"], 4);
    assert_eq!(s["spec"]["max_iterations"], 7);
    assert!(out_dir.join("trace_PoiCG.csv").exists());
    assert!(!out_dir.join("trace_EG.csv").exists());
}

#[test]
fn bad_inputs_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "colour = blue\n").unwrap();
    let out = run(&["solve", "--config", cfg.to_str().unwrap(), "--out", "x"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));
    assert!(!run(&["solve", "--methods", "SGD", "--out", "x"])
        .status
        .success());
    assert_eq!(run(&["solve", "--n-side", "8"]).status.code(), Some(2));
}

#[test]
fn solver_abort_gives_nonzero_exit_and_keeps_outputs() {
    let dir = tempfile::tempdir().unwrap();
    // a huge constant mirror step makes the IPeMD update infeasible
    let out = solve_small(
        dir.path(),
        &["--methods", "EG,IPeMD", "--ip-md-step", "1e6"],
    );
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("trace_EG.csv").exists());
    assert!(dir.path().join("trace_IPeMD.csv").exists());
    let s: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["runs"][1]["terminal_status"], "StepInfeasible");
}

#[test]
fn verify_passes_with_documented_count() {
    let out = run(&["verify"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let reports: Vec<OracleReport> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(reports.len(), BATTERY_SIZE);
    assert!(reports.iter().all(|r| r.pass));
}

#[test]
fn verify_reports_injected_fault() {
    let out = run(&["verify", "--inject-fault"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL"));
}

#[test]
fn phantom_is_deterministic_and_formats_agree() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert!(run(&[
            "phantom",
            "--n-side",
            "64",
            "--out",
            d.path().to_str().unwrap()
        ])
        .status
        .success());
    }
    for name in ["phantom.pgm", "phantom.csv"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap()
        );
    }
    let (shape, px) = read_pgm(fs::File::open(a.path().join("phantom.pgm")).unwrap()).unwrap();
    assert_eq!((shape.height, shape.width), (64, 64));
    let (cshape, values) =
        read_image_csv(fs::File::open(a.path().join("phantom.csv")).unwrap()).unwrap();
    assert_eq!(cshape, shape);
    assert_eq!(quantize(&values, 1.0), px);
    assert!(!run(&[
        "phantom",
        "--n-side",
        "3",
        "--out",
        a.path().to_str().unwrap()
    ])
    .status
    .success());
}
