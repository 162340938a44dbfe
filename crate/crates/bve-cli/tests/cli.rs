//! End-to-end checks of the binary: run -> report -> plot, config files, and
//! exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn bve(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bve"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

#[test]
fn run_report_plot_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = bve(
        &[
            "run",
            "--sut",
            "circle",
            "--strategy",
            "SET",
            "--selection",
            "curiosity",
            "--budget-evals",
            "6000",
            "--seed",
            "7",
            "--reps",
            "2",
            "--out",
            "runs",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "run failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("archive cells"));
    let runs: Vec<_> = std::fs::read_dir(dir.path().join("runs"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    // 2 repetitions x (jsonl + csv)
    assert_eq!(runs.len(), 4);

    let out = bve(
        &["report", "--records", "runs", "--out", "report"],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "report failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("SUT circle"));
    assert!(dir.path().join("report/summary_circle.csv").exists());

    let out = bve(
        &[
            "plot",
            "--records",
            "runs",
            "--sut",
            "circle",
            "--out",
            "plots",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "plot failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("plots/circle_before.svg").exists());
    assert!(dir.path().join("plots/circle_after.svg").exists());

    // negative axis limits parse as values, not flags
    let out = bve(
        &[
            "plot",
            "--records",
            "runs",
            "--sut",
            "circle",
            "--xlim",
            "-150,150",
            "--ylim",
            "-150,150",
            "--out",
            "zoomed",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "zoomed plot failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("zoomed/circle_before.svg").exists());
}

#[test]
fn config_file_mirrors_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("exploration.conf"),
        "# strategy configuration\n\
         sut = bmi\n\
         strategy = SE\n\
         selection = fitness\n\
         budget-evals = 3000\n\
         seed = 11\n\
         reps = 1\n\
         out = from_config\n",
    )
    .unwrap();
    let out = bve(&["run", "--config", "exploration.conf"], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir
        .path()
        .join("from_config/bmi_SE-fitness_000.jsonl")
        .exists());

    // flags override the file
    let out = bve(
        &[
            "run",
            "--config",
            "exploration.conf",
            "--out",
            "override_dir",
            "--seed",
            "12",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(dir
        .path()
        .join("override_dir/bmi_SE-fitness_000.jsonl")
        .exists());
}

#[test]
fn config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    // missing budget
    let out = bve(&["run", "--sut", "circle", "--strategy", "S"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    // unknown sut
    let out = bve(
        &[
            "run",
            "--sut",
            "nope",
            "--strategy",
            "S",
            "--budget-evals",
            "10",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    // unknown strategy
    let out = bve(
        &[
            "run",
            "--sut",
            "circle",
            "--strategy",
            "Q",
            "--budget-evals",
            "10",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    // selection on a sampler-only strategy
    let out = bve(
        &[
            "run",
            "--sut",
            "circle",
            "--strategy",
            "S",
            "--selection",
            "uniform",
            "--budget-evals",
            "10",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    // arity-1 plot
    std::fs::create_dir(dir.path().join("runs")).unwrap();
    let out = bve(
        &[
            "run",
            "--sut",
            "bytecount",
            "--strategy",
            "S",
            "--budget-evals",
            "2000",
            "--out",
            "runs",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let out = bve(
        &["plot", "--records", "runs", "--sut", "bytecount"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn report_accepts_imports() {
    let dir = tempfile::tempdir().unwrap();
    let out = bve(
        &[
            "run",
            "--sut",
            "circle",
            "--strategy",
            "S",
            "--budget-evals",
            "4000",
            "--seed",
            "3",
            "--out",
            "runs",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    std::fs::write(
        dir.path().join("baseline.csv"),
        "sut,inputs_a,inputs_b,output_a,output_b\n\
         circle,-79 -9,-80 -10,in,out\n\
         circle,-1 -1,0 0,in,\"DomainError(\"\"Origin\"\")\"\n",
    )
    .unwrap();
    let out = bve(
        &[
            "report",
            "--records",
            "runs",
            "--import",
            "baseline.csv",
            "--out",
            "report",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary = std::fs::read_to_string(dir.path().join("report/summary_circle.csv")).unwrap();
    assert!(summary.contains("import:baseline"));
    assert!(dir.path().join("report/pairwise_circle.csv").exists());
}

#[test]
fn tracer_warns_on_arity_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = bve(
        &[
            "run",
            "--sut",
            "bytecount",
            "--strategy",
            "ST",
            "--budget-evals",
            "2000",
            "--out",
            "runs",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("tracer skipped"), "stderr: {stderr}");
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = bve(&["--help"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("run"));
    assert!(stdout.contains("report"));
    assert!(stdout.contains("plot"));
}
