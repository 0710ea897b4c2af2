//! End-to-end runs of the `cqed` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cqed_cli::csv::{parse, HEADER, PHASE_SPACE_HEADER};
use cqed_cli::{parse_config, CliError};

fn cqed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cqed"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn simulate_writes_one_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "alpha = 1\nbeta = 1\ng = 0.05\nq = 0.05\nsamples = 10\n");
    let out = dir.path().join("out");
    let run = cqed(&["simulate", &cfg, "--out", out.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let text = fs::read_to_string(out.join("a1_b1_g0.05_q0.05.csv")).unwrap();
    assert!(text.starts_with(HEADER));
    let records = parse(&text).unwrap();
    assert_eq!(records.len(), 10);
    assert_eq!(records[9].t, 90.0);
    for r in &records {
        assert!(r.concurrences().iter().all(|c| (0.0..=1.0).contains(c)));
    }
}

#[test]
fn backends_and_truncation_flags_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "alpha = 0.5\nbeta = 0.5\ng = 0.5\nq = 0.5\ntimes = 30, 60, 90\n");
    let tables: Vec<_> = [&["--backend", "branch"][..], &["--backend", "dense", "--truncation", "14,14"][..]]
        .iter()
        .enumerate()
        .map(|(k, flags)| {
            let out = dir.path().join(format!("out{k}"));
            let mut args = vec!["simulate", cfg.as_str(), "--out", out.to_str().unwrap()];
            args.extend_from_slice(flags);
            assert!(cqed(&args).status.success());
            parse(&fs::read_to_string(out.join("a0.5_b0.5_g0.5_q0.5.csv")).unwrap()).unwrap()
        })
        .collect();
    for (a, b) in tables[0].iter().zip(&tables[1]) {
        for (x, y) in a.concurrences().iter().zip(b.concurrences()) {
            assert!((x - y).abs() < 1e-8);
        }
    }
}

#[test]
fn sweep_names_files_by_tuple() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "alpha = 0.5, 1\nbeta = 1\ng = 0, 0.05\nq = 0\nsamples = 4\n");
    let out = dir.path().join("sweep");
    let run = cqed(&["sweep", &cfg, "--out", out.to_str().unwrap(), "--jobs", "2"]);
    assert!(run.status.success());
    let mut names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        ["a0.5_b1_g0.05_q0.csv", "a0.5_b1_g0_q0.csv", "a1_b1_g0.05_q0.csv", "a1_b1_g0_q0.csv"]
    );
}

#[test]
fn configuration_errors_exit_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    for text in ["colour = blue\n", "gamma_1 = -1\n", "Omega_1 = 0.025\nDelta_1 = 0.1\nomega_1 = 5e-3\n"] {
        let cfg = write_config(dir.path(), text);
        let run = cqed(&["simulate", &cfg, "--out", dir.path().to_str().unwrap()]);
        assert_eq!(run.status.code(), Some(2), "{text}");
        assert!(String::from_utf8_lossy(&run.stderr).contains("line"));
    }
    assert_eq!(cqed(&["preset", "fig9"]).status.code(), Some(2));
    assert_eq!(cqed(&["simulate", "x.cfg", "--truncation", "3"]).status.code(), Some(2));
}

#[test]
fn inconsistent_dispersive_frequency_names_the_key() {
    match parse_config("Omega_1 = 0.025\nDelta_1 = 0.1\n# ok so far\nomega_1 = 5e-3\n") {
        Err(CliError::Config { key, line, .. }) => assert_eq!((key.as_str(), line), ("omega_1", 4)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn quick_validation_passes() {
    let run = cqed(&["validate"]);
    let report = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "{report}");
    assert_eq!(report.lines().filter(|l| l.starts_with("PASS")).count(), 3);
}

#[test]
fn phase_space_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "alpha = 1\ng = 0.2\nsamples = 31\n");
    let run = cqed(&["phase-space", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(run.status.success());
    let text = fs::read_to_string(dir.path().join("phase_space.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(PHASE_SPACE_HEADER));
    assert_eq!(lines.count(), 31);
}

#[test]
fn presets_are_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<_> = ["a", "b"]
        .iter()
        .map(|tag| {
            let out = dir.path().join(tag);
            let jobs = if *tag == "a" { "1" } else { "3" };
            assert!(cqed(&["preset", "fig4", "--out", out.to_str().unwrap(), "--jobs", jobs]).status.success());
            out.join("fig4")
        })
        .collect();
    let mut files = 0;
    for entry in fs::read_dir(&runs[0]).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(fs::read(runs[0].join(&name)).unwrap(), fs::read(runs[1].join(&name)).unwrap());
        files += 1;
    }
    assert_eq!(files, 4);
}
