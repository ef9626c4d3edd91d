use std::sync::Mutex;

use pskqkd_cli::row::parse_rows;
use pskqkd_cli::{parse_config, read_rows, run_sweep, run_sweep_to_files, ResultRow, SweepConfig};

mod common;

fn tiny(extra: &[&str]) -> SweepConfig {
    let o: Vec<String> = extra.iter().map(|s| s.to_string()).collect();
    parse_config(common::TINY, &o).unwrap()
}

fn without_clock(rows: &[ResultRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            let mut rec = r.to_record();
            rec.pop();
            rec
        })
        .collect()
}

#[test]
fn single_point_gives_one_row() {
    let cfg = tiny(&["axes.delta_r=0.3"]);
    let seen = Mutex::new(Vec::new());
    let out = run_sweep(&cfg, &[], |r, rec| {
        seen.lock().unwrap().push((r.clone(), rec.fw_trace.len()));
    })
    .unwrap();
    assert_eq!(out.rows.len(), 1);
    assert_eq!(out.computed, 1);
    assert_eq!(out.skipped, 0);
    let r = &out.rows[0];
    assert_eq!(r.protocol, "QPSK");
    assert_eq!(r.nc, 5);
    assert_eq!(r.delta_r, 0.3);
    assert!(r.usable(), "{}", r.status);
    assert!(r.step2_lower <= r.step1_upper + 1e-9);
    assert!(r.p_pass > 0.0 && r.p_pass < 1.0);
    assert!(r.final_rate > 0.0);
    let seen = seen.into_inner().unwrap();
    assert_eq!(seen.len(), 1);
    assert_eq!(seen[0].1, r.iterations);
}

#[test]
fn deterministic_and_worker_independent() {
    let one = run_sweep(&tiny(&["workers=1"]), &[], |_, _| {}).unwrap();
    let again = run_sweep(&tiny(&["workers=1"]), &[], |_, _| {}).unwrap();
    let two = run_sweep(&tiny(&["workers=2"]), &[], |_, _| {}).unwrap();
    assert_eq!(one.rows.len(), 2);
    assert_eq!(without_clock(&one.rows), without_clock(&again.rows));
    assert_eq!(without_clock(&one.rows), without_clock(&two.rows));
    assert!(one.rows[0].is_baseline());
}

#[test]
fn resume_skips_finished_points() {
    let cfg = tiny(&[]);
    let first = run_sweep(&cfg, &[], |_, _| {}).unwrap();
    let again = run_sweep(&cfg, &first.rows, |_, _| panic!("nothing to do")).unwrap();
    assert_eq!(again.computed, 0);
    assert_eq!(again.skipped, 2);
    assert_eq!(again.rows, first.rows);
    // extending an axis computes only the new point
    let wider = tiny(&["axes.delta_r=[0.0, 0.3, 0.5]"]);
    let more = run_sweep(&wider, &first.rows, |_, _| {}).unwrap();
    assert_eq!(more.computed, 1);
    assert_eq!(more.rows[..2], first.rows[..]);
    assert_eq!(more.rows[2].delta_r, 0.5);
}

#[test]
fn failing_point_does_not_stop_sweep() {
    // an angular cut wider than the wedge is rejected at run time
    let cfg = tiny(&["axes.delta_r=0.0", "axes.delta_a=[0.0, 0.9]"]);
    let out = run_sweep(&cfg, &[], |_, _| {}).unwrap();
    assert_eq!(out.rows.len(), 2);
    assert!(out.rows[0].usable());
    assert_eq!(out.rows[1].status, "error");
    assert!(!out.rows[1].usable());
    assert!(!out.all_optimal());
}

#[test]
fn files_resume_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let jsonl = dir.path().join("out.jsonl");
    let cfg = tiny(&[]);
    let first = run_sweep_to_files(&cfg, &csv, Some(&jsonl)).unwrap();
    assert_eq!(first.computed, 2);
    let rows = read_rows(&csv).unwrap();
    let recs = |v: &[ResultRow]| v.iter().map(ResultRow::to_record).collect::<Vec<_>>();
    assert_eq!(recs(&rows), recs(&first.rows));
    assert!(!dir.path().join("out.csv.partial").exists());
    let sidecar = std::fs::read_to_string(dir.path().join("out.csv.config.toml")).unwrap();
    let echoed = parse_config(&sidecar, &[]).unwrap();
    assert_eq!(echoed, cfg.resolved());
    let lines: Vec<serde_json::Value> = std::fs::read_to_string(&jsonl)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    for l in &lines {
        assert!(l["fw_trace"].as_array().is_some_and(|t| !t.is_empty()));
        assert!(l["scenario"].is_object());
    }

    let again = run_sweep_to_files(&cfg, &csv, Some(&jsonl)).unwrap();
    assert_eq!(again.computed, 0);
    assert_eq!(read_rows(&csv).unwrap(), rows);
}

#[test]
fn partial_file_is_picked_up() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let cfg = tiny(&[]);
    let full = run_sweep(&cfg, &[], |_, _| {}).unwrap();
    // simulate an interrupted run: one finished row plus a torn line
    let mut buf = Vec::new();
    pskqkd_cli::write_rows(&mut buf, &full.rows[1..]).unwrap();
    buf.extend_from_slice(b"QPSK,4,20,0.");
    std::fs::write(dir.path().join("out.csv.partial"), &buf).unwrap();
    let out = run_sweep_to_files(&cfg, &csv, None).unwrap();
    assert_eq!(out.computed, 1);
    assert_eq!(out.skipped, 1);
    let text = std::fs::read(&csv).unwrap();
    let rows = parse_rows(text.as_slice()).unwrap();
    assert_eq!(without_clock(&rows), without_clock(&full.rows));
}
