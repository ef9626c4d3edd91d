//! Grid execution with resumable result files.

use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use pskqkd::keyrate::{compute_key_rate_detailed, FwIterate, KeyRateResult, ScenarioConfig};

use crate::config::{GridPoint, SweepConfig};
use crate::error::{io_err, CliError, Result};
use crate::row::{parse_rows, ResultRow, COLUMNS};

/// Full diagnostics for one grid point, one JSON object per line.
#[derive(Debug, Clone, Serialize)]
pub struct PointRecord {
    pub index: usize,
    pub scenario: ScenarioConfig,
    pub result: Option<KeyRateResult>,
    pub error: Option<String>,
    pub fw_trace: Vec<FwIterate>,
    pub wallclock_s: f64,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    /// Rows of the whole grid, in grid order.
    pub rows: Vec<ResultRow>,
    pub computed: usize,
    pub skipped: usize,
}

impl SweepOutcome {
    pub fn all_optimal(&self) -> bool {
        self.rows.iter().all(|r| r.status == "optimal")
    }
}

fn run_point(cfg: &SweepConfig, p: &GridPoint) -> (ResultRow, PointRecord) {
    let start = Instant::now();
    let scenario = match cfg.scenario(p) {
        Ok(s) => s,
        Err(e) => panic!("grid point {} was validated but failed to build: {e}", p.index),
    };
    let base = ResultRow::from_scenario(&scenario, cfg.scenario.protocol.label());
    let outcome = std::panic::catch_unwind(|| compute_key_rate_detailed(&scenario));
    let secs = start.elapsed().as_secs_f64();
    let (row, result, error, trace) = match outcome {
        Ok(Ok((r, art))) => (base.with_result(&r), Some(r), None, art.fw_trace),
        Ok(Err(e)) => (base, None, Some(e.to_string()), vec![]),
        Err(_) => (base, None, Some("panic during computation".into()), vec![]),
    };
    let row = ResultRow {
        wallclock_s: secs,
        ..row
    };
    let rec = PointRecord {
        index: p.index,
        scenario,
        result,
        error,
        fw_trace: trace,
        wallclock_s: secs,
    };
    (row, rec)
}

/// Run every grid point whose knob tuple is not in `existing`. `sink` sees
/// each new row as soon as it is done, in completion order.
pub fn run_sweep(
    cfg: &SweepConfig,
    existing: &[ResultRow],
    sink: impl Fn(&ResultRow, &PointRecord) + Sync,
) -> Result<SweepOutcome> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let mut done: HashMap<Vec<String>, ResultRow> = HashMap::new();
    let mut keyed = Vec::with_capacity(grid.len());
    for p in &grid {
        let s = cfg.scenario(p)?;
        keyed.push(ResultRow::from_scenario(&s, cfg.scenario.protocol.label()).key());
    }
    for r in existing {
        done.insert(r.key(), r.clone());
    }
    let pending: Vec<&GridPoint> = grid.iter().filter(|p| !done.contains_key(&keyed[p.index])).collect();
    let skipped = grid.len() - pending.len();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let fresh: Vec<(usize, ResultRow)> = pool.install(|| {
        pending
            .par_iter()
            .map(|p| {
                let (row, rec) = run_point(cfg, p);
                sink(&row, &rec);
                (p.index, row)
            })
            .collect()
    });
    let computed = fresh.len();
    let mut by_index: HashMap<usize, ResultRow> = fresh.into_iter().collect();
    let rows = grid
        .iter()
        .map(|p| {
            by_index
                .remove(&p.index)
                .or_else(|| done.get(&keyed[p.index]).cloned())
                .expect("every grid point is either computed or resumed")
        })
        .collect();
    Ok(SweepOutcome {
        rows,
        computed,
        skipped,
    })
}

fn partial_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".partial");
    PathBuf::from(s)
}

fn sidecar_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".config.toml");
    PathBuf::from(s)
}

/// Rows of a possibly truncated CSV file; a torn last line is dropped.
fn read_lenient(path: &Path) -> Result<Vec<ResultRow>> {
    if !path.exists() {
        return Ok(vec![]);
    }
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let complete = match text.rfind('\n') {
        Some(i) => &text[..=i],
        None => "",
    };
    if complete.is_empty() {
        return Ok(vec![]);
    }
    parse_rows(complete.as_bytes())
}

/// Run a sweep against `csv`, resuming from rows already stored there (or
/// in its `.partial` companion), and rewrite it in grid order at the end.
pub fn run_sweep_to_files(cfg: &SweepConfig, csv: &Path, jsonl: Option<&Path>) -> Result<SweepOutcome> {
    let partial = partial_path(csv);
    let mut existing = read_lenient(csv)?;
    existing.extend(read_lenient(&partial)?);

    let resolved = toml::to_string(&cfg.resolved()).map_err(|e| CliError::Config(e.to_string()))?;
    let sidecar = sidecar_path(csv);
    std::fs::write(&sidecar, resolved).map_err(io_err(&sidecar))?;

    let new_partial = !partial.exists() || std::fs::metadata(&partial).map(|m| m.len() == 0).unwrap_or(true);
    let mut pf = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&partial)
        .map_err(io_err(&partial))?;
    if new_partial {
        writeln!(pf, "{}", COLUMNS.join(",")).map_err(io_err(&partial))?;
    }
    let jf = match jsonl {
        Some(p) => Some(
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(p)
                .map_err(io_err(p))?,
        ),
        None => None,
    };
    let files = Mutex::new((pf, jf));
    let outcome = run_sweep(cfg, &existing, |row, rec| {
        let mut g = files.lock().expect("writer lock");
        let mut line = Vec::new();
        {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut line);
            let _ = w.write_record(row.to_record());
            let _ = w.flush();
        }
        let _ = g.0.write_all(&line);
        let _ = g.0.flush();
        if let Some(j) = g.1.as_mut() {
            if let Ok(s) = serde_json::to_string(rec) {
                let _ = writeln!(j, "{s}");
            }
        }
    })?;
    drop(files);

    let tmp = {
        let mut s = csv.as_os_str().to_owned();
        s.push(".tmp");
        PathBuf::from(s)
    };
    let f = std::fs::File::create(&tmp).map_err(io_err(&tmp))?;
    crate::row::write_rows(f, &outcome.rows)?;
    std::fs::rename(&tmp, csv).map_err(io_err(csv))?;
    std::fs::remove_file(&partial).map_err(io_err(&partial))?;
    Ok(outcome)
}
