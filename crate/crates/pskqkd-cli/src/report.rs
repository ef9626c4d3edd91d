//! Per-group summaries: best rate, its p_pass, and the break-even p_pass
//! where the postselected rate falls back to the rate without postselection.

use std::collections::BTreeMap;

use crate::error::{CliError, Result};
use crate::row::{fmt_g, ResultRow, COLUMNS};

/// Knob columns that, together, select one curve over the postselection
/// parameters.
pub const DEFAULT_GROUP_BY: [&str; 11] = [
    "protocol",
    "n_states",
    "L_km",
    "xi",
    "beta",
    "detector_kind",
    "eta_d",
    "nu_el",
    "strategy",
    "alpha",
    "Nc",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub group: Vec<(String, String)>,
    pub n_rows: usize,
    pub n_failed: usize,
    pub best_rate: f64,
    pub best_p_pass: f64,
    pub best_delta_r: f64,
    pub best_delta_a: f64,
    pub best_delta_c: f64,
    /// Rate of the row without postselection, if the group has one.
    pub baseline_rate: Option<f64>,
    pub break_even_p_pass: Option<f64>,
    /// The break-even point lies strictly between two grid points.
    pub interpolated: bool,
    pub status: String,
}

/// Crossing of the baseline at the lowest p_pass: rows are ordered by
/// decreasing p_pass and the last sign change from ≥ 0 to < 0 is taken.
fn break_even(rows: &[&ResultRow], baseline: f64) -> Option<(f64, bool)> {
    let mut pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.p_pass, r.final_rate - baseline)).collect();
    pts.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut found = None;
    for w in pts.windows(2) {
        let ((p0, d0), (p1, d1)) = (w[0], w[1]);
        if d0 >= 0.0 && d1 < 0.0 {
            if d0 == 0.0 {
                found = Some((p0, false));
            } else {
                found = Some((p0 + (p1 - p0) * d0 / (d0 - d1), true));
            }
        }
    }
    found
}

fn summarize(group: Vec<(String, String)>, rows: &[&ResultRow]) -> SummaryRow {
    let usable: Vec<&ResultRow> = rows.iter().copied().filter(|r| r.usable()).collect();
    let mut out = SummaryRow {
        group,
        n_rows: rows.len(),
        n_failed: rows.len() - usable.len(),
        best_rate: f64::NAN,
        best_p_pass: f64::NAN,
        best_delta_r: f64::NAN,
        best_delta_a: f64::NAN,
        best_delta_c: f64::NAN,
        baseline_rate: None,
        break_even_p_pass: None,
        interpolated: false,
        status: "ok".into(),
    };
    let Some(best) = usable
        .iter()
        .copied()
        .reduce(|a, b| if b.final_rate > a.final_rate { b } else { a })
    else {
        out.status = "all_failed".into();
        return out;
    };
    out.best_rate = best.reported_rate;
    out.best_p_pass = best.p_pass;
    out.best_delta_r = best.delta_r;
    out.best_delta_a = best.delta_a;
    out.best_delta_c = best.delta_c;
    out.baseline_rate = usable
        .iter()
        .filter(|r| r.is_baseline())
        .map(|r| r.final_rate)
        .reduce(f64::max);
    match out.baseline_rate {
        Some(b) => {
            if let Some((p, interp)) = break_even(&usable, b) {
                out.break_even_p_pass = Some(p);
                out.interpolated = interp;
            }
        }
        None => out.status = "no_baseline".into(),
    }
    out
}

/// Group rows by the named columns and summarize each group.
pub fn report_best(rows: &[ResultRow], group_by: &[&str]) -> Result<Vec<SummaryRow>> {
    if rows.is_empty() {
        return Err(CliError::Row("no rows to summarize".into()));
    }
    for g in group_by {
        if !COLUMNS.contains(g) {
            return Err(CliError::Row(format!("unknown column `{g}`")));
        }
    }
    let mut groups: BTreeMap<Vec<String>, Vec<(usize, &ResultRow)>> = BTreeMap::new();
    for (i, r) in rows.iter().enumerate() {
        let key = group_by.iter().map(|c| r.field(c).unwrap_or_default()).collect();
        groups.entry(key).or_default().push((i, r));
    }
    // groups in order of first appearance
    let mut ordered: Vec<(Vec<String>, Vec<(usize, &ResultRow)>)> = groups.into_iter().collect();
    ordered.sort_by_key(|(_, v)| v[0].0);
    Ok(ordered
        .into_iter()
        .map(|(key, v)| {
            let group = group_by.iter().map(|c| c.to_string()).zip(key).collect();
            let rs: Vec<&ResultRow> = v.into_iter().map(|(_, r)| r).collect();
            summarize(group, &rs)
        })
        .collect())
}

pub fn write_summary<W: std::io::Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if let Some(first) = rows.first() {
        let mut header: Vec<String> = first.group.iter().map(|(k, _)| k.clone()).collect();
        header.extend(
            [
                "n_rows",
                "n_failed",
                "best_rate",
                "best_p_pass",
                "best_delta_r",
                "best_delta_a",
                "best_delta_c",
                "baseline_rate",
                "break_even_p_pass",
                "interpolated",
                "status",
            ]
            .iter()
            .map(|s| s.to_string()),
        );
        w.write_record(&header)?;
    }
    let opt = |v: Option<f64>| v.map(fmt_g).unwrap_or_default();
    for r in rows {
        let mut rec: Vec<String> = r.group.iter().map(|(_, v)| v.clone()).collect();
        rec.extend([
            r.n_rows.to_string(),
            r.n_failed.to_string(),
            fmt_g(r.best_rate),
            fmt_g(r.best_p_pass),
            fmt_g(r.best_delta_r),
            fmt_g(r.best_delta_a),
            fmt_g(r.best_delta_c),
            opt(r.baseline_rate),
            opt(r.break_even_p_pass),
            r.interpolated.to_string(),
            r.status.clone(),
        ]);
        w.write_record(&rec)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
