//! One CSV row per grid point.

use std::path::Path;

use pskqkd::channel::DetectorModel;
use pskqkd::keyrate::{KeyRateResult, ScenarioConfig};

use crate::error::{io_err, CliError, Result};

pub const COLUMNS: [&str; 25] = [
    "protocol",
    "n_states",
    "L_km",
    "eta",
    "xi",
    "beta",
    "detector_kind",
    "eta_d",
    "nu_el",
    "strategy",
    "alpha",
    "delta_r",
    "delta_a",
    "delta_c",
    "Nc",
    "step1_upper",
    "step2_lower",
    "p_pass",
    "delta_ec",
    "eps_prime",
    "final_rate",
    "reported_rate",
    "iterations",
    "status",
    "wallclock_s",
];

/// Number of leading columns that identify a grid point.
pub const KEY_COLUMNS: usize = 15;

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub protocol: String,
    pub n_states: usize,
    pub l_km: f64,
    pub eta: f64,
    pub xi: f64,
    pub beta: f64,
    pub detector_kind: String,
    pub eta_d: f64,
    pub nu_el: f64,
    pub strategy: String,
    pub alpha: f64,
    pub delta_r: f64,
    pub delta_a: f64,
    pub delta_c: f64,
    pub nc: usize,
    pub step1_upper: f64,
    pub step2_lower: f64,
    pub p_pass: f64,
    pub delta_ec: f64,
    pub eps_prime: f64,
    pub final_rate: f64,
    pub reported_rate: f64,
    pub iterations: usize,
    pub status: String,
    pub wallclock_s: f64,
}

/// `%.12g`-style formatting.
pub fn fmt_g(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let e: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..12).contains(&e) {
        format!("{}e{}{:02}", trim(mant), if e < 0 { '-' } else { '+' }, e.abs())
    } else {
        trim(&format!("{:.*}", (11 - e) as usize, x))
    }
}

impl ResultRow {
    /// Row for a scenario, with result fields unset.
    pub fn from_scenario(s: &ScenarioConfig, protocol: &str) -> Self {
        let (kind, eta_d, nu_el) = match &s.detector {
            DetectorModel::Untrusted => ("untrusted", 1.0, 0.0),
            DetectorModel::Trusted(d) => ("trusted", d.eta_d, d.nu_el),
        };
        Self {
            protocol: protocol.to_string(),
            n_states: s.n_states,
            l_km: s.channel.distance_km,
            eta: s.channel.eta(),
            xi: s.channel.excess_noise,
            beta: s.beta,
            detector_kind: kind.into(),
            eta_d,
            nu_el,
            strategy: s.strategy.label().into(),
            alpha: s.amplitude,
            delta_r: s.region.delta_r,
            delta_a: s.region.delta_a,
            delta_c: s.region.delta_c,
            nc: s.cutoff,
            step1_upper: f64::NAN,
            step2_lower: f64::NAN,
            p_pass: f64::NAN,
            delta_ec: f64::NAN,
            eps_prime: f64::NAN,
            final_rate: f64::NAN,
            reported_rate: f64::NAN,
            iterations: 0,
            status: "error".into(),
            wallclock_s: 0.0,
        }
    }

    pub fn with_result(mut self, r: &KeyRateResult) -> Self {
        self.step1_upper = r.step1_upper;
        self.step2_lower = r.step2_lower;
        self.p_pass = r.p_pass;
        self.delta_ec = r.delta_ec;
        self.eps_prime = r.eps_prime;
        self.final_rate = r.final_rate;
        self.reported_rate = r.reported_rate;
        self.iterations = r.iterations;
        self.status = r.status.label().into();
        self
    }

    pub fn to_record(&self) -> Vec<String> {
        vec![
            self.protocol.clone(),
            self.n_states.to_string(),
            fmt_g(self.l_km),
            fmt_g(self.eta),
            fmt_g(self.xi),
            fmt_g(self.beta),
            self.detector_kind.clone(),
            fmt_g(self.eta_d),
            fmt_g(self.nu_el),
            self.strategy.clone(),
            fmt_g(self.alpha),
            fmt_g(self.delta_r),
            fmt_g(self.delta_a),
            fmt_g(self.delta_c),
            self.nc.to_string(),
            fmt_g(self.step1_upper),
            fmt_g(self.step2_lower),
            fmt_g(self.p_pass),
            fmt_g(self.delta_ec),
            fmt_g(self.eps_prime),
            fmt_g(self.final_rate),
            fmt_g(self.reported_rate),
            self.iterations.to_string(),
            self.status.clone(),
            fmt_g(self.wallclock_s),
        ]
    }

    pub fn from_record(r: &csv::StringRecord) -> Result<Self> {
        if r.len() != COLUMNS.len() {
            return Err(CliError::Row(format!("expected {} fields, got {}", COLUMNS.len(), r.len())));
        }
        let f = |i: usize| -> Result<f64> {
            r[i].parse()
                .map_err(|_| CliError::Row(format!("{}: `{}` is not a number", COLUMNS[i], &r[i])))
        };
        let u = |i: usize| -> Result<usize> {
            r[i].parse()
                .map_err(|_| CliError::Row(format!("{}: `{}` is not an integer", COLUMNS[i], &r[i])))
        };
        Ok(Self {
            protocol: r[0].to_string(),
            n_states: u(1)?,
            l_km: f(2)?,
            eta: f(3)?,
            xi: f(4)?,
            beta: f(5)?,
            detector_kind: r[6].to_string(),
            eta_d: f(7)?,
            nu_el: f(8)?,
            strategy: r[9].to_string(),
            alpha: f(10)?,
            delta_r: f(11)?,
            delta_a: f(12)?,
            delta_c: f(13)?,
            nc: u(14)?,
            step1_upper: f(15)?,
            step2_lower: f(16)?,
            p_pass: f(17)?,
            delta_ec: f(18)?,
            eps_prime: f(19)?,
            final_rate: f(20)?,
            reported_rate: f(21)?,
            iterations: u(22)?,
            status: r[23].to_string(),
            wallclock_s: f(24)?,
        })
    }

    /// Formatted knob columns; equal keys mean the same grid point.
    pub fn key(&self) -> Vec<String> {
        self.to_record()[..KEY_COLUMNS].to_vec()
    }

    /// Value of a column by name, as written to the CSV.
    pub fn field(&self, name: &str) -> Option<String> {
        COLUMNS
            .iter()
            .position(|c| *c == name)
            .map(|i| self.to_record()[i].clone())
    }

    /// Finished with a usable lower bound.
    pub fn usable(&self) -> bool {
        (self.status == "optimal" || self.status == "not_converged") && self.final_rate.is_finite()
    }

    pub fn is_baseline(&self) -> bool {
        self.delta_r == 0.0 && self.delta_a == 0.0 && self.delta_c == 0.0
    }
}

pub fn write_rows<W: std::io::Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in rows {
        w.write_record(r.to_record())?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn parse_rows<R: std::io::Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(COLUMNS.iter().copied()) {
        return Err(CliError::Row("unexpected header".into()));
    }
    rd.records()
        .map(|r| ResultRow::from_record(&r?))
        .collect()
}

pub fn read_rows(path: &Path) -> Result<Vec<ResultRow>> {
    let f = std::fs::File::open(path).map_err(io_err(path))?;
    parse_rows(f)
}
