//! TOML sweep configuration.
//!
//! ```toml
//! workers = 2
//!
//! [scenario]
//! protocol = "qpsk"      # or "8psk"
//! strategy = "ra"        # "ra", "cross" or "8ra"
//! detector = "untrusted" # or "trusted" (then eta_d and nu_el are required)
//! xi = 0.01
//! beta = 0.95
//!
//! [axes]
//! distance_km = [50.0]
//! alpha = 0.7
//! delta_r = { start = 0.0, stop = 0.7, step = 0.05 }
//!
//! [output]
//! csv = "results.csv"
//! jsonl = "results.jsonl"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use pskqkd::channel::{ChannelParams, DetectorModel, DEFAULT_LOSS_EXPONENT};
use pskqkd::keyrate::{FwConfig, ScenarioConfig};
use pskqkd::operators::{RegionParams, RegionStrategy, TrustedDetectorParams};
use pskqkd::sdp::IpmOptions;

use crate::error::{io_err, CliError, Result};

/// Largest grid a single config may describe.
pub const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Protocol {
    #[serde(rename = "qpsk", alias = "QPSK")]
    Qpsk,
    #[serde(rename = "8psk", alias = "8PSK")]
    Psk8,
}

impl Protocol {
    pub fn n_states(&self) -> usize {
        match self {
            Protocol::Qpsk => 4,
            Protocol::Psk8 => 8,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Protocol::Qpsk => "QPSK",
            Protocol::Psk8 => "8PSK",
        }
    }

    fn default_cutoff(&self) -> usize {
        match self {
            Protocol::Qpsk => 12,
            Protocol::Psk8 => 14,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StrategyName {
    #[serde(rename = "ra", alias = "raPS")]
    Ra,
    #[serde(rename = "cross", alias = "cPS")]
    Cross,
    #[serde(rename = "8ra", alias = "8raPS")]
    Ra8,
}

impl StrategyName {
    pub fn strategy(&self) -> RegionStrategy {
        match self {
            StrategyName::Ra => RegionStrategy::RadialAngular,
            StrategyName::Cross => RegionStrategy::Cross,
            StrategyName::Ra8 => RegionStrategy::RadialAngular8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    #[default]
    Untrusted,
    Trusted,
}

fn default_beta() -> f64 {
    0.95
}

fn default_loss() -> f64 {
    DEFAULT_LOSS_EXPONENT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioTemplate {
    pub protocol: Protocol,
    pub strategy: StrategyName,
    #[serde(default)]
    pub detector: DetectorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_el: Option<f64>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    pub xi: f64,
    #[serde(default = "default_loss")]
    pub loss_exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    pub eps_fw: f64,
    pub eps_tilde: f64,
    pub line_search_tol: f64,
    pub tol_feas: f64,
    pub tol_gap: f64,
    pub ipm_max_iter: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let fw = FwConfig::default();
        Self {
            max_iters: None,
            eps_fw: fw.eps_fw,
            eps_tilde: fw.eps_tilde,
            line_search_tol: fw.line_search_tol,
            tol_feas: fw.ipm.tol_feas,
            tol_gap: fw.ipm.tol_gap,
            ipm_max_iter: fw.ipm.max_iter,
        }
    }
}

/// A list, a single value, or an inclusive range with a fixed step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Single(f64),
    Values(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Default for Axis {
    fn default() -> Self {
        Axis::Single(0.0)
    }
}

/// Round to 12 significant digits so that ranges like 0.1·3 print as 0.3.
fn tidy(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

impl Axis {
    pub fn values(&self) -> Result<Vec<f64>> {
        let v = match self {
            Axis::Single(x) => vec![*x],
            Axis::Values(v) => v.clone(),
            Axis::Range { start, stop, step } => {
                if !(*step > 0.0) || !(stop >= start) {
                    return Err(CliError::Config(format!(
                        "range start={start} stop={stop} step={step} is empty or ill-formed"
                    )));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                if n >= MAX_GRID_POINTS {
                    return Err(CliError::Config("range has too many points".into()));
                }
                (0..=n).map(|i| tidy(start + i as f64 * step)).collect()
            }
        };
        if v.is_empty() {
            return Err(CliError::Config("empty axis".into()));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Config("non-finite axis value".into()));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axes {
    pub distance_km: Axis,
    pub alpha: Axis,
    #[serde(default)]
    pub delta_r: Axis,
    #[serde(default)]
    pub delta_a: Axis,
    #[serde(default)]
    pub delta_c: Axis,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jsonl: Option<PathBuf>,
}

fn default_workers() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_workers")]
    pub workers: usize,
    pub scenario: ScenarioTemplate,
    #[serde(default)]
    pub solver: SolverSection,
    pub axes: Axes,
    #[serde(default)]
    pub output: OutputSection,
}

/// One point of the sweep grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub index: usize,
    pub distance_km: f64,
    pub alpha: f64,
    pub delta_r: f64,
    pub delta_a: f64,
    pub delta_c: f64,
}

impl SweepConfig {
    pub fn cutoff(&self) -> usize {
        self.scenario
            .cutoff
            .unwrap_or_else(|| self.scenario.protocol.default_cutoff())
    }

    pub fn fw_config(&self) -> FwConfig {
        let s = &self.solver;
        let base = FwConfig::for_states(self.scenario.protocol.n_states());
        FwConfig {
            max_iters: s.max_iters.unwrap_or(base.max_iters),
            eps_fw: s.eps_fw,
            eps_tilde: s.eps_tilde,
            line_search_tol: s.line_search_tol,
            ipm: IpmOptions {
                tol_feas: s.tol_feas,
                tol_gap: s.tol_gap,
                max_iter: s.ipm_max_iter,
            },
        }
    }

    pub fn detector(&self) -> Result<DetectorModel> {
        match self.scenario.detector {
            DetectorKind::Untrusted => Ok(DetectorModel::Untrusted),
            DetectorKind::Trusted => {
                let (Some(eta_d), Some(nu_el)) = (self.scenario.eta_d, self.scenario.nu_el) else {
                    return Err(CliError::Config(
                        "trusted detector needs scenario.eta_d and scenario.nu_el".into(),
                    ));
                };
                Ok(DetectorModel::Trusted(TrustedDetectorParams::new(eta_d, nu_el)?))
            }
        }
    }

    /// Every default filled in, for echoing next to the results.
    pub fn resolved(&self) -> SweepConfig {
        let mut out = self.clone();
        out.scenario.cutoff = Some(self.cutoff());
        out.solver.max_iters = Some(self.fw_config().max_iters);
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        let strategy = self.scenario.strategy.strategy();
        if strategy.n_symbols() != self.scenario.protocol.n_states() {
            return Err(CliError::Config(format!(
                "strategy {} does not fit protocol {}",
                strategy.label(),
                self.scenario.protocol.label()
            )));
        }
        let unused_nonzero = |a: &Axis, name: &str| -> Result<()> {
            if a.values()?.iter().any(|&v| v != 0.0) {
                return Err(CliError::Config(format!(
                    "axes.{name} has no effect for strategy {}",
                    strategy.label()
                )));
            }
            Ok(())
        };
        match strategy {
            RegionStrategy::Cross => {
                unused_nonzero(&self.axes.delta_r, "delta_r")?;
                unused_nonzero(&self.axes.delta_a, "delta_a")?;
            }
            _ => unused_nonzero(&self.axes.delta_c, "delta_c")?,
        }
        self.detector()?;
        self.fw_config().validate()?;
        let n = self.grid_len()?;
        if n > MAX_GRID_POINTS {
            return Err(CliError::Config(format!("grid has {n} points (limit {MAX_GRID_POINTS})")));
        }
        for p in self.grid()? {
            self.scenario(&p)?.validate()?;
        }
        Ok(())
    }

    fn axes_values(&self) -> Result<[Vec<f64>; 5]> {
        let a = &self.axes;
        Ok([
            a.distance_km.values()?,
            a.alpha.values()?,
            a.delta_r.values()?,
            a.delta_a.values()?,
            a.delta_c.values()?,
        ])
    }

    pub fn grid_len(&self) -> Result<usize> {
        Ok(self
            .axes_values()?
            .iter()
            .fold(1usize, |acc, v| acc.saturating_mul(v.len())))
    }

    /// Grid points with the distance varying slowest and Δc fastest.
    pub fn grid(&self) -> Result<Vec<GridPoint>> {
        let [ls, alphas, drs, das, dcs] = self.axes_values()?;
        let mut out = Vec::new();
        for &l in &ls {
            for &a in &alphas {
                for &dr in &drs {
                    for &da in &das {
                        for &dc in &dcs {
                            out.push(GridPoint {
                                index: out.len(),
                                distance_km: l,
                                alpha: a,
                                delta_r: dr,
                                delta_a: da,
                                delta_c: dc,
                            });
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn scenario(&self, p: &GridPoint) -> Result<ScenarioConfig> {
        let s = &self.scenario;
        let mut channel = ChannelParams::new(p.distance_km, s.xi)?;
        channel.loss_exponent = s.loss_exponent;
        channel.validate()?;
        Ok(ScenarioConfig {
            n_states: s.protocol.n_states(),
            amplitude: p.alpha,
            probabilities: None,
            channel,
            detector: self.detector()?,
            strategy: s.strategy.strategy(),
            region: RegionParams {
                delta_r: p.delta_r,
                delta_a: p.delta_a,
                delta_c: p.delta_c,
            },
            cutoff: self.cutoff(),
            beta: s.beta,
            solver: self.fw_config(),
        })
    }
}

/// Apply `a.b.c=value` to a TOML tree. The value is parsed as TOML and
/// taken as a bare string when that fails.
fn apply_override(root: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Override(spec.to_string()))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(CliError::Override(spec.to_string()));
    }
    let value = match toml::from_str::<toml::Table>(&format!("v = {}", raw.trim())) {
        Ok(mut t) => t.remove("v").unwrap_or(toml::Value::String(raw.trim().into())),
        Err(_) => toml::Value::String(raw.trim().into()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    let mut node = root;
    for part in &parts[..parts.len() - 1] {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Override(format!("{spec}: `{part}` is not a table")))?;
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

pub fn parse_config(text: &str, overrides: &[String]) -> Result<SweepConfig> {
    let mut table: toml::Table = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let cfg: SweepConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path, overrides: &[String]) -> Result<SweepConfig> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_config(&text, overrides).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}
