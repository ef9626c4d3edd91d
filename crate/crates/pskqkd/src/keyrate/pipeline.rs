//! One scenario end to end.

use serde::{Deserialize, Serialize};

use super::maps::{build_maps, PostprocessingMaps};
use super::solve::{frank_wolfe, initial_point, step2_lower_bound, FwConfig, FwIterate, FwStop};
use super::stats::{honest_state, postselection_stats};
use crate::channel::{build_constraint_set, ChannelParams, ConstraintSet, DetectorModel};
use crate::error::{Error, Result};
use crate::numerics::HermitianMatrix;
use crate::operators::{
    region_ops_8ra, region_ops_cross, region_ops_ra, trusted_region_ops_8ra,
    trusted_region_ops_cross, trusted_region_ops_ra, RegionOperatorSet, RegionParams,
    RegionStrategy,
};
use crate::protocol::{build_constellation, Constellation};
use crate::sdp::SdpStatus;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub n_states: usize,
    pub amplitude: f64,
    /// Prior over the states; uniform when absent.
    #[serde(default)]
    pub probabilities: Option<Vec<f64>>,
    pub channel: ChannelParams,
    pub detector: DetectorModel,
    pub strategy: RegionStrategy,
    #[serde(default)]
    pub region: RegionParams,
    pub cutoff: usize,
    pub beta: f64,
    #[serde(default)]
    pub solver: FwConfig,
}

impl ScenarioConfig {
    /// Untrusted detector, no postselection, default solver settings.
    pub fn new(
        n_states: usize,
        amplitude: f64,
        channel: ChannelParams,
        strategy: RegionStrategy,
        cutoff: usize,
        beta: f64,
    ) -> Self {
        Self {
            n_states,
            amplitude,
            probabilities: None,
            channel,
            detector: DetectorModel::Untrusted,
            strategy,
            region: RegionParams::default(),
            cutoff,
            beta,
            solver: FwConfig::for_states(n_states),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        self.solver.validate()?;
        if self.strategy.n_symbols() != self.n_states {
            return Err(Error::InvalidParameter(format!(
                "strategy {} needs {} states, got {}",
                self.strategy.label(),
                self.strategy.n_symbols(),
                self.n_states
            )));
        }
        let r = &self.region;
        let unused = match self.strategy {
            RegionStrategy::Cross => r.delta_r != 0.0 || r.delta_a != 0.0,
            _ => r.delta_c != 0.0,
        };
        if unused {
            return Err(Error::InvalidParameter(format!(
                "region parameters {r:?} do not apply to strategy {}",
                self.strategy.label()
            )));
        }
        if self.cutoff == 0 {
            return Err(Error::InvalidParameter("cutoff must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::InvalidParameter(format!("beta = {}", self.beta)));
        }
        Ok(())
    }

    pub fn constellation(&self) -> Result<Constellation> {
        let mut c = build_constellation(self.n_states, self.amplitude)?;
        if let Some(p) = &self.probabilities {
            if p.len() != self.n_states
                || p.iter().any(|&v| !(v > 0.0))
                || (p.iter().sum::<f64>() - 1.0).abs() > 1e-12
            {
                return Err(Error::InvalidParameter(format!("invalid state probabilities {p:?}")));
            }
            c.probabilities = p.clone();
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// Frank-Wolfe converged and the dual step returned a certified point.
    Optimal,
    /// Frank-Wolfe stopped early; the lower bound is still certified.
    NotConverged,
    /// No dual point could be certified; the lower bound is −∞.
    Degraded,
}

impl RunStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RunStatus::Optimal => "optimal",
            RunStatus::NotConverged => "not_converged",
            RunStatus::Degraded => "degraded",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyRateResult {
    pub step1_upper: f64,
    pub step2_lower: f64,
    pub p_pass: f64,
    pub delta_ec: f64,
    pub eps_prime: f64,
    pub zeta_eps: f64,
    pub final_rate: f64,
    pub reported_rate: f64,
    pub iterations: usize,
    pub status: RunStatus,
    pub fw_stop: FwStop,
    /// Smallest eigenvalue of ∇f − Σ y_i Γ_i at the dual point.
    pub dual_slack_min_eigenvalue: f64,
}

/// Intermediate objects of a run, for independent re-checking.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub constraints: ConstraintSet,
    pub maps: PostprocessingMaps,
    pub rho: HermitianMatrix,
    pub dual_y: Vec<f64>,
    pub fw_trace: Vec<FwIterate>,
}

pub fn build_region_set(
    strategy: RegionStrategy,
    params: RegionParams,
    detector: &DetectorModel,
    nc: usize,
) -> Result<RegionOperatorSet> {
    match (detector, strategy) {
        (DetectorModel::Untrusted, RegionStrategy::RadialAngular) => {
            region_ops_ra(nc, params.delta_r, params.delta_a)
        }
        (DetectorModel::Untrusted, RegionStrategy::RadialAngular8) => {
            region_ops_8ra(nc, params.delta_r, params.delta_a)
        }
        (DetectorModel::Untrusted, RegionStrategy::Cross) => region_ops_cross(nc, params.delta_c),
        (DetectorModel::Trusted(d), RegionStrategy::RadialAngular) => {
            trusted_region_ops_ra(nc, params.delta_r, params.delta_a, d)
        }
        (DetectorModel::Trusted(d), RegionStrategy::RadialAngular8) => {
            trusted_region_ops_8ra(nc, params.delta_r, params.delta_a, d)
        }
        (DetectorModel::Trusted(d), RegionStrategy::Cross) => {
            trusted_region_ops_cross(nc, params.delta_c, d)
        }
    }
}

pub fn compute_key_rate(s: &ScenarioConfig) -> Result<KeyRateResult> {
    compute_key_rate_detailed(s).map(|(r, _)| r)
}

pub fn compute_key_rate_detailed(s: &ScenarioConfig) -> Result<(KeyRateResult, RunArtifacts)> {
    s.validate()?;
    let c = s.constellation()?;
    let regions = build_region_set(s.strategy, s.region, &s.detector, s.cutoff)?;
    let constraints = build_constraint_set(&c, &s.channel, s.detector.trusted(), s.cutoff)?;
    let maps = build_maps(regions, c.n_states)?;
    let rho0 = initial_point(&constraints, &s.solver.ipm)?;
    let fw = frank_wolfe(&constraints, &maps, rho0, &s.solver)?;
    let st2 = step2_lower_bound(&fw.rho, &constraints, &maps, &s.solver)?;
    let honest = honest_state(&c, &s.channel, s.cutoff)?;
    let stats = postselection_stats(&honest, &maps.region_set, &c, s.beta)?;
    let final_rate = st2.lower - stats.p_pass * stats.delta_ec;
    let status = if st2.status == SdpStatus::Infeasible || !st2.lower.is_finite() {
        RunStatus::Degraded
    } else if fw.stop == FwStop::Converged {
        RunStatus::Optimal
    } else {
        RunStatus::NotConverged
    };
    let result = KeyRateResult {
        step1_upper: fw.upper,
        step2_lower: st2.lower,
        p_pass: stats.p_pass,
        delta_ec: stats.delta_ec,
        eps_prime: st2.eps_prime,
        zeta_eps: st2.zeta,
        final_rate,
        reported_rate: final_rate.max(0.0),
        iterations: fw.iterations(),
        status,
        fw_stop: fw.stop,
        dual_slack_min_eigenvalue: st2.slack_min_eigenvalue,
    };
    let artifacts = RunArtifacts {
        constraints,
        maps,
        rho: fw.rho,
        dual_y: st2.dual_y,
        fw_trace: fw.trace,
    };
    Ok((result, artifacts))
}
