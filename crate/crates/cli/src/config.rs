//! Batch configuration file.
//!
//! A flat TOML table. Every key is optional and defaults to the values
//! below; unknown keys are rejected.
//!
//! ```toml
//! n_agents = 5
//! r0 = 2.0
//! outer_radius = 11.0
//! radius_margin = 0.0
//! dt = 0.05
//! horizon = 100.0
//! l0 = 6.0
//! l1 = 5.0
//! lqr_q = 0.2
//! convergence_pos_tol = 0.1
//! convergence_vel_tol = 0.1
//! policies = ["centralized", "df", "dr", "ccs2", "pcca", "pcca-filter:0.2"]
//! n_trials = 100
//! base_seed = 0
//! out_dir = "out"
//! trace = false
//! margin_rerun = false
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cbf_swarm::policies::PolicyKind;
use cbf_swarm::ScenarioConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n_agents: usize,
    pub r0: f64,
    pub outer_radius: f64,
    pub radius_margin: f64,
    pub dt: f64,
    pub horizon: f64,
    pub l0: f64,
    pub l1: f64,
    pub lqr_q: f64,
    pub convergence_pos_tol: f64,
    pub convergence_vel_tol: f64,
    pub policies: Vec<PolicyKind>,
    pub n_trials: usize,
    pub base_seed: u64,
    pub out_dir: PathBuf,
    pub trace: bool,
    pub margin_rerun: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = ScenarioConfig::default();
        Self {
            n_agents: s.n_agents,
            r0: s.r0,
            outer_radius: s.big_r0,
            radius_margin: s.radius_margin,
            dt: s.dt,
            horizon: s.horizon,
            l0: s.l0,
            l1: s.l1,
            lqr_q: s.lqr_q,
            convergence_pos_tol: s.convergence_pos_tol,
            convergence_vel_tol: s.convergence_vel_tol,
            policies: PolicyKind::all(PolicyKind::DEFAULT_FILTER_TAU),
            n_trials: 100,
            base_seed: 0,
            out_dir: PathBuf::from("out"),
            trace: false,
            margin_rerun: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario().validate_params()?;
        if self.n_trials == 0 {
            bail!("n_trials must be at least 1");
        }
        if self.policies.is_empty() {
            bail!("policies must name at least one policy");
        }
        for p in &self.policies {
            p.validate().with_context(|| format!("policies entry {:?}", p.spec()))?;
        }
        Ok(())
    }

    /// Scenario parameters with an empty layout.
    pub fn scenario(&self) -> ScenarioConfig {
        ScenarioConfig {
            n_agents: self.n_agents,
            r0: self.r0,
            big_r0: self.outer_radius,
            radius_margin: self.radius_margin,
            dt: self.dt,
            horizon: self.horizon,
            l0: self.l0,
            l1: self.l1,
            lqr_q: self.lqr_q,
            convergence_pos_tol: self.convergence_pos_tol,
            convergence_vel_tol: self.convergence_vel_tol,
            starts: Vec::new(),
            goals: Vec::new(),
        }
    }
}
