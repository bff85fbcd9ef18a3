//! Fixed regression scenarios.
//!
//! * `df_crossing`: two agents whose straight-line LQR paths cross near the
//!   origin.
//! * `dr_three_agent`: a stationary agent at the origin (goal = start) with
//!   two movers heading through it from opposite sides along one line.
//! * `five_agent_demo`: one sampled five-agent layout.

use std::fmt;
use std::str::FromStr;

use crate::montecarlo::{sample_scenario, RngStream};
use crate::world::{ScenarioConfig, Vec2};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    DfCrossing,
    DrThreeAgent,
    FiveAgentDemo,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::DfCrossing, Preset::DrThreeAgent, Preset::FiveAgentDemo];

    /// Seed of the `five_agent_demo` layout.
    pub const DEMO_SEED: u64 = 1;

    /// Index of the stationary agent in `dr_three_agent`.
    pub const DR_MIDDLE_AGENT: usize = 0;

    pub fn name(&self) -> &'static str {
        match self {
            Preset::DfCrossing => "df_crossing",
            Preset::DrThreeAgent => "dr_three_agent",
            Preset::FiveAgentDemo => "five_agent_demo",
        }
    }

    /// The preset layout on top of `template`'s parameters.
    pub fn scenario(&self, template: &ScenarioConfig) -> Result<ScenarioConfig> {
        let (starts, goals) = match self {
            Preset::DfCrossing => (
                vec![Vec2::new(2.1, -6.5), Vec2::new(3.1, 2.7)],
                vec![Vec2::new(1.1, 2.1), Vec2::new(1.0, -2.0)],
            ),
            Preset::DrThreeAgent => (
                vec![Vec2::ZERO, Vec2::new(-8.0, 0.0), Vec2::new(8.0, 0.0)],
                vec![Vec2::ZERO, Vec2::new(8.0, 0.0), Vec2::new(-8.0, 0.0)],
            ),
            Preset::FiveAgentDemo => {
                let t = ScenarioConfig { n_agents: 5, ..template.clone() };
                return sample_scenario(&mut RngStream::new(Self::DEMO_SEED), &t);
            }
        };
        let s = ScenarioConfig { n_agents: starts.len(), starts, goals, ..template.clone() };
        s.validate()?;
        Ok(s)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown preset {s:?} (df_crossing, dr_three_agent, five_agent_demo)")))
    }
}
