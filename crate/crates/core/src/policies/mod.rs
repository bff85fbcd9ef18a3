//! Collision-avoidance controllers.
//!
//! Every policy turns one world snapshot into one acceleration per agent by
//! solving one or more QPs over the pairwise barrier rows:
//!
//! | policy      | QPs per step | variables | hard rows per QP |
//! |-------------|--------------|-----------|------------------|
//! | Centralized | 1            | `2 N`     | all pairs        |
//! | DF / DR     | `N`          | 2         | host's pairs     |
//! | CCS2 / PCCA | `N`          | `2 N`     | all pairs        |
//!
//! Every QP also carries one soft wall row per modeled agent.

mod decentralized;
mod hosted;
mod oracle;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::barrier::{pair_constraint, wall_constraint, PairConstraint, WallConstraint};
use crate::baseline::{baseline_control, lqr_gain, LqrGain};
use crate::qp::{Constraint, QpProblem, QpSolution, QpSolver};
use crate::world::{relative, ScenarioConfig, Vec2, WorldState};
use crate::{Error, Result};

pub use hosted::{PccaEstimator, PccaState};
pub use oracle::feasible_point_oracle;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyKind {
    Centralized,
    DecFollower,
    DecReciprocal,
    Ccs2,
    PccaDelay,
    PccaFilter { tau: f64 },
}

impl PolicyKind {
    pub const DEFAULT_FILTER_TAU: f64 = 0.2;

    /// The six variants compared in a batch, in table order.
    pub fn all(filter_tau: f64) -> Vec<PolicyKind> {
        vec![
            PolicyKind::Centralized,
            PolicyKind::DecFollower,
            PolicyKind::DecReciprocal,
            PolicyKind::Ccs2,
            PolicyKind::PccaDelay,
            PolicyKind::PccaFilter { tau: filter_tau },
        ]
    }

    /// Short label used in tables.
    pub fn label(&self) -> String {
        match self {
            PolicyKind::Centralized => "Central".into(),
            PolicyKind::DecFollower => "DF".into(),
            PolicyKind::DecReciprocal => "DR".into(),
            PolicyKind::Ccs2 => "CCS2".into(),
            PolicyKind::PccaDelay => "PCCA".into(),
            PolicyKind::PccaFilter { tau } => format!("PCCA_{tau}"),
        }
    }

    /// Name accepted by [`FromStr`] and used in file names.
    pub fn slug(&self) -> &'static str {
        match self {
            PolicyKind::Centralized => "centralized",
            PolicyKind::DecFollower => "df",
            PolicyKind::DecReciprocal => "dr",
            PolicyKind::Ccs2 => "ccs2",
            PolicyKind::PccaDelay => "pcca",
            PolicyKind::PccaFilter { .. } => "pcca-filter",
        }
    }

    /// Round-trips through [`FromStr`]; keeps the filter time constant.
    pub fn spec(&self) -> String {
        match self {
            PolicyKind::PccaFilter { tau } => format!("pcca-filter:{tau}"),
            other => other.slug().into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PolicyKind::PccaFilter { tau } if !(tau.is_finite() && tau > 0.0) => {
                Err(Error::Input(format!("PCCA filter time constant must be positive, got {tau}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    /// Accepts the slugs plus `pcca-filter:<tau>`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        if let Some(tau) = lower.strip_prefix("pcca-filter:") {
            let tau = tau
                .parse()
                .map_err(|_| Error::Input(format!("bad filter time constant in {s:?}")))?;
            let kind = PolicyKind::PccaFilter { tau };
            kind.validate()?;
            return Ok(kind);
        }
        Ok(match lower.as_str() {
            "centralized" | "central" => PolicyKind::Centralized,
            "df" | "follower" => PolicyKind::DecFollower,
            "dr" | "reciprocal" => PolicyKind::DecReciprocal,
            "ccs2" => PolicyKind::Ccs2,
            "pcca" | "pcca-delay" => PolicyKind::PccaDelay,
            "pcca-filter" => PolicyKind::PccaFilter { tau: Self::DEFAULT_FILTER_TAU },
            _ => {
                return Err(Error::Input(format!(
                    "unknown policy {s:?} (expected centralized, df, dr, ccs2, pcca, pcca-filter)"
                )))
            }
        })
    }
}

impl Serialize for PolicyKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.spec())
    }
}

impl<'de> Deserialize<'de> for PolicyKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub controls: Vec<Vec2>,
    pub per_agent_feasible: Vec<bool>,
    /// Largest hard-row shortfall over every QP solved this step.
    pub worst_violation: f64,
}

impl StepOutcome {
    pub fn all_feasible(&self) -> bool {
        self.per_agent_feasible.iter().all(|&f| f)
    }
}

/// Scenario-derived constants shared by every policy.
#[derive(Debug, Clone, Copy)]
pub struct Controller {
    pub r_sq: f64,
    pub wall_radius: f64,
    pub l0: f64,
    pub l1: f64,
    pub lambda1: f64,
    pub dt: f64,
    pub gain: LqrGain,
    pub solver: QpSolver,
}

impl Controller {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate_params()?;
        Ok(Self {
            r_sq: cfg.barrier_radius_sq(),
            wall_radius: cfg.wall_radius(),
            l0: cfg.l0,
            l1: cfg.l1,
            lambda1: cfg.lambda1(),
            dt: cfg.dt,
            gain: lqr_gain(cfg.lqr_q)?,
            solver: QpSolver::default(),
        })
    }

    pub fn baseline(&self, world: &WorldState, goals: &[Vec2]) -> Result<Vec<Vec2>> {
        if goals.len() != world.len() {
            return Err(Error::Contract(format!(
                "{} goals for {} agents",
                goals.len(),
                world.len()
            )));
        }
        Ok(world
            .agents
            .iter()
            .zip(goals)
            .map(|(a, &g)| baseline_control(a, g, &self.gain))
            .collect())
    }

    /// Row for the ordered pair `(i, j)`, `xi = p_i - p_j`.
    pub fn pair(&self, world: &WorldState, i: usize, j: usize) -> PairConstraint {
        let (xi, v) = relative(&world.agents[i], &world.agents[j]);
        pair_constraint(xi, v, self.r_sq, self.l0, self.l1, i, j)
    }

    pub fn wall(&self, world: &WorldState, i: usize) -> WallConstraint {
        let a = &world.agents[i];
        wall_constraint(a.pos, a.vel, self.wall_radius, self.l0, self.l1, i)
    }

    /// The one-QP Centralized problem over all `2 N` accelerations.
    pub fn centralized_qp(&self, world: &WorldState, u0: &[Vec2]) -> QpProblem {
        let n = world.len();
        let mut p = QpProblem::new(flatten(u0));
        for (i, j) in pairs(n) {
            let c = self.pair(world, i, j);
            p.push(pair_row(2 * n, i, j, c.b, c.a));
        }
        for i in 0..n {
            let w = self.wall(world, i);
            p.push(single_row(2 * n, i, w.b, w.a, true));
        }
        p
    }

    pub fn centralized_step(&self, world: &WorldState, goals: &[Vec2]) -> Result<StepOutcome> {
        let u0 = self.baseline(world, goals)?;
        let sol = self.solver.solve(&self.centralized_qp(world, &u0))?;
        let n = world.len();
        Ok(StepOutcome {
            controls: unflatten(&sol.u_star),
            per_agent_feasible: vec![sol.feasible; n],
            worst_violation: sol.max_violation,
        })
    }
}

/// Unordered pairs `(i, j)`, `i < j`, in lexicographic order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

pub(crate) fn flatten(v: &[Vec2]) -> Vec<f64> {
    v.iter().flat_map(|u| [u.x, u.y]).collect()
}

pub(crate) fn unflatten(z: &[f64]) -> Vec<Vec2> {
    z.chunks_exact(2).map(|c| Vec2::new(c[0], c[1])).collect()
}

pub(crate) fn slot(z: &[f64], k: usize) -> Vec2 {
    Vec2::new(z[2 * k], z[2 * k + 1])
}

/// `b . (z_a - z_b) + lo >= 0`, hard.
pub(crate) fn pair_row(dim: usize, a: usize, b: usize, coef: Vec2, lo: f64) -> Constraint {
    let mut c = vec![0.0; dim];
    c[2 * a] = coef.x;
    c[2 * a + 1] = coef.y;
    c[2 * b] = -coef.x;
    c[2 * b + 1] = -coef.y;
    Constraint::hard(c, lo)
}

pub(crate) fn single_row(dim: usize, a: usize, coef: Vec2, lo: f64, soft: bool) -> Constraint {
    let mut c = vec![0.0; dim];
    c[2 * a] = coef.x;
    c[2 * a + 1] = coef.y;
    if soft {
        Constraint::soft(c, lo)
    } else {
        Constraint::hard(c, lo)
    }
}

/// Collects an agent-level outcome from one QP per agent.
pub(crate) fn per_agent_outcome(controls: Vec<Vec2>, sols: &[QpSolution]) -> StepOutcome {
    StepOutcome {
        controls,
        per_agent_feasible: sols.iter().map(|s| s.feasible).collect(),
        worst_violation: sols.iter().fold(0.0, |acc, s| acc.max(s.max_violation)),
    }
}

/// Runs one policy over time, holding whatever state it needs between steps.
#[derive(Debug, Clone)]
pub struct PolicyRunner {
    pub kind: PolicyKind,
    pub controller: Controller,
    pcca: Vec<PccaState>,
    applied_prev: Vec<Vec2>,
}

impl PolicyRunner {
    pub fn new(kind: PolicyKind, cfg: &ScenarioConfig) -> Result<Self> {
        kind.validate()?;
        let n = cfg.n_agents;
        Ok(Self {
            kind,
            controller: Controller::new(cfg)?,
            pcca: (0..n).map(|_| PccaState::new(n)).collect(),
            applied_prev: vec![Vec2::ZERO; n],
        })
    }

    pub fn step(&mut self, world: &WorldState, goals: &[Vec2]) -> Result<StepOutcome> {
        let c = &self.controller;
        let out = match self.kind {
            PolicyKind::Centralized => c.centralized_step(world, goals)?,
            PolicyKind::DecFollower => c.dec_follower_step(world, goals)?,
            PolicyKind::DecReciprocal => c.dec_reciprocal_step(world, goals)?,
            PolicyKind::Ccs2 => c.ccs2_step(world, goals)?,
            PolicyKind::PccaDelay => {
                c.pcca_step(world, goals, &mut self.pcca, &self.applied_prev, PccaEstimator::Delay)?
            }
            PolicyKind::PccaFilter { tau } => c.pcca_step(
                world,
                goals,
                &mut self.pcca,
                &self.applied_prev,
                PccaEstimator::LowPass { tau },
            )?,
        };
        self.applied_prev.clone_from(&out.controls);
        Ok(out)
    }

    /// Overrides what the runner believes each agent applied last step.
    pub fn set_applied(&mut self, applied: &[Vec2]) {
        self.applied_prev.clear();
        self.applied_prev.extend_from_slice(applied);
    }

    pub fn pcca_states(&self) -> &[PccaState] {
        &self.pcca
    }
}
