//! Planar double-integrator agents and their exact discrete-time propagation.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self * rhs.x, self * rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AgentState {
    pub pos: Vec2,
    pub vel: Vec2,
}

impl AgentState {
    pub fn at_rest(pos: Vec2) -> Self {
        Self { pos, vel: Vec2::ZERO }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub agents: Vec<AgentState>,
    pub time: f64,
    pub step_index: u64,
}

impl WorldState {
    /// All agents at rest at `starts`, time zero.
    pub fn from_starts(starts: &[Vec2]) -> Self {
        Self {
            agents: starts.iter().copied().map(AgentState::at_rest).collect(),
            time: 0.0,
            step_index: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    /// Advances every agent by one zero-order-hold interval.
    ///
    /// `pos' = pos + vel dt + u dt^2 / 2`, `vel' = vel + u dt`; exact for the
    /// double integrator under piecewise-constant acceleration.
    pub fn step(&self, controls: &[Vec2], dt: f64) -> Result<WorldState> {
        if controls.len() != self.agents.len() {
            return Err(Error::Contract(format!(
                "{} controls for {} agents",
                controls.len(),
                self.agents.len()
            )));
        }
        if !(dt > 0.0) {
            return Err(Error::Contract(format!("dt must be positive, got {dt}")));
        }
        let half_dt_sq = 0.5 * dt * dt;
        let agents = self
            .agents
            .iter()
            .zip(controls)
            .map(|(a, &u)| AgentState {
                pos: a.pos + dt * a.vel + half_dt_sq * u,
                vel: a.vel + dt * u,
            })
            .collect();
        let step_index = self.step_index + 1;
        Ok(WorldState {
            agents,
            time: step_index as f64 * dt,
            step_index,
        })
    }

    /// Displacement `p_i - p_j` and relative velocity `v_i - v_j`.
    pub fn relative_state(&self, i: usize, j: usize) -> Result<(Vec2, Vec2)> {
        let n = self.agents.len();
        if i == j || i >= n || j >= n {
            return Err(Error::Contract(format!(
                "relative_state needs distinct indices below {n}, got ({i}, {j})"
            )));
        }
        Ok(relative(&self.agents[i], &self.agents[j]))
    }
}

pub(crate) fn relative(a: &AgentState, b: &AgentState) -> (Vec2, Vec2) {
    (a.pos - b.pos, a.vel - b.vel)
}

/// Physical, controller and scenario parameters for one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub n_agents: usize,
    /// Agent body radius.
    pub r0: f64,
    /// Radius of the enclosing static circle.
    #[serde(rename = "outer_radius")]
    pub big_r0: f64,
    /// Added to `(2 r0)^2` to get the constraint radius squared.
    pub radius_margin: f64,
    pub dt: f64,
    pub horizon: f64,
    pub l0: f64,
    pub l1: f64,
    pub lqr_q: f64,
    pub convergence_pos_tol: f64,
    pub convergence_vel_tol: f64,
    pub starts: Vec<Vec2>,
    pub goals: Vec<Vec2>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_agents: 5,
            r0: 2.0,
            big_r0: 11.0,
            radius_margin: 0.0,
            dt: 0.05,
            horizon: 100.0,
            l0: 6.0,
            l1: 5.0,
            lqr_q: 0.2,
            convergence_pos_tol: 0.1,
            convergence_vel_tol: 0.1,
            starts: Vec::new(),
            goals: Vec::new(),
        }
    }
}

impl ScenarioConfig {
    /// Default parameters with the given start and goal layout.
    pub fn with_layout(starts: Vec<Vec2>, goals: Vec<Vec2>) -> Self {
        Self {
            n_agents: starts.len(),
            starts,
            goals,
            ..Self::default()
        }
    }

    /// Checks the parameter invariants, ignoring the start/goal layout.
    pub fn validate_params(&self) -> Result<()> {
        let positive = [
            ("r0", self.r0),
            ("dt", self.dt),
            ("horizon", self.horizon),
            ("l0", self.l0),
            ("l1", self.l1),
            ("lqr_q", self.lqr_q),
            ("convergence_pos_tol", self.convergence_pos_tol),
            ("convergence_vel_tol", self.convergence_vel_tol),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Input(format!("{name} must be positive and finite, got {value}")));
            }
        }
        if self.n_agents == 0 {
            return Err(Error::Input("n_agents must be at least 1".into()));
        }
        if !(self.big_r0.is_finite() && self.big_r0 > self.r0) {
            return Err(Error::Input(format!(
                "outer_radius ({}) must exceed r0 ({})",
                self.big_r0, self.r0
            )));
        }
        if !(self.radius_margin.is_finite() && self.radius_margin >= 0.0) {
            return Err(Error::Input(format!(
                "radius_margin must be non-negative, got {}",
                self.radius_margin
            )));
        }
        if self.l1 * self.l1 < 4.0 * self.l0 {
            return Err(Error::Input(format!(
                "barrier gains need l1^2 >= 4 l0 (l0 = {}, l1 = {})",
                self.l0, self.l1
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_params()?;
        if self.starts.len() != self.n_agents || self.goals.len() != self.n_agents {
            return Err(Error::Input(format!(
                "expected {} starts and goals, got {} and {}",
                self.n_agents,
                self.starts.len(),
                self.goals.len()
            )));
        }
        if !self.starts.iter().chain(&self.goals).all(|p| p.is_finite()) {
            return Err(Error::Input("non-finite start or goal".into()));
        }
        Ok(())
    }

    /// Constraint radius squared: `(2 r0)^2 + radius_margin`.
    pub fn barrier_radius_sq(&self) -> f64 {
        let d = 2.0 * self.r0;
        d * d + self.radius_margin
    }

    /// Radius available to an agent's center inside the outer circle.
    pub fn wall_radius(&self) -> f64 {
        self.big_r0 - self.r0
    }

    /// Smaller root of `s^2 + l1 s + l0`, used for the admissible set.
    pub fn lambda1(&self) -> f64 {
        crate::barrier::decay_rates(self.l0, self.l1).0
    }

    pub fn n_steps(&self) -> u64 {
        (self.horizon / self.dt).round() as u64
    }
}
