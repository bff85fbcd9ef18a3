//! Quasi-centralized policies: each host solves for every agent's
//! acceleration using only what it knows, then applies its own.

use serde::{Deserialize, Serialize};

use super::{pair_row, pairs, per_agent_outcome, single_row, slot, Controller, StepOutcome};
use crate::qp::{QpProblem, QpSolution};
use crate::world::{Vec2, WorldState};
use crate::{Error, Result};

/// Breaks the loop between the host's QP and its disturbance estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PccaEstimator {
    /// Use last step's innovation as-is.
    Delay,
    /// First-order low-pass on the innovation with time constant `tau`.
    LowPass { tau: f64 },
}

/// One host's beliefs about the other agents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PccaState {
    /// Estimated deviation of each agent from the host's model of it.
    pub w_hat: Vec<Vec2>,
    /// The host's solved accelerations from the previous step.
    pub u_prev: Vec<Vec2>,
    /// Accelerations the agents were observed to apply last step.
    pub last_applied: Vec<Vec2>,
}

impl PccaState {
    pub fn new(n: usize) -> Self {
        Self {
            w_hat: vec![Vec2::ZERO; n],
            u_prev: vec![Vec2::ZERO; n],
            last_applied: vec![Vec2::ZERO; n],
        }
    }

    /// Folds in the accelerations observed over the last step.
    pub fn observe(&mut self, host: usize, applied: &[Vec2], estimator: PccaEstimator, dt: f64) {
        self.last_applied.clone_from_slice(applied);
        for j in (0..applied.len()).filter(|&j| j != host) {
            let innovation = applied[j] - self.u_prev[j];
            self.w_hat[j] = match estimator {
                PccaEstimator::Delay => innovation,
                PccaEstimator::LowPass { tau } => self.w_hat[j] + (dt / tau) * (innovation - self.w_hat[j]),
            };
        }
    }
}

impl Controller {
    /// Host `i`'s CCS2 problem. Unknown preferences are zero and the host's
    /// own variable is shifted by `u0_i`, whose contribution to its pair
    /// rows is doubled.
    pub fn ccs2_qp(&self, world: &WorldState, u0_host: Vec2, i: usize) -> QpProblem {
        let n = world.len();
        let dim = 2 * n;
        let mut p = QpProblem::new(vec![0.0; dim]);
        for (j, k) in pairs(n) {
            if j == i || k == i {
                let other = if j == i { k } else { j };
                let c = self.pair(world, i, other);
                p.push(pair_row(dim, i, other, c.b, c.a + 2.0 * c.b.dot(u0_host)));
            } else {
                let c = self.pair(world, j, k);
                p.push(pair_row(dim, j, k, c.b, c.a));
            }
        }
        for j in 0..n {
            let w = self.wall(world, j);
            let lo = if j == i { w.a + w.b.dot(u0_host) } else { w.a };
            p.push(single_row(dim, j, w.b, lo, true));
        }
        p
    }

    pub fn ccs2_step(&self, world: &WorldState, goals: &[Vec2]) -> Result<StepOutcome> {
        let u0 = self.baseline(world, goals)?;
        let sols = (0..world.len())
            .map(|i| self.solver.solve(&self.ccs2_qp(world, u0[i], i)))
            .collect::<Result<Vec<QpSolution>>>()?;
        let controls = sols
            .iter()
            .enumerate()
            .map(|(i, s)| slot(&s.u_star, i) + u0[i])
            .collect();
        Ok(per_agent_outcome(controls, &sols))
    }

    /// Host `i`'s PCCA problem. Agent `j`'s modeled acceleration is
    /// `u_ij + w_hat_j`; the host's own is `u_ii`.
    pub fn pcca_qp(&self, world: &WorldState, u0_host: Vec2, i: usize, w_hat: &[Vec2]) -> QpProblem {
        let n = world.len();
        let dim = 2 * n;
        let mut center = vec![0.0; dim];
        center[2 * i] = u0_host.x;
        center[2 * i + 1] = u0_host.y;
        let mut p = QpProblem::new(center);
        let offset = |j: usize| if j == i { Vec2::ZERO } else { w_hat[j] };
        for (j, k) in pairs(n) {
            let c = self.pair(world, j, k);
            p.push(pair_row(dim, j, k, c.b, c.a + c.b.dot(offset(j) - offset(k))));
        }
        for j in 0..n {
            let w = self.wall(world, j);
            p.push(single_row(dim, j, w.b, w.a + w.b.dot(offset(j)), true));
        }
        p
    }

    /// Updates every host's estimate from `applied_prev`, then solves each
    /// host's QP and applies `u_ii`.
    pub fn pcca_step(
        &self,
        world: &WorldState,
        goals: &[Vec2],
        states: &mut [PccaState],
        applied_prev: &[Vec2],
        estimator: PccaEstimator,
    ) -> Result<StepOutcome> {
        let n = world.len();
        if states.len() != n || applied_prev.len() != n || states.iter().any(|s| s.w_hat.len() != n) {
            return Err(Error::Contract(format!("PCCA state does not match {n} agents")));
        }
        let u0 = self.baseline(world, goals)?;
        let mut sols = Vec::with_capacity(n);
        for (i, state) in states.iter_mut().enumerate() {
            state.observe(i, applied_prev, estimator, self.dt);
            let sol = self.solver.solve(&self.pcca_qp(world, u0[i], i, &state.w_hat))?;
            for j in 0..n {
                state.u_prev[j] = slot(&sol.u_star, j);
            }
            sols.push(sol);
        }
        let controls = sols.iter().enumerate().map(|(i, s)| slot(&s.u_star, i)).collect();
        Ok(per_agent_outcome(controls, &sols))
    }
}
