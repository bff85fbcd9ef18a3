//! Host-only policies: each agent solves a 2-variable QP for its own
//! acceleration, treating every neighbor's acceleration as zero.

use super::{per_agent_outcome, single_row, Controller, StepOutcome};
use crate::qp::{QpProblem, QpSolution};
use crate::world::{Vec2, WorldState};
use crate::Result;

impl Controller {
    /// Agent `i`'s own QP with pair rows `share * a_ij + b_ij . u_i >= 0`.
    /// `share` is 1 for DF and 1/2 for DR.
    pub fn host_only_qp(&self, world: &WorldState, u0: &[Vec2], i: usize, share: f64) -> QpProblem {
        let mut p = QpProblem::new(vec![u0[i].x, u0[i].y]);
        for j in (0..world.len()).filter(|&j| j != i) {
            let c = self.pair(world, i, j);
            p.push(single_row(2, 0, c.b, share * c.a, false));
        }
        let w = self.wall(world, i);
        p.push(single_row(2, 0, w.b, w.a, true));
        p
    }

    fn host_only_step(&self, world: &WorldState, goals: &[Vec2], share: f64) -> Result<StepOutcome> {
        let u0 = self.baseline(world, goals)?;
        let sols = (0..world.len())
            .map(|i| self.solver.solve(&self.host_only_qp(world, &u0, i, share)))
            .collect::<Result<Vec<QpSolution>>>()?;
        let controls = sols.iter().map(|s| Vec2::new(s.u_star[0], s.u_star[1])).collect();
        Ok(per_agent_outcome(controls, &sols))
    }

    /// Decentralized Follower: every agent takes full responsibility.
    pub fn dec_follower_step(&self, world: &WorldState, goals: &[Vec2]) -> Result<StepOutcome> {
        self.host_only_step(world, goals, 1.0)
    }

    /// Decentralized Reciprocal: every agent takes half of each pair row.
    pub fn dec_reciprocal_step(&self, world: &WorldState, goals: &[Vec2]) -> Result<StepOutcome> {
        self.host_only_step(world, goals, 0.5)
    }
}
