use super::{pairs, Controller};
use crate::barrier::diagnostics;
use crate::world::{relative, Vec2, WorldState};
use crate::{Error, Result};

/// Proportional braking `u_i = -lambda1 v_i` for every agent.
///
/// Whenever every pair lies in the admissible set this choice gives
/// `u_i - u_j = -lambda1 v_ij` and hence `F_ij >= 2 |v_ij|^2` for every pair,
/// which certifies that the Centralized, CCS2 and PCCA constraint sets are
/// nonempty. Fails with the first pair outside the set.
pub fn feasible_point_oracle(world: &WorldState, ctl: &Controller) -> Result<Vec<Vec2>> {
    for (i, j) in pairs(world.len()) {
        let (xi, v) = relative(&world.agents[i], &world.agents[j]);
        let d = diagnostics(xi, v, ctl.r_sq, 0.0, ctl.lambda1);
        if !d.in_cstar {
            return Err(Error::OutsideAdmissibleSet { i, j, h: d.h, hdot: d.hdot });
        }
    }
    Ok(world.agents.iter().map(|a| -ctl.lambda1 * a.vel).collect())
}
