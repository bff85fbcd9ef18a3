//! LQR goal-seeking baseline control.
//!
//! Each axis is an independent double integrator `x'' = u` with state cost
//! `q I_2` on `(x - x_goal, v)` and unit control cost. The continuous-time
//! Riccati solution is available in closed form:
//!
//! ```text
//! P = [[sqrt(q) k_vel, sqrt(q)], [sqrt(q), k_vel]],   k_vel = sqrt(q + 2 sqrt(q))
//! K = [sqrt(q), k_vel]
//! ```

use serde::{Deserialize, Serialize};

use crate::world::{AgentState, Vec2};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LqrGain {
    pub k_pos: f64,
    pub k_vel: f64,
}

impl LqrGain {
    /// Per-axis Riccati matrix `[[p11, p12], [p12, p22]]`.
    pub fn riccati(&self) -> [[f64; 2]; 2] {
        let p12 = self.k_pos;
        let p22 = self.k_vel;
        [[self.k_pos * self.k_vel, p12], [p12, p22]]
    }
}

pub fn lqr_gain(q: f64) -> Result<LqrGain> {
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::Input(format!("LQR state weight must be positive, got {q}")));
    }
    let k_pos = q.sqrt();
    Ok(LqrGain { k_pos, k_vel: (q + 2.0 * k_pos).sqrt() })
}

/// Residual `A^T P + P A - P B B^T P + q I` of the per-axis CARE, max-abs.
pub fn care_residual(gain: &LqrGain, q: f64) -> f64 {
    let [[p11, p12], [_, p22]] = gain.riccati();
    // A = [[0, 1], [0, 0]], B = [0, 1]^T
    let r11 = -p12 * p12 + q;
    let r12 = p11 - p12 * p22;
    let r22 = 2.0 * p12 - p22 * p22 + q;
    r11.abs().max(r12.abs()).max(r22.abs())
}

/// Preferred acceleration `-k_pos (p - goal) - k_vel v`.
pub fn baseline_control(state: &AgentState, goal: Vec2, gain: &LqrGain) -> Vec2 {
    -gain.k_pos * (state.pos - goal) - gain.k_vel * state.vel
}
