//! Second-order control barrier constraints.
//!
//! For the squared-distance barrier `h = |xi|^2 - r^2` between two double
//! integrators the acceleration first appears in `h''`, so the enforced
//! condition is `h'' + l1 h' + l0 h >= 0`. Expanded, this is the affine row
//! `a + b (u_i - u_j) >= 0` built by [`pair_constraint`].

use serde::{Deserialize, Serialize};

use crate::world::Vec2;

/// Constraint `a + b . (u_i - u_j) >= 0` between agents `i` and `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairConstraint {
    pub a: f64,
    pub b: Vec2,
    pub i: usize,
    pub j: usize,
}

impl PairConstraint {
    /// Evaluates the constraint for a pair of accelerations.
    pub fn value(&self, u_i: Vec2, u_j: Vec2) -> f64 {
        self.a + self.b.dot(u_i - u_j)
    }
}

/// Constraint `a + b . u_i >= 0` keeping agent `i` inside the outer circle.
/// Always slack-penalized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallConstraint {
    pub a: f64,
    pub b: Vec2,
    pub i: usize,
    pub soft: bool,
}

impl WallConstraint {
    pub fn value(&self, u_i: Vec2) -> f64 {
        self.a + self.b.dot(u_i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierDiagnostics {
    /// Barrier at the constraint radius.
    pub h: f64,
    /// Barrier at the physical contact distance `2 r0`.
    pub h0: f64,
    pub hdot: f64,
    pub in_cstar: bool,
}

/// Decay rates `(lambda_1, lambda_2)` with `-lambda` the roots of
/// `s^2 + l1 s + l0`, smaller first. Requires `l1^2 >= 4 l0`.
pub fn decay_rates(l0: f64, l1: f64) -> (f64, f64) {
    let disc = (l1 * l1 - 4.0 * l0).max(0.0).sqrt();
    ((l1 - disc) / 2.0, (l1 + disc) / 2.0)
}

/// Pair row for displacement `xi = p_i - p_j` and relative velocity `v`.
///
/// `a = 2 v.v + 2 l1 xi.v + l0 (xi.xi - r^2)`, `b = 2 xi`. Valid for any
/// state, including `h < 0`, so a radius margin can be used.
pub fn pair_constraint(xi: Vec2, v: Vec2, r_sq: f64, l0: f64, l1: f64, i: usize, j: usize) -> PairConstraint {
    PairConstraint {
        a: 2.0 * v.norm_sq() + 2.0 * l1 * xi.dot(v) + l0 * (xi.norm_sq() - r_sq),
        b: 2.0 * xi,
        i,
        j,
    }
}

/// Wall row for `h_w = R_eff^2 - |p|^2`, `h_w' = -2 p.v`, `h_w'' = -2 v.v - 2 p.u`.
pub fn wall_constraint(pos: Vec2, vel: Vec2, r_eff: f64, l0: f64, l1: f64, i: usize) -> WallConstraint {
    WallConstraint {
        a: -2.0 * vel.norm_sq() - 2.0 * l1 * pos.dot(vel) + l0 * (r_eff * r_eff - pos.norm_sq()),
        b: -2.0 * pos,
        i,
        soft: true,
    }
}

/// Barrier values for one pair and membership of the admissible set
/// `{h >= 0, h >= -h'/lambda1}`.
pub fn diagnostics(xi: Vec2, v: Vec2, r_sq: f64, r0: f64, lambda1: f64) -> BarrierDiagnostics {
    let d_sq = xi.norm_sq();
    let h = d_sq - r_sq;
    let hdot = 2.0 * xi.dot(v);
    BarrierDiagnostics {
        h,
        h0: d_sq - 4.0 * r0 * r0,
        hdot,
        in_cstar: h >= 0.0 && h >= -hdot / lambda1,
    }
}

/// Physical barrier `|xi|^2 - (2 r0)^2`.
pub fn physical_barrier(xi: Vec2, r0: f64) -> f64 {
    xi.norm_sq() - 4.0 * r0 * r0
}
