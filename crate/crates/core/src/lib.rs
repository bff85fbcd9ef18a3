//! Control-barrier-function collision avoidance for holonomic double-integrator
//! agents.
//!
//! The crate is layered bottom-up:
//!
//! * [`world`] - agent state and exact zero-order-hold propagation.
//! * [`barrier`] - second-order CBF constraint rows for agent pairs and the
//!   enclosing wall.
//! * [`qp`] - a small dense QP solver with a least-infeasible fallback and an
//!   independent KKT verifier.
//! * [`baseline`] - LQR goal-seeking preferred controls.
//! * [`policies`] - the Centralized, DF, DR, CCS2 and PCCA controllers.
//! * [`montecarlo`] - seeded scenario sampling, trials, batches and reports.
//! * [`presets`] - fixed regression scenarios.

pub mod barrier;
pub mod baseline;
mod error;
pub mod montecarlo;
pub mod policies;
pub mod presets;
pub mod qp;
pub mod world;

pub use error::{Error, Result};
pub use world::{AgentState, ScenarioConfig, Vec2, WorldState};
