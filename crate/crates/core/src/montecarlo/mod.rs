//! Seeded Monte-Carlo comparison of the policies.
//!
//! Trial `k` of a batch samples its layout from seed `base_seed + k`; every
//! policy runs on that same layout. Trials run in parallel and are sorted
//! by index before any reduction, so a report depends only on its inputs.

mod batch;
mod scenario;
mod trial;

pub use batch::{
    batch_scenarios, margin_rerun, run_batch, run_batch_with_margins, trial_seed, AggregateReport,
    PolicySummary,
};
pub use scenario::{sample_scenario, scenario_hash, RngStream, MAX_PLACEMENT_ATTEMPTS};
pub use trial::{run_trial, Trace, TraceRow, TrialOptions, TrialResult, TrialRun, ESCAPE_RADII, GRIDLOCK_WINDOW};
