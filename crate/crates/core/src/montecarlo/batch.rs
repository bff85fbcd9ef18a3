use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::{sample_scenario, RngStream};
use super::trial::{run_trial, TrialOptions, TrialResult};
use crate::policies::PolicyKind;
use crate::world::ScenarioConfig;
use crate::{Error, Result};

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub policy: PolicyKind,
    pub radius_margin: f64,
    pub trials: usize,
    /// Convergence statistics exclude non-convergent trials.
    pub min_converge_time: Option<f64>,
    pub max_converge_time: Option<f64>,
    pub mean_converge_time: Option<f64>,
    pub worst_h_min: Option<f64>,
    pub no_converge: usize,
    pub gridlocked: usize,
    pub diverged: usize,
    /// Trials with at least one relaxed step.
    pub infeasible_trials: usize,
    pub infeasible_steps: u64,
}

impl PolicySummary {
    pub fn from_trials(policy: PolicyKind, radius_margin: f64, trials: &[&TrialResult]) -> Self {
        let times: Vec<f64> = trials.iter().filter_map(|t| t.converge_time).collect();
        let min = times.iter().copied().reduce(f64::min);
        let max = times.iter().copied().reduce(f64::max);
        let mean = (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64);
        Self {
            policy,
            radius_margin,
            trials: trials.len(),
            min_converge_time: min,
            max_converge_time: max,
            mean_converge_time: mean,
            worst_h_min: trials.iter().filter_map(|t| t.h_min).reduce(f64::min),
            no_converge: trials.iter().filter(|t| !t.converged).count(),
            gridlocked: trials.iter().filter(|t| t.gridlocked).count(),
            diverged: trials.iter().filter(|t| t.diverged).count(),
            infeasible_trials: trials.iter().filter(|t| t.infeasible_steps > 0).count(),
            infeasible_steps: trials.iter().map(|t| t.infeasible_steps).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub base_seed: u64,
    pub n_trials: usize,
    pub summaries: Vec<PolicySummary>,
    /// Sorted by policy (in `summaries` order), then trial index.
    pub trials: Vec<TrialResult>,
}

impl AggregateReport {
    pub fn summary(&self, policy: PolicyKind) -> Option<&PolicySummary> {
        self.summaries.iter().find(|s| s.policy == policy)
    }

    pub fn trials_for(&self, policy: PolicyKind) -> impl Iterator<Item = &TrialResult> {
        self.trials.iter().filter(move |t| t.policy == policy)
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for t in &self.trials {
            serde_json::to_writer(&mut out, t)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "policy",
            "radius_margin",
            "trials",
            "min_converge_time",
            "max_converge_time",
            "mean_converge_time",
            "h_min",
            "no_converge",
            "gridlocked",
            "diverged",
            "infeasible_trials",
            "infeasible_steps",
        ])?;
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        for s in &self.summaries {
            w.write_record([
                s.policy.label(),
                s.radius_margin.to_string(),
                s.trials.to_string(),
                opt(s.min_converge_time),
                opt(s.max_converge_time),
                opt(s.mean_converge_time),
                opt(s.worst_h_min),
                s.no_converge.to_string(),
                s.gridlocked.to_string(),
                s.diverged.to_string(),
                s.infeasible_trials.to_string(),
                s.infeasible_steps.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Fixed-width comparison table, one row per policy.
    pub fn render_table(&self) -> String {
        let opt = |v: Option<f64>, prec: usize| match v {
            Some(v) => format!("{v:.prec$}"),
            None => "-".into(),
        };
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<10} {:>8} {:>8} {:>8} {:>8} {:>9} {:>9} {:>10} {:>10} {:>8}",
            "policy", "min", "max", "mean", "h_min", "no_conv", "diverged", "infeasible", "inf_steps", "margin"
        );
        for r in &self.summaries {
            let _ = writeln!(
                s,
                "{:<10} {:>8} {:>8} {:>8} {:>8} {:>9} {:>9} {:>10} {:>10} {:>8.4}",
                r.policy.label(),
                opt(r.min_converge_time, 2),
                opt(r.max_converge_time, 2),
                opt(r.mean_converge_time, 2),
                opt(r.worst_h_min, 3),
                r.no_converge,
                r.diverged,
                r.infeasible_trials,
                r.infeasible_steps,
                r.radius_margin,
            );
        }
        let _ = writeln!(s, "({} trials, base seed {})", self.n_trials, self.base_seed);
        s
    }
}

/// Trial `k` of a batch uses this seed.
pub fn trial_seed(base_seed: u64, k: usize) -> u64 {
    base_seed.wrapping_add(k as u64)
}

/// The scenario list shared by every policy in a batch.
pub fn batch_scenarios(n_trials: usize, template: &ScenarioConfig, base_seed: u64) -> Result<Vec<ScenarioConfig>> {
    (0..n_trials)
        .map(|k| sample_scenario(&mut RngStream::new(trial_seed(base_seed, k)), template))
        .collect()
}

/// Runs every policy on the same `n_trials` sampled scenarios, in parallel.
pub fn run_batch(
    n_trials: usize,
    policies: &[PolicyKind],
    template: &ScenarioConfig,
    base_seed: u64,
) -> Result<AggregateReport> {
    let margins = vec![template.radius_margin; policies.len()];
    run_batch_with_margins(n_trials, policies, &margins, template, base_seed)
}

/// As [`run_batch`], with a per-policy radius margin.
pub fn run_batch_with_margins(
    n_trials: usize,
    policies: &[PolicyKind],
    margins: &[f64],
    template: &ScenarioConfig,
    base_seed: u64,
) -> Result<AggregateReport> {
    if n_trials == 0 {
        return Err(Error::Input("a batch needs at least one trial".into()));
    }
    if policies.is_empty() || margins.len() != policies.len() {
        return Err(Error::Input("need one radius margin per policy and at least one policy".into()));
    }
    for p in policies {
        p.validate()?;
    }
    let scenarios = batch_scenarios(n_trials, template, base_seed)?;
    let jobs: Vec<(usize, usize)> = (0..policies.len())
        .flat_map(|p| (0..n_trials).map(move |k| (p, k)))
        .collect();
    let mut trials = jobs
        .par_iter()
        .map(|&(p, k)| {
            let scenario = ScenarioConfig { radius_margin: margins[p], ..scenarios[k].clone() };
            let opts = TrialOptions { trial: k, seed: trial_seed(base_seed, k), ..Default::default() };
            run_trial(&scenario, policies[p], opts)
                .map(|run| (p, run.result))
                .map_err(|e| Error::Trial { trial: k, policy: policies[p].label(), source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;
    trials.sort_by_key(|(p, t)| (*p, t.trial));

    let summaries = policies
        .iter()
        .enumerate()
        .map(|(p, &policy)| {
            let mine: Vec<&TrialResult> = trials.iter().filter(|(q, _)| *q == p).map(|(_, t)| t).collect();
            PolicySummary::from_trials(policy, margins[p], &mine)
        })
        .collect();
    Ok(AggregateReport {
        base_seed,
        n_trials,
        summaries,
        trials: trials.into_iter().map(|(_, t)| t).collect(),
    })
}

/// Reruns the batch of `report` with each policy's radius margin widened by
/// its worst recorded violation (in barrier units). Policies that never
/// violated keep their margin.
pub fn margin_rerun(report: &AggregateReport, template: &ScenarioConfig) -> Result<AggregateReport> {
    let policies: Vec<PolicyKind> = report.summaries.iter().map(|s| s.policy).collect();
    let margins: Vec<f64> = report
        .summaries
        .iter()
        .map(|s| match s.worst_h_min {
            Some(h) if h < 0.0 => s.radius_margin - h,
            _ => s.radius_margin,
        })
        .collect();
    run_batch_with_margins(report.n_trials, &policies, &margins, template, report.base_seed)
}
