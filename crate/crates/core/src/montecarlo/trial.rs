use std::io::Write;

use serde::{Deserialize, Serialize};

use super::scenario::scenario_hash;
use crate::barrier::physical_barrier;
use crate::policies::{pairs, PolicyKind, PolicyRunner};
use crate::world::{AgentState, ScenarioConfig, Vec2, WorldState};
use crate::Result;

/// Trailing window over which a non-convergent trial must be at rest to
/// count as gridlocked.
pub const GRIDLOCK_WINDOW: f64 = 10.0;

/// A trial stops as diverged once an agent is this many outer radii from the
/// origin. Host-only policies can command unbounded accelerations when two
/// neighbor rows are nearly opposed.
pub const ESCAPE_RADII: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    pub policy: PolicyKind,
    pub converged: bool,
    /// First sample time at which every agent is within tolerance of its goal.
    pub converge_time: Option<f64>,
    /// Most negative physical barrier over samples and pairs; `None` with
    /// fewer than two agents.
    pub h_min: Option<f64>,
    /// Steps at which some agent's hard rows had to be relaxed.
    pub infeasible_steps: u64,
    pub infeasible_steps_per_agent: Vec<u64>,
    /// Largest hard-row shortfall reported by any QP.
    pub worst_violation: f64,
    /// Non-convergent and at rest over the final [`GRIDLOCK_WINDOW`].
    pub gridlocked: bool,
    /// Stopped early because an agent escaped past [`ESCAPE_RADII`].
    pub diverged: bool,
    pub radius_margin: f64,
    pub scenario_hash: u64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TrialOptions {
    pub trial: usize,
    pub seed: u64,
    pub trace: bool,
    /// Agents that apply their raw baseline instead of the policy output.
    pub non_cooperating: Option<usize>,
}

/// One sample of a traced trial. `controls` is empty at the final sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub time: f64,
    pub agents: Vec<AgentState>,
    pub controls: Vec<Vec2>,
    pub h0: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub n_agents: usize,
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let n = self.n_agents;
        let mut header = vec!["t".to_string()];
        for i in 0..n {
            for f in ["x", "y", "vx", "vy", "ux", "uy"] {
                header.push(format!("{f}{i}"));
            }
        }
        for (i, j) in pairs(n) {
            header.push(format!("h0_{i}_{j}"));
        }
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![row.time.to_string()];
            for (i, a) in row.agents.iter().enumerate() {
                rec.extend([a.pos.x, a.pos.y, a.vel.x, a.vel.y].map(|v| v.to_string()));
                match row.controls.get(i) {
                    Some(u) => rec.extend([u.x.to_string(), u.y.to_string()]),
                    None => rec.extend([String::new(), String::new()]),
                }
            }
            rec.extend(row.h0.iter().map(|h| h.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrialRun {
    pub result: TrialResult,
    pub trace: Option<Trace>,
}

pub fn run_trial(scenario: &ScenarioConfig, policy: PolicyKind, opts: TrialOptions) -> Result<TrialRun> {
    scenario.validate()?;
    let n = scenario.n_agents;
    let mut runner = PolicyRunner::new(policy, scenario)?;
    let mut world = WorldState::from_starts(&scenario.starts);
    let goals = &scenario.goals;
    let steps = scenario.n_steps();

    let mut h_min = f64::INFINITY;
    let mut converge_time = None;
    let mut infeasible_steps = 0;
    let mut per_agent = vec![0u64; n];
    let mut worst_violation = 0.0f64;
    let mut last_moving = 0.0;
    let mut diverged = false;
    let escape = ESCAPE_RADII * scenario.big_r0;
    let mut trace = opts.trace.then(|| Trace { n_agents: n, rows: Vec::new() });

    for k in 0..=steps {
        let h0: Vec<f64> = pairs(n)
            .map(|(i, j)| physical_barrier(world.agents[i].pos - world.agents[j].pos, scenario.r0))
            .collect();
        h_min = h0.iter().copied().fold(h_min, f64::min);
        let arrived = world.agents.iter().zip(goals).all(|(a, g)| {
            (a.pos - *g).norm() < scenario.convergence_pos_tol && a.vel.norm() < scenario.convergence_vel_tol
        });
        if arrived && converge_time.is_none() {
            converge_time = Some(world.time);
        }
        if world.agents.iter().any(|a| a.vel.norm() >= scenario.convergence_vel_tol) {
            last_moving = world.time;
        }
        if k == steps {
            if let Some(t) = trace.as_mut() {
                t.rows.push(TraceRow { time: world.time, agents: world.agents.clone(), controls: Vec::new(), h0 });
            }
            break;
        }

        let mut out = runner.step(&world, goals)?;
        if let Some(j) = opts.non_cooperating {
            let u0 = runner.controller.baseline(&world, goals)?;
            out.controls[j] = u0[j];
            runner.set_applied(&out.controls);
        }
        if !out.all_feasible() {
            infeasible_steps += 1;
            for (count, &ok) in per_agent.iter_mut().zip(&out.per_agent_feasible) {
                if !ok {
                    *count += 1;
                }
            }
        }
        worst_violation = worst_violation.max(out.worst_violation);
        if let Some(t) = trace.as_mut() {
            t.rows.push(TraceRow {
                time: world.time,
                agents: world.agents.clone(),
                controls: out.controls.clone(),
                h0,
            });
        }
        world = world.step(&out.controls, scenario.dt)?;
        if world.agents.iter().any(|a| !(a.pos.norm() <= escape && a.vel.is_finite())) {
            log::warn!("trial {} ({}) diverged at t = {}", opts.trial, policy.label(), world.time);
            diverged = true;
            break;
        }
    }

    let converged = converge_time.is_some();
    let gridlocked = !converged && !diverged && last_moving <= world.time - GRIDLOCK_WINDOW;
    if !converged && !gridlocked && !diverged {
        log::warn!(
            "trial {} ({}) did not converge but agents were still moving at t = {last_moving}",
            opts.trial,
            policy.label()
        );
    }
    Ok(TrialRun {
        result: TrialResult {
            trial: opts.trial,
            seed: opts.seed,
            policy,
            converged,
            converge_time,
            h_min: h_min.is_finite().then_some(h_min),
            infeasible_steps,
            infeasible_steps_per_agent: per_agent,
            worst_violation,
            gridlocked,
            diverged,
            radius_margin: scenario.radius_margin,
            scenario_hash: scenario_hash(scenario),
        },
        trace,
    })
}
