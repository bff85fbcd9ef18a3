//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

mod common;

use std::time::{Duration, Instant};

use cbf_swarm::montecarlo::{margin_rerun, run_batch, run_trial, AggregateReport, TrialOptions};
use cbf_swarm::policies::{feasible_point_oracle, pairs, Controller, PolicyKind};
use cbf_swarm::presets::Preset;
use cbf_swarm::qp::{verify, QpSolver};
use cbf_swarm::{ScenarioConfig, Vec2};
use common::{oracle_solve, random_cstar_world, random_qp, random_vec, rel_diff, rng};
use nalgebra::DMatrix;
use rand::Rng;

const BATCH_TRIALS: usize = 100;
const BATCH_SEED: u64 = 0;
const BATCH_BUDGET: Duration = Duration::from_secs(600);

const CENTRAL: PolicyKind = PolicyKind::Centralized;
const DF: PolicyKind = PolicyKind::DecFollower;
const DR: PolicyKind = PolicyKind::DecReciprocal;
const CCS2: PolicyKind = PolicyKind::Ccs2;
const PCCA: PolicyKind = PolicyKind::PccaDelay;
const PCCA_F: PolicyKind = PolicyKind::PccaFilter { tau: PolicyKind::DEFAULT_FILTER_TAU };

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(parts: &[(bool, String)]) -> Outcome {
    Outcome {
        pass: parts.iter().all(|(ok, _)| *ok),
        detail: parts
            .iter()
            .map(|(ok, s)| format!("{s}{}", if *ok { "" } else { " [x]" }))
            .collect::<Vec<_>>()
            .join("; "),
    }
}

fn h(report: &AggregateReport, p: PolicyKind) -> f64 {
    report.summary(p).and_then(|s| s.worst_h_min).unwrap_or(f64::INFINITY)
}

fn infeasible(report: &AggregateReport, p: PolicyKind) -> usize {
    report.summary(p).map_or(usize::MAX, |s| s.infeasible_trials)
}

fn mean_time(report: &AggregateReport, p: PolicyKind) -> f64 {
    report.summary(p).and_then(|s| s.mean_converge_time).unwrap_or(f64::NAN)
}

fn preset_h(preset: Preset, dt: f64, policy: PolicyKind) -> f64 {
    let s = ScenarioConfig { dt, ..preset.scenario(&ScenarioConfig::default()).unwrap() };
    run_trial(&s, policy, TrialOptions::default()).unwrap().result.h_min.unwrap()
}

fn guaranteed_feasibility(base: &AggregateReport, elapsed: Duration) -> Outcome {
    let mut parts: Vec<(bool, String)> = [CENTRAL, CCS2, PCCA, PCCA_F]
        .into_iter()
        .map(|p| (infeasible(base, p) == 0, format!("{} {}", p.label(), infeasible(base, p))))
        .collect();
    parts.push((elapsed <= BATCH_BUDGET, format!("batch {:.1} s", elapsed.as_secs_f64())));
    outcome(&parts)
}

fn infeasibility_prevalence(base: &AggregateReport) -> Outcome {
    let others = [CENTRAL, CCS2, PCCA, PCCA_F].into_iter().map(|p| infeasible(base, p)).max().unwrap();
    let parts: Vec<(bool, String)> = [DF, DR]
        .into_iter()
        .map(|p| {
            let k = infeasible(base, p);
            (k >= 10 && k > others, format!("{} {k}", p.label()))
        })
        .collect();
    outcome(&parts)
}

fn safety_ordering(base: &AggregateReport) -> Outcome {
    let mut parts = vec![(h(base, CENTRAL) >= -0.05, format!("Central {:.4}", h(base, CENTRAL)))];
    for p in [PCCA, PCCA_F] {
        parts.push((h(base, p) >= -0.2, format!("{} {:.4}", p.label(), h(base, p))));
    }
    for p in [DF, DR] {
        parts.push((h(base, p) <= -0.5, format!("{} {:.4}", p.label(), h(base, p))));
    }
    outcome(&parts)
}

fn sampling_time_scaling() -> Outcome {
    let coarse = preset_h(Preset::DfCrossing, 0.05, CENTRAL).min(0.0).abs();
    let fine = preset_h(Preset::DfCrossing, 0.01, CENTRAL).min(0.0).abs();
    outcome(&[(
        fine <= 0.25 * coarse,
        format!("|h_min| {coarse:.6} at 50 ms, {fine:.6} at 10 ms"),
    )])
}

fn liveness_ordering(base: &AggregateReport) -> Outcome {
    let central = mean_time(base, CENTRAL);
    let pcca = mean_time(base, PCCA);
    let df = mean_time(base, DF);
    let mut parts = vec![
        ((pcca - central).abs() <= 0.1 * central, format!("PCCA/Central {:.3}", pcca / central)),
        (df >= 1.15 * central, format!("DF/Central {:.3}", df / central)),
    ];
    for p in [CENTRAL, PCCA, PCCA_F] {
        let k = base.summary(p).map_or(usize::MAX, |s| s.no_converge);
        parts.push((k == 0, format!("{} no-converge {k}", p.label())));
    }
    outcome(&parts)
}

fn margin_rerun_check(base: &AggregateReport, rerun: &AggregateReport) -> Outcome {
    let mut parts = Vec::new();
    for p in [CENTRAL, PCCA_F] {
        parts.push((h(rerun, p) >= -0.01, format!("{} {:.4}", p.label(), h(rerun, p))));
    }
    for p in [DF, DR] {
        let (before, after) = (infeasible(base, p), infeasible(rerun, p));
        parts.push((after >= before, format!("{} {before} -> {after}", p.label())));
    }
    outcome(&parts)
}

fn crossing_regression() -> Outcome {
    let mut parts = vec![{
        let v = preset_h(Preset::DfCrossing, 0.05, DF);
        (v < 0.0, format!("DF {v:.4}"))
    }];
    for p in [CENTRAL, PCCA, PCCA_F] {
        let v = preset_h(Preset::DfCrossing, 0.05, p);
        parts.push((v >= -0.01, format!("{} {v:.4}", p.label())));
    }
    outcome(&parts)
}

fn reciprocal_regression() -> Outcome {
    let s = Preset::DrThreeAgent.scenario(&ScenarioConfig::default()).unwrap();
    let r = run_trial(&s, DR, TrialOptions::default()).unwrap().result;
    let middle = r.infeasible_steps_per_agent[Preset::DR_MIDDLE_AGENT];
    let h = r.h_min.unwrap();
    outcome(&[
        (middle > 0, format!("middle agent infeasible steps {middle}")),
        (h < 0.0, format!("h_min {h:.4}")),
    ])
}

fn qp_oracle_equivalence() -> Outcome {
    let mut r = rng(2024);
    let solver = QpSolver::default();
    let (mut worst_u, mut worst_kkt, mut mismatched, mut infeasible) = (0.0f64, 0.0f64, 0, 0);
    for _ in 0..10_000 {
        let p = random_qp(&mut r, 6, 10);
        let sol = solver.solve(&p).unwrap();
        let (u, feasible) = oracle_solve(&p);
        if sol.feasible != feasible {
            mismatched += 1;
        }
        if !feasible {
            infeasible += 1;
        }
        worst_u = worst_u.max(rel_diff(&sol.u_star, &u));
        worst_kkt = worst_kkt.max(verify(&p, &sol).max());
    }
    outcome(&[
        (mismatched == 0, format!("{mismatched} feasibility mismatches ({infeasible} infeasible)")),
        (worst_u <= 1e-8, format!("u* {worst_u:.1e}")),
        (worst_kkt <= 1e-8, format!("KKT {worst_kkt:.1e}")),
    ])
}

fn admissible_set_suite() -> Outcome {
    let mut r = rng(77);
    let solver = QpSolver::default();
    let (mut worst_f, mut relaxed) = (f64::INFINITY, 0);
    for _ in 0..1000 {
        let n = r.random_range(2..=6);
        let cfg = ScenarioConfig { n_agents: n, ..ScenarioConfig::default() };
        let ctl = Controller::new(&cfg).unwrap();
        let world = random_cstar_world(&mut r, n, &cfg);
        let u = feasible_point_oracle(&world, &ctl).unwrap();
        for (i, j) in pairs(n) {
            let (_, v) = world.relative_state(i, j).unwrap();
            worst_f = worst_f.min(ctl.pair(&world, i, j).value(u[i], u[j]) - 2.0 * v.norm_sq());
        }
        let u0: Vec<Vec2> = (0..n).map(|_| random_vec(&mut r, 5.0)).collect();
        let w_hat: Vec<Vec2> = (0..n).map(|_| random_vec(&mut r, 3.0)).collect();
        let mut problems = vec![ctl.centralized_qp(&world, &u0)];
        for i in 0..n {
            problems.push(ctl.ccs2_qp(&world, u0[i], i));
            problems.push(ctl.pcca_qp(&world, u0[i], i, &w_hat));
        }
        relaxed += problems.iter().filter(|p| !solver.solve(p).unwrap().feasible).count();
    }
    outcome(&[
        (worst_f >= -1e-9, format!("min F - 2|v|^2 {worst_f:.2e}")),
        (relaxed == 0, format!("{relaxed} relaxed solves")),
    ])
}

fn lqr_correctness() -> Outcome {
    let q = 0.2;
    let (a, b) = common::planar_double_integrator();
    let (qm, rm) = (DMatrix::identity(4, 4) * q, DMatrix::identity(2, 2));
    let mut k0 = DMatrix::zeros(2, 4);
    for ax in 0..2 {
        k0[(ax, ax)] = 1.0;
        k0[(ax, ax + 2)] = 2.0;
    }
    let p = common::kleinman(&a, &b, &qm, &rm, k0);
    let g = cbf_swarm::baseline::lqr_gain(q).unwrap();
    let err = (p[(2, 0)] - g.k_pos).abs().max((p[(2, 2)] - g.k_vel).abs());
    let residual = cbf_swarm::baseline::care_residual(&g, q);
    outcome(&[
        (err <= 1e-8, format!("k_pos {:.7} k_vel {:.7} gain error {err:.1e}", g.k_pos, g.k_vel)),
        (residual <= 1e-10, format!("CARE residual {residual:.1e}")),
    ])
}

fn main() {
    let template = ScenarioConfig::default();
    let started = Instant::now();
    let base = run_batch(BATCH_TRIALS, &PolicyKind::all(PolicyKind::DEFAULT_FILTER_TAU), &template, BATCH_SEED)
        .expect("base batch");
    let elapsed = started.elapsed();
    let rerun = margin_rerun(&base, &template).expect("margin rerun");
    println!("base batch:\n{}", base.render_table());
    println!("margin rerun:\n{}", rerun.render_table());

    let results = [
        ("guaranteed feasibility", guaranteed_feasibility(&base, elapsed)),
        ("DF/DR infeasibility prevalence", infeasibility_prevalence(&base)),
        ("safety ordering", safety_ordering(&base)),
        ("sampling-time scaling", sampling_time_scaling()),
        ("liveness ordering", liveness_ordering(&base)),
        ("margin rerun", margin_rerun_check(&base, &rerun)),
        ("crossing regression", crossing_regression()),
        ("reciprocal regression", reciprocal_regression()),
        ("QP oracle equivalence", qp_oracle_equivalence()),
        ("admissible-set feasibility", admissible_set_suite()),
        ("LQR correctness", lqr_correctness()),
    ];
    let mut failed = 0;
    for (k, (name, o)) in results.iter().enumerate() {
        println!("criterion {:>2} {} {name}: {}", k + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
