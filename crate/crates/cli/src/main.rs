mod config;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use cbf_swarm::montecarlo::{
    batch_scenarios, margin_rerun, run_batch, run_trial, trial_seed, AggregateReport, TrialOptions, TrialResult,
    TrialRun,
};
use cbf_swarm::policies::PolicyKind;
use cbf_swarm::presets::Preset;
use cbf_swarm::ScenarioConfig;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use config::RunConfig;

/// Multi-agent CBF collision-avoidance simulations.
#[derive(Parser)]
#[command(name = "cbfsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one of the fixed regression scenarios and write its trace.
    Preset(PresetArgs),
    /// Run trial `k` of a configured batch and write its trace.
    Trial(TrialArgs),
    /// Run a Monte-Carlo batch over every configured policy.
    Mc(McArgs),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; unset keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sample time override in seconds.
    #[arg(long)]
    dt: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PresetArgs {
    /// df_crossing, dr_three_agent or five_agent_demo.
    name: Preset,
    #[arg(long, default_value = "centralized")]
    policy: PolicyKind,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct TrialArgs {
    /// Trial index within the batch.
    #[arg(long, default_value_t = 0)]
    trial: usize,
    #[arg(long, default_value = "centralized")]
    policy: PolicyKind,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct McArgs {
    /// Policies to compare; repeat or comma-separate. Replaces the config list.
    #[arg(long, value_delimiter = ',')]
    policy: Vec<PolicyKind>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Rerun with each policy's margin widened by its worst violation.
    #[arg(long)]
    margin_rerun: bool,
    /// Write a trace CSV for every trial and policy.
    #[arg(long)]
    trace: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Serialize)]
struct RunSummary<'a> {
    name: &'a str,
    policy: PolicyKind,
    scenario: &'a ScenarioConfig,
    result: &'a TrialResult,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Preset(a) => cmd_preset(a),
        Command::Trial(a) => cmd_trial(a),
        Command::Mc(a) => cmd_mc(a),
    }
}

fn load(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(dt) = common.dt {
        cfg.dt = dt;
    }
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn write_run(dir: &Path, name: &str, scenario: &ScenarioConfig, policy: PolicyKind, run: &TrialRun) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let tag = format!("{}_{}", run.result.trial, policy.slug());
    if let Some(trace) = &run.trace {
        let mut w = create(&dir.join(format!("trace_{tag}.csv")))?;
        trace.write_csv(&mut w)?;
        w.flush()?;
    }
    let summary = RunSummary { name, policy, scenario, result: &run.result };
    let mut w = create(&dir.join(format!("summary_{tag}.json")))?;
    serde_json::to_writer_pretty(&mut w, &summary)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn print_result(name: &str, policy: PolicyKind, r: &TrialResult) {
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
    println!(
        "{name} {}: converged {} at {} s, h_min {}, infeasible steps {} {:?}",
        policy.label(),
        r.converged,
        opt(r.converge_time),
        opt(r.h_min),
        r.infeasible_steps,
        r.infeasible_steps_per_agent,
    );
}

fn cmd_preset(a: PresetArgs) -> Result<()> {
    let cfg = load(&a.common)?;
    let scenario = a.name.scenario(&cfg.scenario())?;
    let opts = TrialOptions { trace: true, ..Default::default() };
    let run = run_trial(&scenario, a.policy, opts)?;
    write_run(&cfg.out_dir, a.name.name(), &scenario, a.policy, &run)?;
    print_result(a.name.name(), a.policy, &run.result);
    Ok(())
}

fn cmd_trial(a: TrialArgs) -> Result<()> {
    let mut cfg = load(&a.common)?;
    if let Some(seed) = a.seed {
        cfg.base_seed = seed;
    }
    let scenario = batch_scenarios(a.trial + 1, &cfg.scenario(), cfg.base_seed)?.pop().expect("one scenario");
    let opts = TrialOptions { trial: a.trial, seed: trial_seed(cfg.base_seed, a.trial), trace: true, ..Default::default() };
    let run = run_trial(&scenario, a.policy, opts)?;
    let name = format!("trial {}", a.trial);
    write_run(&cfg.out_dir, &name, &scenario, a.policy, &run)?;
    print_result(&name, a.policy, &run.result);
    Ok(())
}

fn write_report(dir: &Path, report: &AggregateReport) -> Result<String> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut w = create(&dir.join("trials.jsonl"))?;
    report.write_jsonl(&mut w)?;
    w.flush()?;
    let mut w = create(&dir.join("aggregate.csv"))?;
    report.write_csv(&mut w)?;
    w.flush()?;
    let table = report.render_table();
    fs::write(dir.join("aggregate.txt"), &table)?;
    Ok(table)
}

fn cmd_mc(a: McArgs) -> Result<()> {
    let mut cfg = load(&a.common)?;
    if !a.policy.is_empty() {
        cfg.policies = a.policy;
    }
    if let Some(n) = a.trials {
        cfg.n_trials = n;
    }
    if let Some(seed) = a.seed {
        cfg.base_seed = seed;
    }
    cfg.trace |= a.trace;
    cfg.margin_rerun |= a.margin_rerun;
    cfg.validate()?;

    let out = cfg.out_dir.clone();
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("config.toml"), cfg.to_toml()?)?;

    let template = cfg.scenario();
    let report = run_batch(cfg.n_trials, &cfg.policies, &template, cfg.base_seed)?;
    print!("{}", write_report(&out, &report)?);

    if cfg.margin_rerun {
        let rerun = margin_rerun(&report, &template)?;
        println!("margin rerun:");
        print!("{}", write_report(&out.join("margin_rerun"), &rerun)?);
    }

    if cfg.trace {
        let scenarios = batch_scenarios(cfg.n_trials, &template, cfg.base_seed)?;
        for &policy in &cfg.policies {
            for (k, scenario) in scenarios.iter().enumerate() {
                let opts = TrialOptions { trial: k, seed: trial_seed(cfg.base_seed, k), trace: true, ..Default::default() };
                let run = run_trial(scenario, policy, opts)?;
                if let Some(trace) = &run.trace {
                    let mut w = create(&out.join(format!("trace_{k}_{}.csv", policy.slug())))?;
                    trace.write_csv(&mut w)?;
                    w.flush()?;
                }
            }
        }
    }
    Ok(())
}
