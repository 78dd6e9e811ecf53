use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use echelon::campaign::{run_campaign, write_curve, CampaignSpec, Preset};
use echelon::checkpoint::{load_checkpoint, save_checkpoint};
use echelon::eval::{
    demand_trace, evaluate_agent, evaluation_rows, trace_aggregate_rows, trace_episode, AgentSpec, EvalPlan, EvalReport,
};
use echelon::io::{read_csv, write_atomic, write_csv};
use echelon::lpfile::to_lp_format;
use echelon::report::{compare_report, BoundRow};
use echelon::scenario_file::{resolve_scenario, to_toml, write_catalog};
use echelon::solve::{perfect_information_bounds, solve_forecast};
use echelon::tune::{random_search_tune, TuneConfig};
use echelon_core::lp::{build_lp, extract_lp_agent, DeterministicScenario, LpAgentPlan};
use echelon_core::ppo::{train_from, PolicyBundle, TrainConfig};
use echelon_core::{ObsScales, ScenarioSpec, CATALOG};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "echelon", version, about = "Supply-chain planning workbench: simulation, LP baseline and PPO")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Catalog name or path to a scenario TOML file.
    #[arg(long, default_value = "N20")]
    scenario: String,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "desk")]
    preset: Preset,
}

#[derive(Subcommand)]
enum Cmd {
    /// Inspect the scenario catalog.
    Scenario {
        #[command(subcommand)]
        cmd: ScenarioCmd,
    },
    /// Write the realized retailer demands of one episode.
    DemandTrace {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Forecast LP, its replay plan and per-episode lower bounds.
    Lp {
        #[command(subcommand)]
        cmd: LpCmd,
    },
    /// Train a PPO agent.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Environment steps; defaults to the preset.
        #[arg(long)]
        steps: Option<u64>,
        /// Environment steps between evaluations.
        #[arg(long, default_value_t = 18_000)]
        eval_every: u64,
        /// Continue from this checkpoint instead of a fresh agent.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Evaluate a checkpoint or the LP agent on the shared episodes.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// PPO checkpoint; the LP agent is evaluated when omitted.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Also write a node-level trace of this episode seed.
        #[arg(long)]
        trace_seed: Option<u64>,
        /// Environment seeds of the evaluation plan.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long, default_value_t = 10)]
        episodes_per_seed: usize,
    },
    /// Random-search hyperparameter tuning.
    Tune {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Environment steps per trial.
        #[arg(long, default_value_t = 180_000)]
        steps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare saved LP and PPO evaluation reports against the bounds.
    Report {
        #[arg(long)]
        lp: PathBuf,
        #[arg(long)]
        ppo: PathBuf,
        #[arg(long)]
        bounds: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train on several seeds, evaluate everything and write the comparison.
    Campaign {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        steps: Option<u64>,
    },
}

#[derive(Subcommand)]
enum ScenarioCmd {
    List,
    /// Print a scenario as TOML.
    Dump { name: String },
    /// Write every catalog scenario as TOML into a directory.
    Export { dir: PathBuf },
}

#[derive(Subcommand)]
enum LpCmd {
    /// Solve the forecast LP; writes the model in LP format.
    Solve {
        #[command(flatten)]
        common: Common,
    },
    /// Write the LP agent's dispatch schedule.
    Plan {
        #[command(flatten)]
        common: Common,
    },
    /// Perfect-information bounds on the shared evaluation episodes.
    Bounds {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long, default_value_t = 10)]
        episodes_per_seed: usize,
    },
}

#[derive(Serialize)]
struct PlanRow {
    step: usize,
    node: String,
    quantity: f64,
    kind: &'static str,
}

fn plan_rows(s: &ScenarioSpec, plan: &LpAgentPlan) -> Vec<PlanRow> {
    let c = &s.chain;
    let mut rows = Vec::new();
    for t in 1..=plan.horizon {
        for (i, p) in plan.production.iter().enumerate() {
            rows.push(PlanRow { step: t, node: c.node_names[i].clone(), quantity: p[t], kind: "production" });
        }
        for (l, q) in plan.shipments.iter().enumerate() {
            let link = c.links[l];
            let node = format!("{}->{}", c.node_names[link.from.0], c.node_names[link.to.0]);
            rows.push(PlanRow { step: t, node, quantity: q[t], kind: "shipment" });
        }
    }
    rows
}

fn eval_plan(seeds: Option<Vec<u64>>, per_seed: usize) -> EvalPlan {
    let mut p = EvalPlan::default();
    if let Some(s) = seeds {
        p.seeds = s;
    }
    p.episodes_per_seed = per_seed;
    p
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> anyhow::Result<()> {
    write_atomic(path, &serde_json::to_vec_pretty(v)?)?;
    Ok(())
}

fn lp_plan(s: &ScenarioSpec) -> anyhow::Result<LpAgentPlan> {
    let sol = solve_forecast(s).context("solving the forecast LP")?;
    Ok(extract_lp_agent(&sol, &s.chain)?)
}

fn default_steps(p: Preset) -> u64 {
    CampaignSpec::preset(p, "").total_steps
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.cmd {
        Cmd::Scenario { cmd: ScenarioCmd::List } => {
            for name in CATALOG {
                let s = resolve_scenario(name)?;
                println!("{name:8} demand={:?} lead_time={:?}", s.demand.kind, s.lead_time.kind);
            }
        }
        Cmd::Scenario { cmd: ScenarioCmd::Export { dir } } => {
            write_catalog(&dir)?;
            println!("wrote {} scenarios to {}", CATALOG.len(), dir.display());
        }
        Cmd::Scenario { cmd: ScenarioCmd::Dump { name } } => print!("{}", to_toml(&resolve_scenario(&name)?)?),
        Cmd::DemandTrace { common, seed } => {
            let s = resolve_scenario(&common.scenario)?;
            let path = common.out.join(format!("demand_{}_{seed}.csv", s.name));
            write_csv(&path, "demand-trace", &demand_trace(&s, seed))?;
            println!("wrote {}", path.display());
        }
        Cmd::Lp { cmd: LpCmd::Solve { common } } => {
            let s = resolve_scenario(&common.scenario)?;
            let inst = build_lp(&s, &DeterministicScenario::forecast(&s))?;
            write_atomic(&common.out.join(format!("{}.lp", s.name)), to_lp_format(&inst, &s.name).as_bytes())?;
            let sol = solve_forecast(&s)?;
            println!("{}: rows={} vars={} objective={:.3}", s.name, inst.rows.len(), inst.num_vars(), sol.objective);
        }
        Cmd::Lp { cmd: LpCmd::Plan { common } } => {
            let s = resolve_scenario(&common.scenario)?;
            let plan = lp_plan(&s)?;
            write_csv(&common.out.join("plan.csv"), "plan", &plan_rows(&s, &plan))?;
            write_json(&common.out.join("plan.json"), &plan)?;
            println!("wrote plan for {} to {}", s.name, common.out.display());
        }
        Cmd::Lp { cmd: LpCmd::Bounds { common, seeds, episodes_per_seed } } => {
            let s = resolve_scenario(&common.scenario)?;
            let ep = eval_plan(seeds, episodes_per_seed).episode_seeds();
            let bounds = perfect_information_bounds(&s, &ep)?;
            let rows: Vec<BoundRow> =
                bounds.iter().enumerate().map(|(i, &b)| BoundRow { episode_id: i, seed: ep[i], bound: b }).collect();
            write_csv(&common.out.join("bounds.csv"), "bounds", &rows)?;
            let (m, sd) = echelon_core::ppo::train::mean_std(&bounds);
            println!("{}: {} bounds, mean {m:.1}, std {sd:.1}", s.name, bounds.len());
        }
        Cmd::Train { common, seed, steps, eval_every, resume } => {
            let s = resolve_scenario(&common.scenario)?;
            let mut spec = CampaignSpec::preset(common.preset, &s.name);
            spec.total_steps = steps.unwrap_or_else(|| default_steps(common.preset));
            let bundle = match resume {
                Some(p) => {
                    let (name, b) = load_checkpoint(&p)?;
                    if name != s.name {
                        bail!("checkpoint was trained on `{name}`, not `{}`", s.name);
                    }
                    b
                }
                None => PolicyBundle::new(&ObsScales::for_scenario(&s), s.chain.action_len(), spec.hyper.clone(), seed),
            };
            let cfg = TrainConfig { eval_every, ..spec.train_config(seed) };
            let out = train_from(&s, bundle, &cfg, |r, _| {
                println!("steps {:>9}  eval {:>14.1} ± {:>12.1}{}", r.env_steps, r.mean_cost, r.std_cost, if r.is_best { "  *" } else { "" });
                std::ops::ControlFlow::Continue(())
            })?;
            save_checkpoint(&common.out.join("best.json"), &s.name, &out.best)?;
            save_checkpoint(&common.out.join("last.json"), &s.name, &out.last)?;
            write_curve(&common.out.join("learning_curve.csv"), &out.curve)?;
            println!("wrote checkpoints to {}", common.out.display());
        }
        Cmd::Evaluate { common, checkpoint, trace_seed, seeds, episodes_per_seed } => {
            let s = resolve_scenario(&common.scenario)?;
            let plan = eval_plan(seeds, episodes_per_seed);
            let (bundle, lp);
            let agent = match &checkpoint {
                Some(p) => {
                    let name;
                    (name, bundle) = load_checkpoint(p)?;
                    if name != s.name {
                        bail!("checkpoint was trained on `{name}`, not `{}`", s.name);
                    }
                    AgentSpec::Ppo(&bundle)
                }
                None => {
                    lp = lp_plan(&s)?;
                    AgentSpec::Lp(&lp)
                }
            };
            let report = evaluate_agent(agent, agent.kind(), &s, &plan)?;
            let tag = agent.kind();
            write_csv(&common.out.join(format!("evaluation_{tag}.csv")), "evaluation", &evaluation_rows(&report))?;
            write_csv(&common.out.join(format!("trace_aggregate_{tag}.csv")), "trace-aggregate", &trace_aggregate_rows(&report))?;
            write_json(&common.out.join(format!("report_{tag}.json")), &report)?;
            if let Some(seed) = trace_seed {
                write_csv(&common.out.join(format!("trace_{tag}_{seed}.csv")), "trace", &trace_episode(agent, &s, seed)?)?;
            }
            println!("{} {tag}: mean {:.1}, std {:.1} over {} episodes", s.name, report.mean, report.std, report.episodes.len());
        }
        Cmd::Tune { common, trials, steps, seed } => {
            let s = resolve_scenario(&common.scenario)?;
            let cfg = TuneConfig { trials, steps_per_trial: steps, eval_every: 18_000, eval_episodes: 10, seed, n_startup: 1 };
            let out = random_search_tune(&s, &cfg, |t| {
                let status = match (&t.failure, t.pruned) {
                    (Some(e), _) => format!("failed: {e}"),
                    (None, true) => "pruned".into(),
                    (None, false) => format!("best {:.1}", t.best_cost.unwrap_or(f64::NAN)),
                };
                println!("trial {:>3}: {status}", t.index);
            });
            write_json(&common.out.join("tuning.json"), &out)?;
            println!("best trial: {:?}", out.best_trial);
        }
        Cmd::Report { lp, ppo, bounds, out, seed } => {
            let lp: EvalReport = serde_json::from_slice(&std::fs::read(&lp)?)?;
            let ppo: EvalReport = serde_json::from_slice(&std::fs::read(&ppo)?)?;
            let b: Vec<f64> = read_csv::<BoundRow>(&bounds)?.into_iter().map(|r| r.bound).collect();
            let row = compare_report(&lp, &ppo, &b, seed)?;
            write_csv(&out.join("comparison.csv"), "comparison", std::slice::from_ref(&row))?;
            println!("{}: gain {:.0} ({:.1}%)", row.scenario, row.gain, row.gain_pct);
        }
        Cmd::Campaign { common, seeds, steps } => {
            let s = resolve_scenario(&common.scenario)?;
            let mut spec = CampaignSpec::preset(common.preset, &s.name);
            if let Some(seeds) = seeds {
                spec.seeds = seeds;
            }
            if let Some(n) = steps {
                spec.total_steps = n;
            }
            let rec = run_campaign(&s, &spec, Some(&common.out))?;
            for r in &rec.runs {
                if let Some(e) = &r.failure {
                    eprintln!("seed {} failed: {e}", r.seed);
                }
            }
            match &rec.comparison {
                Some(c) => println!(
                    "{}: bound {:.0}, LP {:.0} ± {:.0}, PPO {:.0} ± {:.0}, gain {:.1}%",
                    c.scenario, c.bound_mean, c.lp_mean, c.lp_std, c.ppo_mean, c.ppo_std, c.gain_pct
                ),
                None => bail!("every training seed failed"),
            }
        }
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run(Cli::parse())
}
