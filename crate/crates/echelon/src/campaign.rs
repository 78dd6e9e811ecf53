//! Multi-seed train-and-evaluate campaigns.

use std::ops::ControlFlow;
use std::path::Path;

use echelon_core::lp::extract_lp_agent;
use echelon_core::ppo::{train, EvalRecord, PolicyBundle, PpoHyperparams, TrainConfig, TrainError};
use echelon_core::ScenarioSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checkpoint::save_checkpoint;
use crate::error::{Error, Result};
use crate::eval::{evaluate_agent, evaluation_rows, trace_aggregate_rows, AgentSpec, EvalPlan, EvalReport};
use crate::io::write_csv;
use crate::report::{compare_report, BoundRow, ComparisonRow};
use crate::solve::{perfect_information_bounds, solve_forecast};

/// Training seeds of the full-scale preset.
pub const TRAINING_SEEDS: [u64; 5] = [7, 17, 27, 37, 47];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Desk,
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignSpec {
    pub scenario: String,
    pub seeds: Vec<u64>,
    pub total_steps: u64,
    pub eval_every: u64,
    pub eval_episodes: usize,
    pub plan: EvalPlan,
    pub hyper: PpoHyperparams,
}

impl CampaignSpec {
    pub fn preset(p: Preset, scenario: &str) -> Self {
        let (seeds, total_steps) = match p {
            Preset::Desk => (vec![TRAINING_SEEDS[0]], 500_000),
            Preset::Full => (TRAINING_SEEDS.to_vec(), 7_200_000),
        };
        CampaignSpec {
            scenario: scenario.into(),
            seeds,
            total_steps,
            eval_every: 18_000,
            eval_episodes: 10,
            plan: EvalPlan::default(),
            hyper: PpoHyperparams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut s = self.seeds.clone();
        s.sort();
        s.dedup();
        let bad = if self.seeds.is_empty() || s.len() != self.seeds.len() {
            Some("training seeds must be distinct and non-empty")
        } else if self.eval_episodes == 0 || self.plan.num_episodes() == 0 || self.eval_every == 0 {
            Some("episode counts and cadence must be positive")
        } else {
            None
        };
        match bad {
            Some(m) => Err(Error::Mismatch(m.into())),
            None => self.hyper.validate().map_err(|e| Error::Train(e.into())),
        }
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig { seed, total_steps: self.total_steps, eval_every: self.eval_every, eval_episodes: self.eval_episodes }
    }
}

#[derive(Clone, Debug)]
pub struct SeedRun {
    pub seed: u64,
    pub curve: Vec<EvalRecord>,
    pub failure: Option<String>,
    pub report: Option<EvalReport>,
}

#[derive(Clone, Debug)]
pub struct CampaignRecord {
    pub scenario: String,
    pub runs: Vec<SeedRun>,
    pub lp: EvalReport,
    pub ppo: Option<EvalReport>,
    pub bounds: Vec<f64>,
    pub comparison: Option<ComparisonRow>,
}

#[derive(Serialize)]
struct CurveRow {
    env_steps: u64,
    eval_mean_cost: f64,
    eval_std_cost: f64,
    is_best: bool,
}

pub fn write_curve(path: &Path, curve: &[EvalRecord]) -> Result<()> {
    let rows: Vec<CurveRow> = curve
        .iter()
        .map(|r| CurveRow { env_steps: r.env_steps, eval_mean_cost: r.mean_cost, eval_std_cost: r.std_cost, is_best: r.is_best })
        .collect();
    write_csv(path, "learning-curve", &rows)
}

/// Trains one agent per seed, evaluates every agent and the LP baseline on
/// the shared episodes, and computes bounds and the comparison. A seed that
/// diverges is recorded and skipped. With `out`, writes checkpoints, curves
/// and CSV reports there.
pub fn run_campaign(s: &ScenarioSpec, spec: &CampaignSpec, out: Option<&Path>) -> Result<CampaignRecord> {
    spec.validate()?;
    if s.name != spec.scenario {
        return Err(Error::Mismatch(format!("campaign is for `{}`, got `{}`", spec.scenario, s.name)));
    }
    let trained: Vec<(u64, std::result::Result<(PolicyBundle, Vec<EvalRecord>), TrainError>)> = spec
        .seeds
        .par_iter()
        .map(|&seed| {
            let r = train(s, spec.hyper.clone(), &spec.train_config(seed), |_, _| ControlFlow::Continue(()));
            (seed, r.map(|o| (o.best, o.curve)))
        })
        .collect();

    let mut runs = Vec::with_capacity(trained.len());
    for (seed, r) in trained {
        let run = match r {
            Ok((bundle, curve)) => {
                if let Some(dir) = out {
                    save_checkpoint(&dir.join(format!("checkpoints/seed_{seed}.json")), &s.name, &bundle)?;
                    write_curve(&dir.join(format!("curves/seed_{seed}.csv")), &curve)?;
                }
                let report = evaluate_agent(AgentSpec::Ppo(&bundle), &format!("ppo-seed{seed}"), s, &spec.plan)?;
                SeedRun { seed, curve, failure: None, report: Some(report) }
            }
            Err(e) => SeedRun { seed, curve: Vec::new(), failure: Some(e.to_string()), report: None },
        };
        runs.push(run);
    }

    let plan = extract_lp_agent(&solve_forecast(s)?, &s.chain)?;
    let lp = evaluate_agent(AgentSpec::Lp(&plan), "lp", s, &spec.plan)?;
    let bounds = perfect_information_bounds(s, &spec.plan.episode_seeds())?;
    let reports: Vec<EvalReport> = runs.iter().filter_map(|r| r.report.clone()).collect();
    let ppo = if reports.is_empty() { None } else { Some(EvalReport::pool("ppo", &reports)?) };
    let comparison = ppo.as_ref().map(|p| compare_report(&lp, p, &bounds, spec.seeds[0])).transpose()?;

    if let Some(dir) = out {
        let mut rows = evaluation_rows(&lp);
        let mut trace = trace_aggregate_rows(&lp);
        for r in &reports {
            rows.extend(evaluation_rows(r));
        }
        if let Some(p) = &ppo {
            trace.extend(trace_aggregate_rows(p));
        }
        write_csv(&dir.join("evaluation.csv"), "evaluation", &rows)?;
        write_csv(&dir.join("trace_aggregate.csv"), "trace-aggregate", &trace)?;
        let seeds = spec.plan.episode_seeds();
        let brows: Vec<BoundRow> =
            bounds.iter().enumerate().map(|(i, &b)| BoundRow { episode_id: i, seed: seeds[i], bound: b }).collect();
        write_csv(&dir.join("bounds.csv"), "bounds", &brows)?;
        if let Some(c) = &comparison {
            write_csv(&dir.join("comparison.csv"), "comparison", std::slice::from_ref(c))?;
        }
    }
    Ok(CampaignRecord { scenario: s.name.clone(), runs, lp, ppo, bounds, comparison })
}
