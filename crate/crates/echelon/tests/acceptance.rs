//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line. Set `ACCEPTANCE_ONLY=1,7`
//! to run a subset.

mod common;

use std::ops::ControlFlow;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::{check_transition, gae_gap, grid_optimum, in_flight, loss_gradient_error, random_tiny_instance, rng, BalanceStats};
use echelon::eval::{evaluate_agent, AgentSpec, EvalPlan, EvalReport};
use echelon::solve::{perfect_information_bounds, solve_forecast, solve_lp};
use echelon::stats::{bootstrap_ci, gain, round1};
use echelon_core::codec::{cut_base, normalize_observation};
use echelon_core::lp::{build_lp, extract_lp_agent, DeterministicScenario, LeadTimes, LpStatus};
use echelon_core::ppo::{train, Activation, PolicyBundle, PpoHyperparams, TrainConfig};
use echelon_core::scenario::default_chain;
use echelon_core::sim::ObsLayout;
use echelon_core::{
    builtin_scenario, decode_action, encode_plan, ChainConfig, NodeId, NormalizedAction, ObsScales, Observation,
    RawAction, ScenarioSpec, ShipmentUnits, Simulator, CATALOG,
};
use rand::Rng;

// Pinned tolerances.
const TABLE_DECIMALS: f64 = 5e-4;
const PRODUCTION_EXAMPLE_TOL: f64 = 1e-9;
const SHIPMENT_EXAMPLE_UNITS: f64 = 1.0;
const ROUND_TRIP_REL: f64 = 1e-9;
const BALANCE_REL: f64 = 1e-9;
const COST_REL: f64 = 1e-12;
const LP_MATCH_REL: f64 = 1e-6;
const REPLAY_REL: f64 = 1e-6;
const REFERENCE_N0CL: f64 = 7_941_000.0;
const REFERENCE_BAND: f64 = 0.10;
const BOUND_SLACK_REL: f64 = 1e-9;
const GRADIENT_REL: f64 = 1e-4;
const GAE_ABS: f64 = 1e-10;
const MIN_IMPROVEMENT: f64 = 0.30;
const MAX_BOUND_RATIO: f64 = 1.5;
const UNTRAINED_BAND: (f64, f64) = (14e6, 24e6);
const REFERENCE_LP_MEAN: f64 = 10_298.0;
const REFERENCE_PPO_MEAN: f64 = 9_147.0;
const REFERENCE_GAIN_PCT: f64 = 11.2;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn untrained(s: &ScenarioSpec, seed: u64) -> PolicyBundle {
    PolicyBundle::new(&ObsScales::for_scenario(s), s.chain.action_len(), PpoHyperparams::default(), seed)
}

// 1 -------------------------------------------------------------------------

fn codec_fidelity() -> Outcome {
    let mut c = default_chain();
    c.stock_cap = vec![500.0; 8];
    c.production_cap = vec![400.0, 400.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    let scales = ObsScales::new(&c, 4, 400.0);
    let l = ObsLayout::of(&c);
    let mut v = vec![0.0; l.len()];
    // (slot, value, max, normalized)
    let rows = [
        (l.stock(0), 400.0, 500.0, 0.600),
        (l.arriving_next(1), 330.0, 400.0, 0.650),
        (l.arriving_later(1), 105.0, 1200.0, -0.825),
        (l.arriving_next(2), 280.0, 1000.0, -0.440),
        (l.arriving_later(2), 420.0, 3000.0, -0.720),
        (l.demand(0), 138.0, 400.0, -0.310),
        (l.remaining(), 330.0, 360.0, 0.833),
    ];
    for &(i, x, _, _) in &rows {
        v[i] = x;
    }
    let norm = normalize_observation(&Observation(v), &scales);
    let mut worst: f64 = 0.0;
    for &(i, _, max, expect) in &rows {
        if scales.maxima[i] != max {
            return Err(format!("maximum of slot {i} is {}, expected {max}", scales.maxima[i]));
        }
        worst = worst.max((norm.0[i] - expect).abs());
    }
    if worst > TABLE_DECIMALS {
        return Err(format!("normalized table values off by {worst:.2e}"));
    }

    let stocks = [0.0, 0.0, 295.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    let mut a = vec![-1.0; c.action_len()];
    a[0] = 0.050;
    let f1 = c.outgoing(NodeId(2));
    a[2 + f1[0]] = 0.492;
    a[2 + f1[1]] = -0.864;
    let raw = decode_action(&NormalizedAction(a), &stocks, &c).map_err(|e| e.to_string())?;
    let produced = raw.production[0];
    let (w1, w2) = (raw.shipments[f1[0]], raw.shipments[f1[1]]);
    let kept = 295.0 - w1 - w2;
    let ok = (produced - 210.0).abs() <= PRODUCTION_EXAMPLE_TOL
        && (w1 - 200.0).abs() <= SHIPMENT_EXAMPLE_UNITS
        && (w2 - 20.0).abs() <= SHIPMENT_EXAMPLE_UNITS
        && (kept - 75.0).abs() <= SHIPMENT_EXAMPLE_UNITS;
    ensure(
        ok,
        format!("table max error {worst:.1e}; production {produced}; ships {w1:.2}/{w2:.2}, keeps {kept:.2}"),
    )
}

// 2 -------------------------------------------------------------------------

fn random_feasible(c: &ChainConfig, r: &mut rand_chacha::ChaCha8Rng) -> (Vec<f64>, RawAction) {
    let stocks: Vec<f64> = (0..c.num_nodes())
        .map(|n| match r.random_range(0..10) {
            0 => 0.0,
            1 => c.stock_cap[n],
            _ => r.random_range(0.0..c.stock_cap[n]),
        })
        .collect();
    let mut q = RawAction::zeros(c);
    for (s, p) in q.production.iter_mut().enumerate() {
        *p = if r.random_bool(0.1) { 0.0 } else { r.random_range(0.0..=c.production_cap[s]) };
    }
    for n in c.shipping_nodes() {
        let base = cut_base(c, n, stocks[n.0]);
        let out = c.outgoing(n);
        let used = if r.random_bool(0.1) { 1.0 } else { r.random_range(0.0..=1.0) };
        let mut w: Vec<f64> = out.iter().map(|_| if r.random_bool(0.15) { 0.0 } else { r.random_range(0.0..1.0) }).collect();
        let sum: f64 = w.iter().sum();
        if sum > 0.0 {
            w.iter_mut().for_each(|x| *x /= sum);
        }
        for (k, &l) in out.iter().enumerate() {
            q.shipments[l] = base * used * w[k];
        }
    }
    (stocks, q)
}

fn codec_round_trip() -> Outcome {
    let mut r = rng(2);
    let mut chains = vec![default_chain(), builtin_scenario("N20stc").unwrap().chain];
    let mut product = default_chain();
    product.shipment_units = ShipmentUnits::Product;
    chains.push(product);
    let mut worst: f64 = 0.0;
    let cases = 10_000;
    for i in 0..cases {
        let c = &chains[i % chains.len()];
        let (stocks, q) = random_feasible(c, &mut r);
        let a = encode_plan(&q, &stocks, c).map_err(|e| format!("case {i}: {e}"))?;
        let back = decode_action(&a, &stocks, c).map_err(|e| format!("case {i}: {e}"))?;
        for (s, (&x, &y)) in q.production.iter().zip(&back.production).enumerate() {
            worst = worst.max((x - y).abs() / c.production_cap[s].max(1.0));
        }
        for n in c.shipping_nodes() {
            let base = cut_base(c, n, stocks[n.0]);
            if base > 0.0 {
                for l in c.outgoing(n) {
                    worst = worst.max((q.shipments[l] - back.shipments[l]).abs() / base.max(1.0));
                }
            }
        }
    }
    ensure(worst <= ROUND_TRIP_REL, format!("{cases} cases, max relative error {worst:.2e}"))
}

// 3 -------------------------------------------------------------------------

fn mass_balance() -> Outcome {
    let episodes = 1_000;
    let mut acc = BalanceStats::default();
    let mut worst_total: f64 = 0.0;
    let mut lengths_ok = true;
    for e in 0..episodes {
        let s = builtin_scenario(CATALOG[e % CATALOG.len()]).unwrap();
        let c = s.chain.clone();
        let (mut sim, _) = Simulator::new(s, 1_000 + e as u64).map_err(|x| x.to_string())?;
        let mut r = rng(e as u64);
        let mut summed = echelon_core::CostBreakdown::default();
        let mut steps = 0;
        while !sim.is_done() {
            let before_stocks = sim.state().stocks.clone();
            let before_flight = in_flight(sim.state(), sim.state().t);
            let a = NormalizedAction((0..c.action_len()).map(|_| r.random_range(-1.0..=1.0)).collect());
            let (_, out) = sim.step(&a).map_err(|x| x.to_string())?;
            check_transition(&c, &before_stocks, before_flight, sim.state(), &out, &mut acc);
            summed += out.cost;
            steps += 1;
        }
        lengths_ok &= steps == c.horizon;
        let total = sim.episode_cost();
        for (x, y) in summed.to_array().iter().zip(total.to_array()) {
            worst_total = worst_total.max((x - y).abs() / (1.0 + y.abs()));
        }
    }
    let detail = format!(
        "{episodes} episodes, {} steps; node {:.1e}, pipeline {:.1e}, cost {:.1e}, totals {:.1e}; {} reward mismatches, {} bound violations",
        acc.steps, acc.max_node_error, acc.max_pipeline_error, acc.max_cost_error, worst_total, acc.reward_mismatches, acc.bound_violations
    );
    ensure(
        lengths_ok
            && acc.max_node_error <= BALANCE_REL
            && acc.max_pipeline_error <= BALANCE_REL
            && acc.max_cost_error <= COST_REL
            && worst_total <= BALANCE_REL
            && acc.reward_mismatches == 0
            && acc.bound_violations == 0,
        detail,
    )
}

// 4 -------------------------------------------------------------------------

fn zero_demand(s: &ScenarioSpec) -> DeterministicScenario {
    let h = s.chain.horizon;
    DeterministicScenario {
        demands: vec![vec![0.0; h + 1]; s.chain.num_retailers()],
        lead_times: LeadTimes::Constant(s.lead_time.average),
    }
}

/// Without demand each unit is either carried to the end or discarded on
/// arrival, whichever is cheaper; nothing is produced or moved.
fn carrying_optimum(c: &ChainConfig) -> f64 {
    let h = c.horizon;
    let unit = |n: usize, first_step: usize| c.excess_penalty.min(c.stock_cost[n] * (h + 1 - first_step) as f64);
    let mut total = 0.0;
    for n in 0..c.num_nodes() {
        total += c.initial_stock[n] * unit(n, 1);
        for (k, &x) in c.initial_production[n].iter().enumerate() {
            total += x * unit(n, k + 1);
        }
    }
    for (l, link) in c.links.iter().enumerate() {
        for (k, &x) in c.initial_transport[l].iter().enumerate() {
            total += x * unit(link.to.0, k + 1);
        }
    }
    total
}

fn lp_oracle() -> Outcome {
    let mut r = rng(4);
    let mut worst: f64 = 0.0;
    let instances = 50;
    for i in 0..instances {
        let inst = random_tiny_instance(&mut r, 8);
        let sol = solve_lp(&build_lp(&inst.scenario, &inst.det).unwrap()).map_err(|e| e.to_string())?;
        if sol.status != LpStatus::Optimal {
            return Err(format!("instance {i} is {:?}", sol.status));
        }
        let grid = grid_optimum(&inst);
        // the grid is a subset of the feasible region, so its optimum can only be higher
        if sol.objective > grid + LP_MATCH_REL * (1.0 + grid.abs()) {
            return Err(format!("instance {i}: LP {} above grid optimum {grid}", sol.objective));
        }
        worst = worst.max((sol.objective - grid).abs() / (1.0 + grid.abs()));
    }

    // hand instance: carrying beats discarding, so the optimum is pure carrying cost
    let mut tiny = builtin_scenario("rN0cl").unwrap();
    let mut c = ChainConfig::layered(&[1, 1], 4);
    c.stock_cap = vec![10.0, 10.0];
    c.transport_cap = vec![10.0, 10.0];
    c.production_cap = vec![5.0, 0.0];
    c.stock_cost = vec![1.0, 2.0];
    c.production_cost = vec![1.0, 0.0];
    c.transport_cost = 1.0;
    c.excess_penalty = 100.0;
    c.unmet_penalty = 50.0;
    c.initial_stock = vec![3.0, 5.0];
    c.initial_production = vec![vec![2.0], vec![]];
    c.initial_transport = vec![vec![4.0]];
    tiny.chain = c;
    tiny.lead_time.average = 1;
    let hand = (3.0 + 2.0) * 1.0 * 4.0 + (5.0 + 4.0) * 2.0 * 4.0;
    let small = solve_lp(&build_lp(&tiny, &zero_demand(&tiny)).unwrap()).map_err(|e| e.to_string())?;

    // full chain: every unit costs min(discard, carry to the end)
    let full = builtin_scenario("rN0cl").unwrap();
    let expect_full = carrying_optimum(&full.chain);
    let big = solve_lp(&build_lp(&full, &zero_demand(&full)).unwrap()).map_err(|e| e.to_string())?;
    let exact = |x: f64, y: f64| (x - y).abs() <= 1e-9 * (1.0 + y.abs());
    ensure(
        worst <= LP_MATCH_REL && small.objective == hand && exact(big.objective, expect_full),
        format!(
            "{instances} instances, max gap {worst:.1e}; zero demand: {} vs {hand}, full chain {:.3} vs {expect_full:.3}",
            small.objective, big.objective
        ),
    )
}

// 5 -------------------------------------------------------------------------

fn deterministic_consistency() -> Outcome {
    let plan = EvalPlan::default();
    let mut parts = Vec::new();
    let mut ok = true;
    for name in ["N0cl", "rN0cl"] {
        let s = builtin_scenario(name).unwrap();
        let sol = solve_forecast(&s).map_err(|e| e.to_string())?;
        let lp = extract_lp_agent(&sol, &s.chain).map_err(|e| e.to_string())?;
        let rep = evaluate_agent(AgentSpec::Lp(&lp), "lp", &s, &plan).map_err(|e| e.to_string())?;
        let worst = rep.costs().iter().map(|c| (c - sol.objective).abs() / sol.objective).fold(0.0, f64::max);
        ok &= worst <= REPLAY_REL && rep.std <= REPLAY_REL * rep.mean;
        parts.push(format!("{name} objective {:.0}, replay gap {worst:.1e}, std {:.1e}", sol.objective, rep.std));
        if name == "N0cl" {
            let dev = (sol.objective - REFERENCE_N0CL) / REFERENCE_N0CL;
            ok &= dev.abs() <= REFERENCE_BAND;
            parts.push(format!("N0cl vs reference {:+.1}%", 100.0 * dev));
        }
    }
    ensure(ok, parts.join("; "))
}

// 6 -------------------------------------------------------------------------

fn bound_dominance() -> Outcome {
    let plan = EvalPlan::default();
    let seeds = plan.episode_seeds();
    let mut parts = Vec::new();
    let mut violations = 0;
    for name in ["N20", "rN50"] {
        let s = builtin_scenario(name).unwrap();
        let lp = extract_lp_agent(&solve_forecast(&s).map_err(|e| e.to_string())?, &s.chain).map_err(|e| e.to_string())?;
        let cfg = TrainConfig { seed: 1, total_steps: 40_960, eval_every: 40_960, eval_episodes: 2 };
        let ppo = train(&s, PpoHyperparams::default(), &cfg, |_, _| ControlFlow::Continue(())).map_err(|e| e.to_string())?;
        let reports: [EvalReport; 2] = [
            evaluate_agent(AgentSpec::Lp(&lp), "lp", &s, &plan).map_err(|e| e.to_string())?,
            evaluate_agent(AgentSpec::Ppo(&ppo.best), "ppo", &s, &plan).map_err(|e| e.to_string())?,
        ];
        let bounds = perfect_information_bounds(&s, &seeds).map_err(|e| e.to_string())?;
        let mut tightest = f64::INFINITY;
        for rep in &reports {
            for (e, &b) in rep.episodes.iter().zip(&bounds) {
                tightest = tightest.min(e.total_cost / b);
                if b > e.total_cost * (1.0 + BOUND_SLACK_REL) {
                    violations += 1;
                }
            }
        }
        let bm = bounds.iter().sum::<f64>() / bounds.len() as f64;
        parts.push(format!(
            "{name}: bound {:.0}, LP {:.0}, PPO {:.0}, min cost/bound {tightest:.3}",
            bm, reports[0].mean, reports[1].mean
        ));
    }
    parts.push(format!("{violations} violations over {} episodes x 2 agents", 2 * seeds.len()));
    ensure(violations == 0, parts.join("; "))
}

// 7 -------------------------------------------------------------------------

fn gradient_check() -> Outcome {
    let grad = (0..5).map(|s| loss_gradient_error(100 + s, &[4, 4], Activation::Tanh, 8)).fold(0.0, f64::max);
    let mut r = rng(7);
    let gae = (0..20).map(|_| gae_gap(&mut r, 50)).fold(0.0, f64::max);
    ensure(
        grad <= GRADIENT_REL && gae <= GAE_ABS,
        format!("loss gradient max relative error {grad:.1e}; GAE max gap {gae:.1e}"),
    )
}

// 8 -------------------------------------------------------------------------

fn desk_learning() -> Outcome {
    let s = builtin_scenario("rN0cl").unwrap();
    let plan = EvalPlan::default();
    let seed = 1;
    let before = evaluate_agent(AgentSpec::Ppo(&untrained(&s, seed)), "untrained", &s, &plan).map_err(|e| e.to_string())?;
    let cfg = TrainConfig { seed, total_steps: 500_000, eval_every: 18_000, eval_episodes: 10 };
    let t = Instant::now();
    let out = train(&s, PpoHyperparams::default(), &cfg, |_, _| ControlFlow::Continue(())).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let after = evaluate_agent(AgentSpec::Ppo(&out.best), "trained", &s, &plan).map_err(|e| e.to_string())?;
    let bounds = perfect_information_bounds(&s, &plan.episode_seeds()).map_err(|e| e.to_string())?;
    let bound = bounds.iter().sum::<f64>() / bounds.len() as f64;
    let improvement = (before.mean - after.mean) / before.mean;
    let ratio = after.mean / bound;
    ensure(
        improvement >= MIN_IMPROVEMENT && ratio <= MAX_BOUND_RATIO && out.curve.len() == 27,
        format!(
            "untrained {:.0}, trained {:.0} ({:.1}% better), bound {bound:.0}, ratio {ratio:.3}, {} evaluations, {secs:.0}s training",
            before.mean,
            after.mean,
            100.0 * improvement,
            out.curve.len()
        ),
    )
}

// 9 -------------------------------------------------------------------------

fn untrained_band() -> Outcome {
    let s = builtin_scenario("N20").unwrap();
    let rep = evaluate_agent(AgentSpec::Ppo(&untrained(&s, 1)), "untrained", &s, &EvalPlan::default())
        .map_err(|e| e.to_string())?;
    let (lo, hi) = UNTRAINED_BAND;
    ensure((lo..=hi).contains(&rep.mean), format!("mean {:.0} (std {:.0}) over {} episodes", rep.mean, rep.std, rep.episodes.len()))
}

// 10 ------------------------------------------------------------------------

fn statistics() -> Outcome {
    let (lo, hi) = bootstrap_ci(&[8_066_186.7; 100], 10_000, 0.95, 1).map_err(|e| e.to_string())?;
    let g = gain(REFERENCE_LP_MEAN, REFERENCE_PPO_MEAN);
    ensure(
        lo == hi && (lo - 8_066_186.7).abs() <= 1e-9 * 8_066_186.7 && round1(g.pct) == REFERENCE_GAIN_PCT,
        format!("constant-sample interval width {}; gain {:.0} = {:.1}%", hi - lo, g.value, g.pct),
    )
}

fn main() {
    let criteria: [(usize, &str, fn() -> Outcome); 10] = [
        (1, "codec fidelity", codec_fidelity),
        (2, "codec round trip", codec_round_trip),
        (3, "simulator mass balance", mass_balance),
        (4, "LP optimality oracle", lp_oracle),
        (5, "deterministic consistency", deterministic_consistency),
        (7, "PPO gradient check", gradient_check),
        (9, "untrained policy band", untrained_band),
        (10, "statistics", statistics),
        (6, "bound dominance", bound_dominance),
        (8, "desk-scale learning", desk_learning),
    ];
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut failed = 0;
    for (n, name, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&n)) {
            continue;
        }
        let t = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(d) => println!("criterion {n:>2} {name}: PASS [{secs:.1}s] {d}"),
            Err(d) => {
                failed += 1;
                println!("criterion {n:>2} {name}: FAIL [{secs:.1}s] {d}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
