#![allow(dead_code)]

use std::collections::HashMap;

use echelon_core::lp::{DeterministicScenario, LeadTimes};
use echelon_core::ppo::{compute_gae, ppo_loss, Activation, LossCoefs, Minibatch, PolicyNet};
use echelon_core::sim::{CostBreakdown, StepOutcome, SupplyChainState};
use echelon_core::{builtin_scenario, ChainConfig, NodeId, ScenarioSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Exhaustive grid search over the planning model

/// A small planning instance with integral data.
#[derive(Clone, Debug)]
pub struct TinyInstance {
    pub scenario: ScenarioSpec,
    pub det: DeterministicScenario,
    pub lead: usize,
}

/// Random instance with 2 to 4 nodes and at most `max_h` steps. All
/// quantities are whole units so optimal plans lie on the unit grid.
pub fn random_tiny_instance(rng: &mut ChaCha8Rng, max_h: usize) -> TinyInstance {
    let layouts: [&[usize]; 6] = [&[1, 1], &[1, 1, 1], &[1, 1, 1, 1], &[2, 1], &[1, 2], &[2, 2]];
    let layout = layouts[rng.random_range(0..layouts.len())];
    let nodes: usize = layout.iter().sum();
    let h = rng.random_range(2..=max_h);
    let lead = if nodes <= 3 { rng.random_range(1..=2) } else { 1 };
    let small = nodes >= 4;
    let mut c = ChainConfig::layered(layout, h);
    let q = c.num_nodes();
    let cap_hi = if small { 2 } else { 3 };
    let int = |rng: &mut ChaCha8Rng, lo: u32, hi: u32| rng.random_range(lo..=hi) as f64;
    c.stock_cap = (0..q).map(|_| int(rng, 1, cap_hi)).collect();
    c.transport_cap = (0..q).map(|_| int(rng, 1, 2)).collect();
    c.production_cap = (0..q).map(|n| if n < layout[0] { int(rng, 1, 2) } else { 0.0 }).collect();
    // lines of three or four nodes with unit lead may get a factory
    if lead == 1 && layout.len() >= 3 && layout[1] == 1 && rng.random_bool(0.5) {
        let f = layout[0];
        c.is_factory[f] = true;
        c.processing_cap[f] = int(rng, 1, 2);
        c.processing_cost[f] = int(rng, 0, 3);
        c.processing_ratio[f] = int(rng, 1, 2);
    }
    c.stock_cost = (0..q).map(|_| int(rng, 0, 3)).collect();
    c.production_cost = (0..q).map(|_| int(rng, 0, 4)).collect();
    c.transport_cost = int(rng, 0, 3);
    c.excess_penalty = int(rng, 0, 20);
    c.unmet_penalty = int(rng, 0, 60);
    c.initial_stock = c.stock_cap.iter().map(|&b| int(rng, 0, b as u32)).collect();
    c.initial_production = (0..q)
        .map(|n| if n < layout[0] { (0..lead).map(|_| int(rng, 0, 1)).collect() } else { Vec::new() })
        .collect();
    c.initial_transport = (0..c.num_links()).map(|_| (0..lead).map(|_| int(rng, 0, 1)).collect()).collect();
    // Raw-side quantities in multiples of the factory ratio keep the optimum
    // on the unit grid: measured in product units the chain is integral.
    if let Some(f) = (0..q).find(|&n| c.is_factory[n]) {
        let r = c.processing_ratio[f];
        for n in (0..layout[0]).chain([f]) {
            c.stock_cap[n] *= r;
            c.initial_stock[n] *= r;
            c.production_cap[n] *= r;
            c.transport_cap[n] *= r;
        }
        c.processing_cap[f] *= r;
        for l in c.incoming(NodeId(f)) {
            c.initial_transport[l].iter_mut().for_each(|x| *x *= r);
        }
        c.initial_production.iter_mut().for_each(|v| v.iter_mut().for_each(|x| *x *= r));
    }

    let mut scenario = builtin_scenario("rN0cl").unwrap();
    scenario.name = "tiny".into();
    scenario.chain = c;
    scenario.lead_time.average = lead as u32;
    scenario.lead_time.maximum = 2;
    let demands = (0..layout[layout.len() - 1])
        .map(|_| (0..=h).map(|t| if t == 0 { 0.0 } else { int(rng, 0, 2) }).collect())
        .collect();
    let det = DeterministicScenario { demands, lead_times: LeadTimes::Constant(lead as u32) };
    TinyInstance { scenario, det, lead }
}

const BITS: u32 = 5;

fn pack(v: &[i64]) -> u64 {
    v.iter().fold(0u64, |acc, &x| {
        debug_assert!((0..1 << BITS).contains(&x));
        (acc << BITS) | x as u64
    })
}

fn unpack(mut key: u64, n: usize) -> Vec<i64> {
    let mut v = vec![0; n];
    for i in (0..n).rev() {
        v[i] = (key & ((1 << BITS) - 1)) as i64;
        key >>= BITS;
    }
    v
}

/// One inbound stream: a supplier's production or a link.
struct Channel {
    to: usize,
    initial: Vec<i64>,
}

/// Optimal cost of the planning model by exhaustive search over whole-unit
/// decisions. The model charges production, transport (plus processing per
/// raw unit at factories), end-of-step stock, discards and unmet demand;
/// discards and unmet demand are free choices within their bounds.
pub fn grid_optimum(inst: &TinyInstance) -> f64 {
    let c = &inst.scenario.chain;
    let h = c.horizon;
    let lead = inst.lead;
    let q = c.num_nodes();
    let ns = c.num_suppliers();
    let as_int = |x: f64| {
        assert_eq!(x.fract(), 0.0, "grid search needs integral data");
        x as i64
    };
    let mut channels: Vec<Channel> = (0..ns)
        .map(|s| Channel { to: s, initial: c.initial_production[s].iter().map(|&x| as_int(x)).collect() })
        .collect();
    for (l, link) in c.links.iter().enumerate() {
        channels.push(Channel { to: link.to.0, initial: c.initial_transport[l].iter().map(|&x| as_int(x)).collect() });
    }
    let nch = channels.len();
    let ratio: Vec<i64> = (0..q).map(|n| if c.is_factory[n] { as_int(c.processing_ratio[n]) } else { 1 }).collect();
    let retailer_of: Vec<Option<usize>> = (0..q).map(|n| c.retailer_slot(NodeId(n))).collect();
    let out: Vec<Vec<usize>> = (0..q).map(|n| c.outgoing(NodeId(n))).collect();

    // state: stocks, then per channel the quantities arriving 1..=lead steps ahead
    let width = q + nch * lead;
    let mut init = vec![0i64; width];
    for n in 0..q {
        init[n] = as_int(c.initial_stock[n]);
    }
    for (k, ch) in channels.iter().enumerate() {
        assert!(ch.initial.len() <= lead);
        for (j, &x) in ch.initial.iter().enumerate() {
            init[q + k * lead + j] = x;
        }
    }
    let mut layer: HashMap<u64, f64> = HashMap::from([(pack(&init), 0.0)]);

    for t in 1..=h {
        // collapse states with the same landed stocks and remaining pipeline
        let mut landed_layer: HashMap<u64, f64> = HashMap::new();
        for (&key, &cost) in &layer {
            let s = unpack(key, width);
            let mut v = vec![0i64; width];
            v[..q].copy_from_slice(&s[..q]);
            for (k, ch) in channels.iter().enumerate() {
                let base = q + k * lead;
                v[ch.to] += s[base];
                for j in 1..lead {
                    v[base + j - 1] = s[base + j];
                }
            }
            let e = landed_layer.entry(pack(&v)).or_insert(f64::INFINITY);
            *e = e.min(cost);
        }

        let mut next: HashMap<u64, f64> = HashMap::new();
        for (&key, &cost) in &landed_layer {
            let v = unpack(key, width);
            // per-node options: (end stock, outgoing shipments or production, local cost)
            let mut options: Vec<Vec<(i64, Vec<i64>, f64)>> = Vec::with_capacity(q);
            for n in 0..q {
                let landed = v[n];
                let cap = as_int(c.stock_cap[n]);
                let e0 = (landed - cap).max(0);
                let d = retailer_of[n].map_or(0, |r| as_int(inst.det.demands[r][t]));
                let tcap = as_int(c.transport_cap[n]);
                let mut opts = Vec::new();
                for ships in product(out[n].len(), tcap) {
                    let raw: i64 = ratio[n] * ships.iter().sum::<i64>();
                    if c.is_factory[n] && raw > as_int(c.processing_cap[n]) {
                        continue;
                    }
                    let per_unit = c.transport_cost + if c.is_factory[n] { c.processing_cost[n] * c.processing_ratio[n] } else { 0.0 };
                    let ship_cost = per_unit * ships.iter().sum::<i64>() as f64;
                    for end in 0..=cap {
                        // discard minus unmet is fixed by the end stock
                        let k = landed - d - raw - end;
                        let unmet = (e0 - k).max(0);
                        if unmet > d {
                            continue;
                        }
                        let discard = k + unmet;
                        if discard < 0 || landed - discard > cap {
                            continue;
                        }
                        let local = ship_cost
                            + c.stock_cost[n] * end as f64
                            + c.excess_penalty * discard as f64
                            + c.unmet_penalty * unmet as f64;
                        if n < ns {
                            for p in 0..=as_int(c.production_cap[n]) {
                                let mut dispatch = ships.clone();
                                dispatch.push(p);
                                opts.push((end, dispatch, local + c.production_cost[n] * p as f64));
                            }
                        } else {
                            opts.push((end, ships.clone(), local));
                        }
                    }
                }
                options.push(opts);
            }
            // combine nodes one at a time, merging equal partial states
            let mut partial: HashMap<Vec<i64>, f64> = HashMap::from([(Vec::new(), cost)]);
            for opts in &options {
                let mut grown: HashMap<Vec<i64>, f64> = HashMap::new();
                for (p, &pc) in &partial {
                    for (end, dispatch, oc) in opts {
                        let mut np = p.clone();
                        np.push(*end);
                        np.extend_from_slice(dispatch);
                        let e = grown.entry(np).or_insert(f64::INFINITY);
                        *e = e.min(pc + oc);
                    }
                }
                partial = grown;
            }
            for (p, pc) in partial {
                // unfold the per-node record into the next state
                let mut s = vec![0i64; width];
                let mut it = p.into_iter();
                let mut link_q = vec![0i64; c.num_links()];
                let mut prod_q = vec![0i64; ns];
                for n in 0..q {
                    s[n] = it.next().unwrap();
                    for &l in &out[n] {
                        link_q[l] = it.next().unwrap();
                    }
                    if n < ns {
                        prod_q[n] = it.next().unwrap();
                    }
                }
                for k in 0..nch {
                    let base = q + k * lead;
                    for j in 0..lead - 1 {
                        s[base + j] = v[base + j];
                    }
                    // material due after the horizon is paid for but irrelevant
                    let qty = if k < ns { prod_q[k] } else { link_q[k - ns] };
                    s[base + lead - 1] = if t + lead <= h { qty } else { 0 };
                }
                let e = next.entry(pack(&s)).or_insert(f64::INFINITY);
                *e = e.min(pc);
            }
        }
        layer = next;
    }
    layer.values().copied().fold(f64::INFINITY, f64::min)
}

/// All vectors of length `k` with entries in `0..=hi`.
fn product(k: usize, hi: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out.into_iter().flat_map(|v| (0..=hi).map(move |x| [v.clone(), vec![x]].concat())).collect();
    }
    out
}

// ---------------------------------------------------------------------------
// Advantage estimation by direct summation

/// `A_t = sum_k (gamma lambda)^k delta_{t+k}`, stopping after a terminal
/// transition.
pub fn gae_series(rewards: &[f64], values: &[f64], dones: &[bool], last_value: f64, gamma: f64, lambda: f64) -> Vec<f64> {
    let n = rewards.len();
    let value_after = |t: usize| if t + 1 < n { values[t + 1] } else { last_value };
    (0..n)
        .map(|t| {
            let mut sum = 0.0;
            let mut w = 1.0;
            for k in t..n {
                let next = if dones[k] { 0.0 } else { gamma * value_after(k) };
                sum += w * (rewards[k] + next - values[k]);
                if dones[k] {
                    break;
                }
                w *= gamma * lambda;
            }
            sum
        })
        .collect()
}

/// Largest gap between the recursive and summed advantages on a random
/// trajectory.
pub fn gae_gap(rng: &mut ChaCha8Rng, n: usize) -> f64 {
    let rewards: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
    let values: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
    let dones: Vec<bool> = (0..n).map(|_| rng.random_bool(0.1)).collect();
    let last = rng.random_range(-5.0..5.0);
    let gamma = rng.random_range(0.9..1.0);
    let lambda = rng.random_range(0.8..=1.0);
    let (adv, ret) = compute_gae(&rewards, &values, &dones, last, gamma, lambda).unwrap();
    let series = gae_series(&rewards, &values, &dones, last, gamma, lambda);
    let mut gap: f64 = 0.0;
    for t in 0..n {
        gap = gap.max((adv[t] - series[t]).abs());
        gap = gap.max((ret[t] - (series[t] + values[t])).abs());
    }
    gap
}

// ---------------------------------------------------------------------------
// Finite-difference check of the PPO loss

/// Max relative error between analytic and central-difference gradients of
/// the total loss on a random minibatch of `batch` samples.
pub fn loss_gradient_error(seed: u64, hidden: &[usize], activation: Activation, batch: usize) -> f64 {
    let mut r = rng(seed);
    let (obs_dim, act_dim) = (3, 2);
    let net = PolicyNet::new(obs_dim, act_dim, hidden, activation);
    let mut params = net.init(&mut r, -0.3);
    // move away from the orthogonal start so every weight matters
    for p in params.iter_mut() {
        *p += r.random_range(-0.3..0.3);
    }
    let obs: Vec<f64> = (0..batch * obs_dim).map(|_| r.random_range(-1.0..1.0)).collect();
    let actions: Vec<f64> = (0..batch * act_dim).map(|_| r.random_range(-1.5..1.5)).collect();
    let coefs = LossCoefs { clip_range: 0.2, vf_coef: 0.7, ent_coef: 0.01, normalize_advantage: true };
    // old log-probs chosen so ratios land inside and outside the clip band,
    // never within 0.02 of a kink
    let mut g0 = vec![0.0; params.len()];
    let mut old = Vec::with_capacity(batch);
    let (actor, _) = net.forward_batch(&params, &obs, batch);
    let log_std = net.log_std(&params).to_vec();
    for s in 0..batch {
        let a = &actions[s * act_dim..(s + 1) * act_dim];
        let m = &actor.output()[s * act_dim..(s + 1) * act_dim];
        let lp = echelon_core::ppo::policy::gaussian_log_prob(a, m, &log_std);
        let ratio = [0.85, 0.95, 1.05, 1.1, 1.3, 0.6][s % 6] * r.random_range(0.99..1.01);
        old.push(lp - f64::ln(ratio));
    }
    let advantages: Vec<f64> = (0..batch).map(|_| r.random_range(-2.0..2.0)).collect();
    let returns: Vec<f64> = (0..batch).map(|_| r.random_range(-2.0..2.0)).collect();
    let mb = Minibatch { obs: &obs, actions: &actions, old_log_probs: &old, advantages: &advantages, returns: &returns };
    ppo_loss(&net, &params, &mb, &coefs, &mut g0);

    let step = 1e-6;
    let mut worst: f64 = 0.0;
    let mut scratch = vec![0.0; params.len()];
    for i in 0..params.len() {
        let keep = params[i];
        params[i] = keep + step;
        let up = ppo_loss(&net, &params, &mb, &coefs, &mut scratch).loss;
        params[i] = keep - step;
        let down = ppo_loss(&net, &params, &mb, &coefs, &mut scratch).loss;
        params[i] = keep;
        let numeric = (up - down) / (2.0 * step);
        let denom = g0[i].abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((g0[i] - numeric).abs() / denom);
    }
    worst
}

// ---------------------------------------------------------------------------
// Simulator bookkeeping checks

#[derive(Debug, Default, Clone, Copy)]
pub struct BalanceStats {
    pub steps: usize,
    pub max_node_error: f64,
    pub max_pipeline_error: f64,
    pub max_cost_error: f64,
    pub reward_mismatches: usize,
    pub bound_violations: usize,
}

/// Material in production or transport due after step `after`.
pub fn in_flight(state: &SupplyChainState, after: usize) -> f64 {
    let tail = |v: &Vec<f64>| v.iter().skip(after + 1).sum::<f64>();
    state.production_pipeline.iter().map(tail).sum::<f64>() + state.transport_pipeline.iter().map(tail).sum::<f64>()
}

/// Checks one transition. `before_stocks` and `before_flight` describe the
/// state the step started from.
pub fn check_transition(
    c: &ChainConfig,
    before_stocks: &[f64],
    before_flight: f64,
    after: &SupplyChainState,
    out: &StepOutcome,
    acc: &mut BalanceStats,
) {
    acc.steps += 1;
    let t = out.t;
    let mut sum = CostBreakdown::default();
    let mut landed_total = 0.0;
    let mut sent_total = 0.0;
    for (n, f) in out.nodes.iter().enumerate() {
        let scale = 1.0 + f.stock_before.abs() + f.arrived.abs() + f.demand.abs();
        // material in = material out + change in stock
        let err = (f.stock_before + f.arrived - f.discarded - f.demand_met - f.consumed - f.stock_after).abs() / scale;
        acc.max_node_error = acc.max_node_error.max(err);
        acc.max_node_error = acc.max_node_error.max((f.stock_before - before_stocks[n]).abs() / scale);
        acc.max_node_error = acc.max_node_error.max((f.stock_after - after.stocks[n]).abs() / scale);
        acc.max_node_error = acc.max_node_error.max((f.demand - f.demand_met - f.unmet).abs() / scale);
        let kept = f.stock_before + f.arrived - f.discarded;
        let tol = 1e-9 * scale;
        let bad = f.stock_after < 0.0
            || f.stock_after > c.stock_cap[n] + tol
            || kept > c.stock_cap[n] + tol
            || f.discarded < 0.0
            || (f.discarded > 0.0 && (kept - c.stock_cap[n]).abs() > tol)
            || f.demand_met > kept + tol
            || (f.unmet > tol && f.demand_met + tol < kept)
            || f.consumed > c.ship_base(NodeId(n), kept - f.demand_met) + tol
            || f.produced > c.production_cap[n] + tol;
        acc.bound_violations += bad as usize;

        let r = c.processing_ratio[n];
        let expect = CostBreakdown {
            production: c.production_cost[n] * f.produced,
            processing: if c.is_factory[n] { c.processing_cost[n] * f.consumed } else { 0.0 },
            transport: c.transport_cost * f.shipped,
            stock: c.stock_cost[n] * f.stock_after,
            excess_penalty: c.excess_penalty * f.discarded,
            unmet_penalty: c.unmet_penalty * f.unmet,
        };
        let cost_scale = 1.0 + expect.total().abs();
        for (a, b) in expect.to_array().iter().zip(f.cost.to_array()) {
            acc.max_cost_error = acc.max_cost_error.max((a - b).abs() / cost_scale);
        }
        if c.is_factory[n] {
            acc.max_node_error = acc.max_node_error.max((f.consumed - r * f.shipped).abs() / scale);
        } else {
            acc.max_node_error = acc.max_node_error.max((f.consumed - f.shipped).abs() / scale);
        }
        sum += f.cost;
        landed_total += f.arrived;
        sent_total += f.shipped + f.produced;
    }
    let pipe = before_flight - landed_total + sent_total - in_flight(after, t);
    acc.max_pipeline_error = acc.max_pipeline_error.max(pipe.abs() / (1.0 + before_flight));
    let total_scale = 1.0 + sum.total().abs();
    for (a, b) in sum.to_array().iter().zip(out.cost.to_array()) {
        acc.max_cost_error = acc.max_cost_error.max((a - b).abs() / total_scale);
    }
    if out.reward != -out.cost.total() {
        acc.reward_mismatches += 1;
    }
}
