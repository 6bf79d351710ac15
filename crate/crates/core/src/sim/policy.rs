//! Learning policies that play a DMDP.
//!
//! The cycle-arm policies treat every simple cycle as a bandit arm. A
//! decision is taken at the start and each time a cycle traversal
//! completes; the chosen cycle is reached along a shortest path and then
//! traversed exactly once. Only rewards collected during complete
//! traversals update an arm's statistics.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cycles::{are_disjoint, enumerate_simple_cycles, optimal_cycle, SimpleCycle};
use crate::dmdp::{Dmdp, EdgeId, StateId};
use crate::error::{Error, Result};
use crate::reward::RewardModel;

/// What a policy sees before each decision.
#[derive(Debug, Clone, Copy)]
pub struct Observation<'a> {
    /// Steps already taken.
    pub step: u64,
    pub state: StateId,
    /// Per-edge visit counts so far.
    pub counts: &'a [u64],
    /// Per-edge sums of sampled rewards so far.
    pub reward_sums: &'a [f64],
}

/// History-dependent policy. The returned edge must leave `obs.state`.
pub trait LearnerPolicy: Send {
    fn name(&self) -> &'static str;

    /// Oracles and other non-learning baselines return false.
    fn is_learner(&self) -> bool {
        true
    }

    /// Called once before a run.
    fn reset(&mut self, _seed: u64) {}

    fn choose(&mut self, obs: &Observation<'_>) -> EdgeId;

    fn observe(&mut self, _edge: EdgeId, _reward: f64) {}
}

/// Next-hop table towards each cycle: `toward[c][s]` is the first edge of a
/// shortest path from `s` to some state of cycle `c`, `None` when `s` is on
/// the cycle or cannot reach it.
#[derive(Debug, Clone)]
struct Navigator {
    toward: Vec<Vec<Option<EdgeId>>>,
    on_cycle: Vec<Vec<Option<usize>>>,
}

impl Navigator {
    fn new(dmdp: &Dmdp, cycles: &[SimpleCycle]) -> Navigator {
        let n = dmdp.num_states();
        let mut preds: Vec<Vec<EdgeId>> = vec![Vec::new(); n];
        for e in dmdp.edge_ids() {
            preds[dmdp.next_state(e).0].push(e);
        }
        let mut toward = Vec::with_capacity(cycles.len());
        let mut on_cycle = Vec::with_capacity(cycles.len());
        for c in cycles {
            let mut position = vec![None; n];
            let mut hop = vec![None; n];
            let mut seen = vec![false; n];
            let mut queue = VecDeque::new();
            for (i, s) in c.states(dmdp).enumerate() {
                position[s.0] = Some(i);
                seen[s.0] = true;
                queue.push_back(s);
            }
            while let Some(t) = queue.pop_front() {
                for &e in &preds[t.0] {
                    let s = dmdp.edge(e).state;
                    if !seen[s.0] {
                        seen[s.0] = true;
                        hop[s.0] = Some(e);
                        queue.push_back(s);
                    }
                }
            }
            toward.push(hop);
            on_cycle.push(position);
        }
        Navigator { toward, on_cycle }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    Decide,
    Navigate {
        arm: usize,
    },
    Traverse {
        arm: usize,
        entry: usize,
        done: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Rule {
    KlUcb,
    Greedy,
    Fixed(usize),
}

#[derive(Debug, Clone)]
struct Arm {
    traversals: u64,
    edge_sums: Vec<f64>,
    pending: Vec<f64>,
}

/// Policy over cycle arms. Built by [`klucb_cycle_policy`],
/// [`greedy_policy`] and [`oracle_policy`].
#[derive(Debug, Clone)]
pub struct CycleArmPolicy {
    name: &'static str,
    rule: Rule,
    cycles: Vec<SimpleCycle>,
    models: Vec<Vec<RewardModel>>,
    nav: Navigator,
    arms: Vec<Arm>,
    mode: Mode,
    epochs: u64,
    navigating_epochs: u64,
}

impl CycleArmPolicy {
    fn new(dmdp: &Dmdp, cycles: Vec<SimpleCycle>, rule: Rule, name: &'static str) -> Result<Self> {
        if cycles.is_empty() {
            return Err(Error::NoCycles);
        }
        if let Some((from, to)) = dmdp.unreachable_pair() {
            return Err(Error::NotCommunicating {
                from: dmdp.state_name(from).to_string(),
                to: dmdp.state_name(to).to_string(),
            });
        }
        let nav = Navigator::new(dmdp, &cycles);
        let models = cycles
            .iter()
            .map(|c| c.edges().iter().map(|&e| dmdp.edge(e).reward).collect())
            .collect();
        let arms = cycles
            .iter()
            .map(|c| Arm {
                traversals: 0,
                edge_sums: vec![0.0; c.len()],
                pending: Vec::with_capacity(c.len()),
            })
            .collect();
        Ok(CycleArmPolicy {
            name,
            rule,
            cycles,
            models,
            nav,
            arms,
            mode: Mode::Decide,
            epochs: 0,
            navigating_epochs: 0,
        })
    }

    pub fn cycles(&self) -> &[SimpleCycle] {
        &self.cycles
    }

    /// Completed traversals per cycle.
    pub fn traversals(&self) -> Vec<u64> {
        self.arms.iter().map(|a| a.traversals).collect()
    }

    /// Decision epochs so far.
    pub fn epochs(&self) -> u64 {
        self.epochs
    }

    /// Decision epochs whose chosen cycle had to be reached by navigation.
    pub fn navigating_epochs(&self) -> u64 {
        self.navigating_epochs
    }

    fn empirical_means(&self, arm: usize) -> Vec<f64> {
        let a = &self.arms[arm];
        a.edge_sums
            .iter()
            .map(|s| s / a.traversals as f64)
            .collect()
    }

    fn empirical_gain(&self, arm: usize) -> f64 {
        let means = self.empirical_means(arm);
        means.iter().sum::<f64>() / means.len() as f64
    }

    fn select(&self, time: u64) -> usize {
        if let Rule::Fixed(arm) = self.rule {
            return arm;
        }
        if let Some(untried) = self.arms.iter().position(|a| a.traversals == 0) {
            return untried;
        }
        let score = |arm: usize| match self.rule {
            Rule::Greedy => self.empirical_gain(arm),
            _ => {
                let budget = (time as f64).ln().max(0.0) / self.arms[arm].traversals as f64;
                kl_ucb_index(&self.models[arm], &self.empirical_means(arm), budget)
            }
        };
        let mut best = 0;
        let mut best_score = score(0);
        for arm in 1..self.arms.len() {
            let s = score(arm);
            if s > best_score {
                best = arm;
                best_score = s;
            }
        }
        best
    }
}

impl LearnerPolicy for CycleArmPolicy {
    fn name(&self) -> &'static str {
        self.name
    }

    fn is_learner(&self) -> bool {
        !matches!(self.rule, Rule::Fixed(_))
    }

    fn reset(&mut self, _seed: u64) {
        for a in &mut self.arms {
            a.traversals = 0;
            a.edge_sums.iter_mut().for_each(|s| *s = 0.0);
            a.pending.clear();
        }
        self.mode = Mode::Decide;
        self.epochs = 0;
        self.navigating_epochs = 0;
    }

    fn choose(&mut self, obs: &Observation<'_>) -> EdgeId {
        loop {
            match self.mode {
                Mode::Decide => {
                    let arm = self.select(obs.step + 1);
                    self.epochs += 1;
                    self.mode = Mode::Navigate { arm };
                    if self.nav.on_cycle[arm][obs.state.0].is_none() {
                        self.navigating_epochs += 1;
                    }
                }
                Mode::Navigate { arm } => match self.nav.on_cycle[arm][obs.state.0] {
                    Some(entry) => {
                        self.mode = Mode::Traverse {
                            arm,
                            entry,
                            done: 0,
                        };
                    }
                    None => {
                        return self.nav.toward[arm][obs.state.0]
                            .expect("communicating DMDP reaches every cycle");
                    }
                },
                Mode::Traverse { arm, entry, done } => {
                    let c = &self.cycles[arm];
                    return c.edges()[(entry + done) % c.len()];
                }
            }
        }
    }

    fn observe(&mut self, _edge: EdgeId, reward: f64) {
        if let Mode::Traverse { arm, entry, done } = self.mode {
            let len = self.cycles[arm].len();
            let a = &mut self.arms[arm];
            a.pending.push(reward);
            if done + 1 == len {
                for (i, r) in a.pending.drain(..).enumerate() {
                    a.edge_sums[(entry + i) % len] += r;
                }
                a.traversals += 1;
                self.mode = Mode::Decide;
            } else {
                self.mode = Mode::Traverse {
                    arm,
                    entry,
                    done: done + 1,
                };
            }
        }
    }
}

/// Clamp for Bernoulli empirical means, which may sit on `{0, 1}`.
const BERNOULLI_CLAMP: f64 = 1e-9;

/// Largest cycle gain `mean(q)` with `sum_e KL(p_e, q_e) <= budget`.
///
/// The maximizer has a common KL slope across edges (same stationarity
/// structure as the confusing-reward projection), so a bisection on that
/// slope suffices. Gaussian cycles have the closed form
/// `mean(p) + sqrt(2 sigma^2 budget / |C|)`.
pub fn kl_ucb_index(models: &[RewardModel], empirical: &[f64], budget: f64) -> f64 {
    let len = models.len() as f64;
    let gain = empirical.iter().sum::<f64>() / len;
    if budget <= 0.0 {
        return gain;
    }
    if let Some(variance) = models[0].variance() {
        return gain + (2.0 * variance * budget / len).sqrt();
    }
    let fitted: Vec<RewardModel> = empirical
        .iter()
        .map(|&p| RewardModel::bernoulli(p.clamp(BERNOULLI_CLAMP, 1.0 - BERNOULLI_CLAMP)))
        .collect();
    // spent(slope) and its derivative slope * sum 1/KL''(q_e)
    let spent = |slope: f64| -> (f64, f64) {
        fitted.iter().fold((0.0, 0.0), |(v, dv), m| {
            let p = m.mean();
            let q = m.mean_for_slope(slope);
            let curvature = p / (q * q) + (1.0 - p) / ((1.0 - q) * (1.0 - q));
            (
                v + crate::reward::bernoulli_kl(p, q),
                dv + slope / curvature,
            )
        })
    };
    // Safeguarded Newton, started from the quadratic approximation
    // spent(slope) ~ slope^2 sum p(1 - p) / 2.
    let spread: f64 = fitted.iter().map(|m| m.mean() * (1.0 - m.mean())).sum();
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    let mut slope = (2.0 * budget / spread).sqrt();
    for _ in 0..100 {
        let (v, dv) = spent(slope);
        let gap = v - budget;
        if gap.abs() <= 1e-12 * budget {
            lo = slope;
            break;
        }
        if gap < 0.0 {
            lo = slope;
        } else {
            hi = slope;
        }
        let newton = slope - gap / dv;
        slope = if dv > 0.0 && newton > lo && newton < hi {
            newton
        } else if hi.is_finite() {
            0.5 * (lo + hi)
        } else {
            2.0 * slope.max(1.0)
        };
        if hi.is_finite() && hi - lo <= 1e-15 * hi {
            break;
        }
    }
    fitted.iter().map(|m| m.mean_for_slope(lo)).sum::<f64>() / len
}

/// KL-UCB over cycle arms. Requires pairwise edge-disjoint cycles.
pub fn klucb_cycle_policy(dmdp: &Dmdp) -> Result<CycleArmPolicy> {
    let cycles = enumerate_simple_cycles(dmdp)?;
    if !are_disjoint(&cycles) {
        let e = crate::cycles::shared_edge(&cycles).expect("shared edge");
        let info = dmdp.edge(e);
        return Err(Error::NonDisjoint {
            state: dmdp.state_name(info.state).to_string(),
            action: info.action.clone(),
        });
    }
    CycleArmPolicy::new(dmdp, cycles, Rule::KlUcb, "klucb")
}

/// Traverses each cycle once, then always exploits the best empirical gain.
pub fn greedy_policy(dmdp: &Dmdp) -> Result<CycleArmPolicy> {
    let cycles = enumerate_simple_cycles(dmdp)?;
    CycleArmPolicy::new(dmdp, cycles, Rule::Greedy, "greedy")
}

/// Knows the model: heads for the optimal cycle and stays on it.
pub fn oracle_policy(dmdp: &Dmdp) -> Result<CycleArmPolicy> {
    let cycles = enumerate_simple_cycles(dmdp)?;
    let (best, _) = optimal_cycle(&cycles)?;
    let arm = cycles
        .iter()
        .position(|c| *c == best)
        .expect("optimal cycle is enumerated");
    CycleArmPolicy::new(dmdp, cycles, Rule::Fixed(arm), "oracle")
}

/// Picks a uniformly random available action at every step.
#[derive(Debug, Clone)]
pub struct UniformRandomPolicy {
    out: Vec<Vec<EdgeId>>,
    rng: ChaCha8Rng,
}

/// Stream id separating the policy's draws from the reward streams.
const POLICY_STREAM: u64 = u64::MAX;

impl UniformRandomPolicy {
    pub fn new(dmdp: &Dmdp) -> Self {
        UniformRandomPolicy {
            out: dmdp.states().map(|s| dmdp.out_edges(s).collect()).collect(),
            rng: ChaCha8Rng::seed_from_u64(0),
        }
    }
}

impl LearnerPolicy for UniformRandomPolicy {
    fn name(&self) -> &'static str {
        "uniform"
    }

    fn is_learner(&self) -> bool {
        false
    }

    fn reset(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.rng.set_stream(POLICY_STREAM);
    }

    fn choose(&mut self, obs: &Observation<'_>) -> EdgeId {
        let options = &self.out[obs.state.0];
        options[self.rng.random_range(0..options.len())]
    }
}

/// Policies selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    KlUcb,
    Greedy,
    Oracle,
    Uniform,
}

impl PolicyKind {
    pub fn build(self, dmdp: &Dmdp) -> Result<Box<dyn LearnerPolicy>> {
        Ok(match self {
            PolicyKind::KlUcb => Box::new(klucb_cycle_policy(dmdp)?),
            PolicyKind::Greedy => Box::new(greedy_policy(dmdp)?),
            PolicyKind::Oracle => Box::new(oracle_policy(dmdp)?),
            PolicyKind::Uniform => Box::new(UniformRandomPolicy::new(dmdp)),
        })
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "klucb" => Ok(PolicyKind::KlUcb),
            "greedy" => Ok(PolicyKind::Greedy),
            "oracle" => Ok(PolicyKind::Oracle),
            "uniform" => Ok(PolicyKind::Uniform),
            other => Err(Error::Parameter(format!("unknown policy `{other}`"))),
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyKind::KlUcb => "klucb",
            PolicyKind::Greedy => "greedy",
            PolicyKind::Oracle => "oracle",
            PolicyKind::Uniform => "uniform",
        })
    }
}
