//! Seeded regret simulation.
//!
//! A run plays a [`LearnerPolicy`] for a fixed horizon and records per-edge
//! visit counts. The headline metric is the count-based expected regret
//! `sum_e N_T(e) (g* - r(e))`, which removes reward noise; the sampled
//! cumulative reward is kept for diagnostics.

mod env;
mod policy;

use rayon::prelude::*;

pub use env::{Environment, RewardSampler};
pub use policy::{
    greedy_policy, kl_ucb_index, klucb_cycle_policy, oracle_policy, CycleArmPolicy, LearnerPolicy,
    Observation, PolicyKind, UniformRandomPolicy,
};

use crate::bound::solve_disjoint;
use crate::cycles::{enumerate_simple_cycles, optimal_cycle};
use crate::dmdp::{Dmdp, EdgeId, StateId};
use crate::error::{Error, Result};

/// Ratios below this at the largest horizon are flagged for learners.
pub const SUSPICIOUS_RATIO: f64 = 0.8;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub horizon: u64,
    pub seed: u64,
    pub initial_state: StateId,
    pub optimal_gain: f64,
    /// `N_T(e)` indexed by edge.
    pub counts: Vec<u64>,
    pub cumulative_reward: f64,
    pub expected_regret: f64,
    /// `(t, expected regret after t steps)` for each requested checkpoint.
    pub checkpoints: Vec<(u64, f64)>,
}

impl SimulationTrace {
    /// Recomputes the expected regret from the stored counts.
    pub fn regret_from_counts(&self, dmdp: &Dmdp) -> f64 {
        count_regret(dmdp, &self.counts, self.optimal_gain)
    }
}

fn count_regret(dmdp: &Dmdp, counts: &[u64], g_star: f64) -> f64 {
    dmdp.edge_ids()
        .zip(counts)
        .map(|(e, &n)| n as f64 * (g_star - dmdp.mean(e)))
        .sum()
}

/// Maximal gain over simple cycles.
pub fn optimal_gain(dmdp: &Dmdp) -> Result<f64> {
    Ok(optimal_cycle(&enumerate_simple_cycles(dmdp)?)?.1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub horizon: u64,
    pub seed: u64,
    /// Sorted, each `<= horizon`.
    pub checkpoints: Vec<u64>,
    /// Defaults to the lexicographically smallest state.
    pub initial_state: Option<StateId>,
}

impl RunConfig {
    pub fn new(horizon: u64, seed: u64) -> Self {
        RunConfig {
            horizon,
            seed,
            checkpoints: Vec::new(),
            initial_state: None,
        }
    }

    pub fn with_checkpoints(mut self, checkpoints: Vec<u64>) -> Self {
        self.checkpoints = checkpoints;
        self
    }

    pub fn with_initial_state(mut self, s: StateId) -> Self {
        self.initial_state = Some(s);
        self
    }
}

/// Plays `policy` for `config.horizon` steps.
pub fn run(
    dmdp: &Dmdp,
    policy: &mut dyn LearnerPolicy,
    config: &RunConfig,
) -> Result<SimulationTrace> {
    let g_star = optimal_gain(dmdp)?;
    run_with_gain(dmdp, policy, config, g_star)
}

fn run_with_gain(
    dmdp: &Dmdp,
    policy: &mut dyn LearnerPolicy,
    config: &RunConfig,
    g_star: f64,
) -> Result<SimulationTrace> {
    if config.horizon == 0 {
        return Err(Error::Parameter("horizon must be at least 1".into()));
    }
    if config.checkpoints.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Parameter("checkpoints must be sorted".into()));
    }
    if config
        .checkpoints
        .last()
        .is_some_and(|&c| c > config.horizon)
    {
        return Err(Error::Parameter("checkpoint beyond horizon".into()));
    }
    let start = config.initial_state.unwrap_or(StateId(0));
    if start.0 >= dmdp.num_states() {
        return Err(Error::UnknownState(format!("#{}", start.0)));
    }

    policy.reset(config.seed);
    let mut env = Environment::new(dmdp, start, config.seed);
    let mut counts = vec![0u64; dmdp.num_edges()];
    let mut sums = vec![0.0f64; dmdp.num_edges()];
    let mut cumulative_reward = 0.0;
    let mut checkpoints = Vec::with_capacity(config.checkpoints.len());
    let mut pending = config.checkpoints.iter().copied().peekable();

    while let Some(&0) = pending.peek() {
        checkpoints.push((0, 0.0));
        pending.next();
    }
    for t in 0..config.horizon {
        let obs = Observation {
            step: t,
            state: env.current_state(),
            counts: &counts,
            reward_sums: &sums,
        };
        let edge: EdgeId = policy.choose(&obs);
        let (reward, _) = env.step(edge)?;
        policy.observe(edge, reward);
        counts[edge.0] += 1;
        sums[edge.0] += reward;
        cumulative_reward += reward;
        while pending.peek() == Some(&(t + 1)) {
            checkpoints.push((t + 1, count_regret(dmdp, &counts, g_star)));
            pending.next();
        }
    }
    let expected_regret = count_regret(dmdp, &counts, g_star);
    Ok(SimulationTrace {
        horizon: config.horizon,
        seed: config.seed,
        initial_state: start,
        optimal_gain: g_star,
        counts,
        cumulative_reward,
        expected_regret,
        checkpoints,
    })
}

/// Expected regret of one seed at one horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub horizon: u64,
    pub seed: u64,
    pub expected_regret: f64,
    pub ratio: Option<f64>,
}

/// Cross-seed aggregate at one horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub horizon: u64,
    pub mean_regret: f64,
    pub std_regret: f64,
    pub mean_ratio: Option<f64>,
    pub std_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTable {
    pub policy: PolicyKind,
    pub learner: bool,
    /// `C(phi)` when available.
    pub constant: Option<f64>,
    pub rows: Vec<RunRow>,
    pub aggregates: Vec<AggregateRow>,
}

impl SimulationTable {
    /// Learner whose mean ratio at the largest horizon sits below
    /// [`SUSPICIOUS_RATIO`], i.e. apparently beating the lower bound.
    pub fn suspicious(&self) -> bool {
        self.learner
            && self
                .aggregates
                .last()
                .and_then(|a| a.mean_ratio)
                .is_some_and(|r| r < SUSPICIOUS_RATIO)
    }

    pub fn aggregate(&self, horizon: u64) -> Option<&AggregateRow> {
        self.aggregates.iter().find(|a| a.horizon == horizon)
    }
}

fn ratio(regret: f64, constant: Option<f64>, horizon: u64) -> Option<f64> {
    let c = constant?;
    let denom = c * (horizon as f64).ln();
    (c > 0.0 && horizon > 1).then(|| regret / denom)
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One run per seed up to the largest horizon, sampled at every horizon.
/// Seeds run in parallel; rows come back ordered by horizon, then by the
/// order of `seeds`.
pub fn simulate_table(
    dmdp: &Dmdp,
    kind: PolicyKind,
    horizons: &[u64],
    seeds: &[u64],
    initial_state: Option<StateId>,
    constant: Option<f64>,
) -> Result<SimulationTable> {
    if horizons.is_empty() || seeds.is_empty() {
        return Err(Error::Parameter(
            "need at least one horizon and one seed".into(),
        ));
    }
    let mut checkpoints = horizons.to_vec();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    let horizon = *checkpoints.last().expect("nonempty");
    let g_star = optimal_gain(dmdp)?;
    let learner = kind.build(dmdp)?.is_learner();

    let traces: Vec<SimulationTrace> = seeds
        .par_iter()
        .map(|&seed| {
            let mut policy = kind.build(dmdp)?;
            let mut config = RunConfig::new(horizon, seed).with_checkpoints(checkpoints.clone());
            config.initial_state = initial_state;
            run_with_gain(dmdp, policy.as_mut(), &config, g_star)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut aggregates = Vec::new();
    for (i, &t) in checkpoints.iter().enumerate() {
        let regrets: Vec<f64> = traces.iter().map(|tr| tr.checkpoints[i].1).collect();
        for (tr, &r) in traces.iter().zip(&regrets) {
            rows.push(RunRow {
                horizon: t,
                seed: tr.seed,
                expected_regret: r,
                ratio: ratio(r, constant, t),
            });
        }
        let (mean_regret, std_regret) = mean_std(&regrets);
        let ratios: Option<Vec<f64>> = regrets.iter().map(|&r| ratio(r, constant, t)).collect();
        let (mean_ratio, std_ratio) = match ratios {
            Some(rs) => {
                let (m, s) = mean_std(&rs);
                (Some(m), Some(s))
            }
            None => (None, None),
        };
        aggregates.push(AggregateRow {
            horizon: t,
            mean_regret,
            std_regret,
            mean_ratio,
            std_ratio,
        });
    }
    Ok(SimulationTable {
        policy: kind,
        learner,
        constant,
        rows,
        aggregates,
    })
}

/// Regret-to-bound ratio `regret / (C(phi) log T)` across seeds and horizons.
/// Fails when the lower bound cannot be computed or is zero.
pub fn regret_ratio_report(
    dmdp: &Dmdp,
    kind: PolicyKind,
    horizons: &[u64],
    seeds: &[u64],
    initial_state: Option<StateId>,
) -> Result<SimulationTable> {
    let constant = solve_disjoint(dmdp)?.constant;
    if constant <= 0.0 {
        return Err(Error::ZeroConstant);
    }
    if horizons.iter().any(|&t| t < 2) {
        return Err(Error::Parameter(
            "ratio needs horizons of at least 2".into(),
        ));
    }
    simulate_table(dmdp, kind, horizons, seeds, initial_state, Some(constant))
}
