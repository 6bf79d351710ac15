//! Asymptotic regret lower bound for DMDPs whose simple cycles are pairwise
//! edge-disjoint.
//!
//! The bound is the value of two nested programs. The inner one finds, for a
//! suboptimal cycle `C`, the reward vector closest in KL to the true one that
//! lifts `C`'s gain to the optimal gain `g*`:
//!
//! ```text
//! min_q  sum_{e in C} KL(r(e), q_e)   s.t.  sum_{e in C} q_e = |C| g*
//! ```
//!
//! Its value is the information number `I(C)`. Because the navigation
//! constraints force every edge of a cycle to be sampled at a common rate,
//! the outer program separates per cycle and is solved by `eta(C) = 1/I(C)`,
//! giving
//!
//! ```text
//! C(phi) = sum_{C != C*} |C| (g* - g(C)) / I(C).
//! ```
//!
//! The inner program is solved from its stationarity conditions: all edges
//! share one KL slope `lambda`, and the constraint residual is monotone in
//! `lambda`. For Gaussian rewards this reduces to a uniform shift of every
//! mean by `g* - g(C)`.

use crate::cycles::{are_disjoint, enumerate_simple_cycles, shared_edge, SimpleCycle};
use crate::dmdp::{is_communicating, Dmdp, EdgeId, RewardSharing};
use crate::error::{Error, Result};
use crate::reward::{Family, FamilySpec, RewardModel};

/// Gains closer than this are treated as tied.
pub const GAIN_TIE_TOLERANCE: f64 = 1e-12;

/// Constraint residual the Lagrangian solver must reach.
pub const CONSTRAINT_TOLERANCE: f64 = 1e-10;

/// Most confusing reward means for one cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusingRewards {
    pub cycle: SimpleCycle,
    /// One mean per cycle edge, in cycle order.
    pub means: Vec<f64>,
    /// Attained value of the inner objective.
    pub kl_cost: f64,
}

/// Bound data for one suboptimal cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleBound {
    pub cycle: SimpleCycle,
    pub information_number: f64,
    pub rate: f64,
    pub confusing: ConfusingRewards,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundSolution {
    /// Suboptimal cycles carrying an information constraint, canonical order.
    pub per_cycle: Vec<CycleBound>,
    /// Suboptimal cycles that no confusing model can make optimal (only
    /// under per-state reward sharing); their rate is zero.
    pub unconstrained: Vec<SimpleCycle>,
    pub constant: f64,
    pub optimal_cycle: SimpleCycle,
    pub optimal_gain: f64,
}

fn cycle_models(dmdp: &Dmdp, cycle: &SimpleCycle) -> Result<Vec<RewardModel>> {
    let models: Vec<RewardModel> = cycle.edges().iter().map(|&e| dmdp.edge(e).reward).collect();
    let first = models[0].family();
    if let Some(m) = models.iter().find(|m| m.family() != first) {
        return Err(Error::MixedFamilies(first, m.family()));
    }
    Ok(models)
}

fn finish(
    models: &[RewardModel],
    cycle: &SimpleCycle,
    means: Vec<f64>,
) -> Result<ConfusingRewards> {
    let kl_cost = models
        .iter()
        .zip(&means)
        .map(|(m, &q)| m.kl(q))
        .sum::<Result<f64, _>>()?;
    Ok(ConfusingRewards {
        cycle: cycle.clone(),
        means,
        kl_cost,
    })
}

fn check_feasible(models: &[RewardModel], target_gain: f64) -> Result<()> {
    let ok = match models[0].family() {
        Family::Bernoulli => target_gain > 0.0 && target_gain < 1.0,
        Family::GaussianFixedVariance => target_gain.is_finite(),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Infeasible {
            target: target_gain,
        })
    }
}

/// KL projection of the cycle's means onto `sum q = |C| * target_gain`.
///
/// Gaussian cycles use the exact uniform shift; Bernoulli cycles go through
/// [`inner_confusing_lagrangian`].
pub fn inner_confusing(
    dmdp: &Dmdp,
    cycle: &SimpleCycle,
    target_gain: f64,
) -> Result<ConfusingRewards> {
    let models = cycle_models(dmdp, cycle)?;
    check_feasible(&models, target_gain)?;
    match models[0].family() {
        Family::GaussianFixedVariance => {
            let shift = target_gain - cycle.gain();
            let means = models.iter().map(|m| m.mean() + shift).collect();
            finish(&models, cycle, means)
        }
        Family::Bernoulli => inner_confusing_lagrangian(dmdp, cycle, target_gain),
    }
}

/// Generic solver: bisection on the common KL slope `lambda` until the sum
/// constraint holds. Runs for either family.
pub fn inner_confusing_lagrangian(
    dmdp: &Dmdp,
    cycle: &SimpleCycle,
    target_gain: f64,
) -> Result<ConfusingRewards> {
    let models = cycle_models(dmdp, cycle)?;
    check_feasible(&models, target_gain)?;
    let target_sum = cycle.len() as f64 * target_gain;
    let slope = solve_common_slope(&models, target_sum)?;
    let means = models.iter().map(|m| m.mean_for_slope(slope)).collect();
    finish(&models, cycle, means)
}

fn slope_residual(models: &[RewardModel], slope: f64, target_sum: f64) -> f64 {
    models.iter().map(|m| m.mean_for_slope(slope)).sum::<f64>() - target_sum
}

/// Root of the increasing map `lambda -> sum_e q_e(lambda) - target_sum`.
/// The bracket starts at `[0, 1]` (or `[-1, 0]`) and doubles outward; the
/// bisection then runs to the resolution of `f64`.
fn solve_common_slope(models: &[RewardModel], target_sum: f64) -> Result<f64> {
    let f0 = slope_residual(models, 0.0, target_sum);
    if f0 == 0.0 {
        return Ok(0.0);
    }
    let dir = if f0 < 0.0 { 1.0 } else { -1.0 };
    let (mut near, mut far) = (0.0f64, dir);
    let mut expansions = 0;
    while slope_residual(models, far, target_sum) * dir < 0.0 {
        near = far;
        far *= 2.0;
        expansions += 1;
        if expansions > 1100 || !far.is_finite() {
            return Err(Error::Infeasible {
                target: target_sum / models.len() as f64,
            });
        }
    }
    let (mut lo, mut hi) = if dir > 0.0 { (near, far) } else { (far, near) };
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let r = slope_residual(models, mid, target_sum);
        if r == 0.0 {
            return Ok(mid);
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (rl, rh) = (
        slope_residual(models, lo, target_sum).abs(),
        slope_residual(models, hi, target_sum).abs(),
    );
    let best = if rl <= rh { lo } else { hi };
    let residual = rl.min(rh);
    if residual > CONSTRAINT_TOLERANCE.max(4.0 * f64::EPSILON * target_sum.abs()) {
        return Err(Error::Infeasible {
            target: target_sum / models.len() as f64,
        });
    }
    Ok(best)
}

/// `I(C)`: the inner program's optimal KL cost at `target_gain`.
pub fn information_number(dmdp: &Dmdp, cycle: &SimpleCycle, target_gain: f64) -> Result<f64> {
    Ok(inner_confusing(dmdp, cycle, target_gain)?.kl_cost)
}

/// Under per-state sharing a cycle through several states has a gain equal
/// to the average of the self-loop gains of the states it enters, for every
/// admissible reward vector, so it is never strictly optimal.
fn is_dominated(dmdp: &Dmdp, cycle: &SimpleCycle) -> bool {
    dmdp.reward_sharing() == RewardSharing::PerState && cycle.len() > 1
}

/// Full disjoint-cycle lower bound.
pub fn solve_disjoint(dmdp: &Dmdp) -> Result<LowerBoundSolution> {
    if let Some((from, to)) = dmdp.unreachable_pair() {
        return Err(Error::NotCommunicating {
            from: dmdp.state_name(from).to_string(),
            to: dmdp.state_name(to).to_string(),
        });
    }
    debug_assert!(is_communicating(dmdp));
    let cycles = enumerate_simple_cycles(dmdp)?;
    solve_disjoint_cycles(dmdp, &cycles)
}

/// [`solve_disjoint`] on a precomputed cycle set.
pub fn solve_disjoint_cycles(dmdp: &Dmdp, cycles: &[SimpleCycle]) -> Result<LowerBoundSolution> {
    if cycles.is_empty() {
        return Err(Error::NoCycles);
    }
    if !are_disjoint(cycles) {
        let e = shared_edge(cycles).expect("non-disjoint cycles share an edge");
        let info = dmdp.edge(e);
        return Err(Error::NonDisjoint {
            state: dmdp.state_name(info.state).to_string(),
            action: info.action.clone(),
        });
    }
    let (optimal, g_star) = crate::cycles::optimal_cycle(cycles)?;
    let tied = cycles
        .iter()
        .filter(|c| (c.gain() - g_star).abs() <= GAIN_TIE_TOLERANCE)
        .count();
    if tied > 1 {
        return Err(Error::DegenerateOptimum {
            gain: g_star,
            count: tied,
        });
    }

    let mut sorted: Vec<&SimpleCycle> = cycles.iter().collect();
    sorted.sort();
    let mut per_cycle = Vec::new();
    let mut unconstrained = Vec::new();
    for cycle in sorted {
        if *cycle == optimal {
            continue;
        }
        if is_dominated(dmdp, cycle) {
            unconstrained.push(cycle.clone());
            continue;
        }
        let confusing = inner_confusing(dmdp, cycle, g_star)?;
        let information_number = confusing.kl_cost;
        let rate = 1.0 / information_number;
        let contribution = rate * cycle.len() as f64 * (g_star - cycle.gain());
        per_cycle.push(CycleBound {
            cycle: cycle.clone(),
            information_number,
            rate,
            confusing,
            contribution,
        });
    }
    let constant = per_cycle.iter().map(|c| c.contribution).sum();
    Ok(LowerBoundSolution {
        per_cycle,
        unconstrained,
        constant,
        optimal_cycle: optimal,
        optimal_gain: g_star,
    })
}

impl LowerBoundSolution {
    /// Asymptotic exploration rate of an edge: `eta(C)` for edges of a
    /// constrained suboptimal cycle, zero elsewhere.
    pub fn edge_rate(&self, e: EdgeId) -> f64 {
        self.per_cycle
            .iter()
            .find(|c| c.cycle.contains(e))
            .map_or(0.0, |c| c.rate)
    }
}

fn unique_max(values: &[f64]) -> Result<(usize, f64)> {
    let (best, &max) = values
        .iter()
        .enumerate()
        .fold(None, |acc: Option<(usize, &f64)>, (i, v)| match acc {
            Some((_, m)) if *m >= *v => acc,
            _ => Some((i, v)),
        })
        .ok_or_else(|| Error::Parameter("empty mean list".into()))?;
    let count = values
        .iter()
        .filter(|&&v| (v - max).abs() <= GAIN_TIE_TOLERANCE)
        .count();
    if count > 1 {
        return Err(Error::DegenerateOptimum { gain: max, count });
    }
    Ok((best, max))
}

fn check_model(model: &RewardModel) -> Result<()> {
    if model.admits_mean(model.mean()) {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "inadmissible mean {}",
            model.mean()
        )))
    }
}

/// Closed-form line-search bound `sum_i 2 (g* - g_i) / I(C_i)` for segment
/// means `(r(s_i, a1), r(s_(i+1), a2))`.
///
/// Computed without the generic machinery: Gaussian segments use the
/// analytic pair `q1 = g* + g_i - r2`, `q2 = g* + g_i - r1`; Bernoulli
/// segments solve the one-dimensional slice by bisection on `q1`.
pub fn line_search_bound(segment_means: &[(f64, f64)], family: FamilySpec) -> Result<f64> {
    let gains: Vec<f64> = segment_means.iter().map(|&(a, b)| 0.5 * (a + b)).collect();
    let (best, g_star) = unique_max(&gains)?;
    let mut total = 0.0;
    for (i, (&(r1, r2), &g)) in segment_means.iter().zip(&gains).enumerate() {
        let (m1, m2) = (family.model(r1), family.model(r2));
        check_model(&m1)?;
        check_model(&m2)?;
        if i == best {
            continue;
        }
        let info = match family {
            FamilySpec::Gaussian { .. } => m1.kl(g_star + g - r2)? + m2.kl(g_star + g - r1)?,
            FamilySpec::Bernoulli => {
                let q1 = bernoulli_pair_projection(r1, r2, 2.0 * g_star)?;
                m1.kl(q1)? + m2.kl(2.0 * g_star - q1)?
            }
        };
        total += 2.0 * (g_star - g) / info;
    }
    Ok(total)
}

/// Minimizer `q1` of `KL(p1, q1) + KL(p2, sum - q1)` over the open slice.
fn bernoulli_pair_projection(p1: f64, p2: f64, sum: f64) -> Result<f64> {
    if !(sum > 0.0 && sum < 2.0) {
        return Err(Error::Infeasible { target: sum / 2.0 });
    }
    let (m1, m2) = (RewardModel::bernoulli(p1), RewardModel::bernoulli(p2));
    // derivative of the slice objective, increasing in q1
    let h = |q1: f64| -> Result<f64> {
        Ok(m1.kl_mean_derivative(q1)? - m2.kl_mean_derivative(sum - q1)?)
    };
    let mut lo = (sum - 1.0).max(0.0);
    let mut hi = sum.min(1.0);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = h(mid)?;
        if v == 0.0 {
            return Ok(mid);
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Lai-Robbins form `sum_{s != s*} (r* - r(s)) / KL(r(s), r*)` for
/// state-dependent rewards.
pub fn state_dependent_bound(state_means: &[f64], family: FamilySpec) -> Result<f64> {
    let (best, r_star) = unique_max(state_means)?;
    let mut total = 0.0;
    for (i, &r) in state_means.iter().enumerate() {
        let m = family.model(r);
        check_model(&m)?;
        if i != best {
            total += (r_star - r) / m.kl(r_star)?;
        }
    }
    Ok(total)
}
