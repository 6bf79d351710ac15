//! Acceptance checks, one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines are always printed.

mod common;

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use dmdp_regret::bound::{
    inner_confusing, inner_confusing_lagrangian, line_search_bound, solve_disjoint,
    state_dependent_bound,
};
use dmdp_regret::cycles::{decompose_walk, enumerate_simple_cycles, optimal_cycle, SimpleCycle};
use dmdp_regret::dmdp::{policy_cycle, Dmdp, DmdpDraft, EdgeId, Policy, StateId};
use dmdp_regret::generate;
use dmdp_regret::reward::{FamilySpec, RewardModel};
use dmdp_regret::sim::{regret_ratio_report, PolicyKind};
use rand::Rng;

use common::{brute_force_cycles, gain_of, random_dmdp, random_segments, rng};

type Check = Result<String, String>;

/// Name, check, time budget.
type Criterion = (&'static str, fn() -> Check, Duration);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// Single cycle `s1 -> s2 -> ... -> s1` with the given edge rewards.
fn ring(models: &[RewardModel]) -> (Dmdp, SimpleCycle) {
    let k = models.len();
    let names: Vec<String> = (1..=k).map(|i| format!("s{i}")).collect();
    let mut draft = DmdpDraft::new(names.iter().cloned());
    for (i, m) in models.iter().enumerate() {
        draft = draft.edge(&names[i], "a", &names[(i + 1) % k], *m);
    }
    let d = draft.build().expect("ring is valid");
    let c = enumerate_simple_cycles(&d).expect("one cycle").remove(0);
    (d, c)
}

fn state_dependent() -> Check {
    let means = [0.9, 0.8, 0.5];
    let closed = state_dependent_bound(&means, FamilySpec::Bernoulli).map_err(|e| e.to_string())?;
    let d = generate::state_rewards(&means, FamilySpec::Bernoulli).map_err(|e| e.to_string())?;
    let general = solve_disjoint(&d).map_err(|e| e.to_string())?.constant;
    // the reference value is quoted to four decimals
    ensure(
        (closed - 3.0352).abs() < 1e-4,
        format!("closed form {closed} is not 3.0352"),
    )?;
    ensure(
        (closed - general).abs() <= 1e-9,
        format!("closed form {closed} vs general solver {general}"),
    )?;
    Ok(format!(
        "C = {closed:.6}, |closed - general| = {:.1e}",
        (closed - general).abs()
    ))
}

fn line_search_equivalence() -> Check {
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    let mut largest: f64 = 0.0;
    for (family, lo, hi) in [
        (FamilySpec::Gaussian { variance: 1.0 }, -1.0, 1.0),
        (FamilySpec::Bernoulli, 0.05, 0.95),
    ] {
        for i in 0..100 {
            let n = r.random_range(1..=10);
            let segs = random_segments(&mut r, n, lo, hi);
            let closed =
                line_search_bound(&segs, family).map_err(|e| format!("instance {i}: {e}"))?;
            let d = generate::line_search(&segs, family).map_err(|e| e.to_string())?;
            let general = solve_disjoint(&d)
                .map_err(|e| format!("instance {i}: {e}"))?
                .constant;
            let diff = (closed - general).abs();
            ensure(
                diff <= 1e-9,
                format!(
                    "{} instance {i}: closed {closed} vs general {general}",
                    common::family_name(family)
                ),
            )?;
            worst = worst.max(diff);
            largest = largest.max(closed);
        }
    }
    Ok(format!(
        "200 instances, max |diff| = {worst:.1e}, largest C = {largest:.3}"
    ))
}

fn inner_grid_optimality() -> Check {
    const STEP: f64 = 1e-3;
    let mut r = rng(3);
    let mut worst_gap: f64 = 0.0;
    let mut worst_mean: f64 = 0.0;
    for i in 0..50 {
        let k = r.random_range(1..=3);
        let means: Vec<f64> = (0..k).map(|_| r.random_range(0.05..0.9)).collect();
        let models: Vec<RewardModel> = means.iter().map(|&p| RewardModel::bernoulli(p)).collect();
        let (d, c) = ring(&models);
        let gain = c.gain();
        let target = gain + r.random_range(0.01..(0.95 - gain).max(0.02));
        let sol = inner_confusing(&d, &c, target).map_err(|e| format!("cycle {i}: {e}"))?;
        let sum = k as f64 * target;
        // the solution reports means in cycle order, which for a ring
        // starting at its smallest edge is the order of `models`
        let cost =
            |q: &[f64]| -> f64 { models.iter().zip(q).map(|(m, &x)| m.kl(x).unwrap()).sum() };
        let mut best = (f64::INFINITY, Vec::new());
        let grid = (1..1000).map(|j| j as f64 * STEP);
        match k {
            1 => best = (cost(&[target]), vec![target]),
            2 => {
                for q1 in grid {
                    let q2 = sum - q1;
                    if q2 > 0.0 && q2 < 1.0 {
                        let v = cost(&[q1, q2]);
                        if v < best.0 {
                            best = (v, vec![q1, q2]);
                        }
                    }
                }
            }
            _ => {
                for q1 in grid {
                    for j in 1..1000 {
                        let q2 = j as f64 * STEP;
                        let q3 = sum - q1 - q2;
                        if q3 > 0.0 && q3 < 1.0 {
                            let v = cost(&[q1, q2, q3]);
                            if v < best.0 {
                                best = (v, vec![q1, q2, q3]);
                            }
                        }
                    }
                }
            }
        }
        ensure(
            sol.kl_cost <= best.0 + 1e-12,
            format!(
                "cycle {i}: objective {} above grid minimum {}",
                sol.kl_cost, best.0
            ),
        )?;
        let dev = sol
            .means
            .iter()
            .zip(&best.1)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        ensure(
            dev <= 1e-3,
            format!(
                "cycle {i}: means {:?} vs grid argmin {:?}",
                sol.means, best.1
            ),
        )?;
        worst_gap = worst_gap.max(best.0 - sol.kl_cost);
        worst_mean = worst_mean.max(dev);
    }
    Ok(format!(
        "50 cycles, max grid excess {worst_gap:.1e}, max mean deviation {worst_mean:.1e}"
    ))
}

fn gaussian_closed_form() -> Check {
    let mut r = rng(4);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let k = r.random_range(1..=8);
        let variance = r.random_range(0.1..3.0);
        let models: Vec<RewardModel> = (0..k)
            .map(|_| RewardModel::gaussian(r.random_range(-2.0..2.0), variance))
            .collect();
        let (d, c) = ring(&models);
        let target = c.gain() + r.random_range(-1.0..1.0);
        let shift = inner_confusing(&d, &c, target).map_err(|e| e.to_string())?;
        let numeric = inner_confusing_lagrangian(&d, &c, target).map_err(|e| e.to_string())?;
        let dev = shift
            .means
            .iter()
            .zip(&numeric.means)
            .map(|(a, b)| (a - b).abs())
            .fold((shift.kl_cost - numeric.kl_cost).abs(), f64::max);
        ensure(dev <= 1e-8, format!("cycle {i}: deviation {dev:e}"))?;
        worst = worst.max(dev);
    }
    Ok(format!("100 cycles, max deviation {worst:.1e}"))
}

fn graph_oracles() -> Check {
    let mut total_cycles = 0;
    for seed in 0..200 {
        let d = random_dmdp(1000 + seed, 8, 3, false);
        let got: Vec<Vec<EdgeId>> = enumerate_simple_cycles(&d)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|c| c.edges().to_vec())
            .collect();
        let expected = brute_force_cycles(&d);
        let got_set: BTreeSet<Vec<EdgeId>> = got.iter().cloned().collect();
        ensure(
            got_set.len() == got.len(),
            format!("instance {seed}: duplicate cycles"),
        )?;
        ensure(
            got_set == expected,
            format!("instance {seed}: cycle sets differ"),
        )?;
        total_cycles += got.len();

        let cycles = enumerate_simple_cycles(&d).map_err(|e| e.to_string())?;
        let (best, g) = optimal_cycle(&cycles).map_err(|e| e.to_string())?;
        let brute_max = expected
            .iter()
            .map(|c| gain_of(&d, c))
            .fold(f64::NEG_INFINITY, f64::max);
        ensure(
            (g - brute_max).abs() <= 1e-12 && (best.gain() - g).abs() == 0.0,
            format!("instance {seed}: optimal gain {g} vs brute force {brute_max}"),
        )?;
    }

    let mut r = rng(5);
    for w in 0..1000 {
        let d = random_dmdp(5000 + w, 8, 3, false);
        let len = r.random_range(0..200);
        let mut s = StateId(r.random_range(0..d.num_states()));
        let mut walk = Vec::with_capacity(len);
        for _ in 0..len {
            let out: Vec<EdgeId> = d.out_edges(s).collect();
            let e = out[r.random_range(0..out.len())];
            walk.push(e);
            s = d.next_state(e);
        }
        let dec = decompose_walk(&d, &walk).map_err(|e| format!("walk {w}: {e}"))?;
        let mut counts = vec![0usize; d.num_edges()];
        for (c, &n) in &dec.cycle_counts {
            for e in c.edges() {
                counts[e.0] += n;
            }
        }
        for e in &dec.residual_path {
            counts[e.0] += 1;
        }
        let mut expected = vec![0usize; d.num_edges()];
        for e in &walk {
            expected[e.0] += 1;
        }
        ensure(
            counts == expected,
            format!("walk {w}: edge multiset not conserved"),
        )?;
        ensure(
            dec.residual_path.len() < d.num_states(),
            format!(
                "walk {w}: residual path of length {} is not simple",
                dec.residual_path.len()
            ),
        )?;
    }
    Ok(format!("200 instances ({total_cycles} cycles), 1000 walks"))
}

fn stationary_policies() -> Check {
    let mut policies = 0usize;
    for seed in 0..50 {
        let d = random_dmdp(9000 + seed, 6, 3, true);
        let cycles = enumerate_simple_cycles(&d).map_err(|e| e.to_string())?;
        let (_, g) = optimal_cycle(&cycles).map_err(|e| e.to_string())?;
        let best = Policy::enumerate(&d)
            .map(|p| {
                policies += 1;
                policy_cycle(&d, &p, StateId(0)).gain()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        ensure(
            best == g,
            format!("instance {seed}: best policy gain {best} vs optimal cycle {g}"),
        )?;
    }
    Ok(format!("50 instances, {policies} policies"))
}

fn simulation_consistency() -> Check {
    let d = generate::line_search(&[(0.5, 0.5), (0.7, 0.7), (0.5, 0.5)], FamilySpec::Bernoulli)
        .map_err(|e| e.to_string())?;
    let horizons = [100_000, 1_000_000];
    let seeds: Vec<u64> = (0..20).collect();
    let table =
        |kind| regret_ratio_report(&d, kind, &horizons, &seeds, None).map_err(|e| e.to_string());
    let klucb = table(PolicyKind::KlUcb)?;
    let greedy = table(PolicyKind::Greedy)?;
    let ratio = |t: &dmdp_regret::sim::SimulationTable, h| {
        t.aggregate(h).and_then(|a| a.mean_ratio).unwrap()
    };
    let (k5, k6, g6) = (
        ratio(&klucb, 100_000),
        ratio(&klucb, 1_000_000),
        ratio(&greedy, 1_000_000),
    );
    let summary = format!(
        "C = {:.4}, klucb ratio {k5:.3} (1e5) {k6:.3} (1e6), greedy {g6:.1} (1e6)",
        klucb.constant.unwrap()
    );
    ensure(
        (0.5..=3.0).contains(&k6),
        format!("klucb ratio at 1e6 outside [0.5, 3]; {summary}"),
    )?;
    ensure(
        k6 <= 2.0 * k5,
        format!("klucb ratio grows more than 2x; {summary}"),
    )?;
    ensure(
        g6 >= 5.0 * k6,
        format!("greedy not 5x worse than klucb; {summary}"),
    )?;
    Ok(summary)
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_dmdp");
    let run = |args: &[&str]| -> Result<Vec<u8>, String> {
        let out = Command::new(bin)
            .args(args)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!(
                "{args:?}: {}",
                String::from_utf8_lossy(&out.stderr)
            ));
        }
        Ok(out.stdout)
    };
    let problem = dir.path().join("problem.json");
    let problem_s = problem.to_str().unwrap();
    let generated = run(&["generate", "line-search", "--segments", "3", "--seed", "11"])?;
    ensure(
        generated == run(&["generate", "line-search", "--segments", "3", "--seed", "11"])?,
        "generate output differs between runs",
    )?;
    std::fs::write(&problem, &generated).map_err(|e| e.to_string())?;

    let mut reports = 0;
    for args in [
        vec!["cycles", problem_s],
        vec!["bound", problem_s],
        vec!["bound", problem_s, "--format", "json"],
        vec![
            "simulate",
            problem_s,
            "--policy",
            "klucb",
            "--horizons",
            "1000,1e4",
            "--seeds",
            "8@0",
        ],
        vec![
            "simulate",
            problem_s,
            "--policy",
            "greedy",
            "--horizons",
            "1000,1e4",
            "--seeds",
            "3,9,27",
        ],
    ] {
        let (a, b) = (run(&args)?, run(&args)?);
        ensure(!a.is_empty() && a == b, format!("{args:?}: reports differ"))?;
        reports += 1;
    }
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    for out in [&out_a, &out_b] {
        run(&[
            "simulate",
            problem_s,
            "--policy",
            "oracle",
            "--horizons",
            "500",
            "--seeds",
            "4@7",
            "--out",
            out.to_str().unwrap(),
        ])?;
    }
    let (a, b) = (
        std::fs::read(&out_a).unwrap(),
        std::fs::read(&out_b).unwrap(),
    );
    ensure(a == b, "--out files differ")?;
    Ok(format!("{} report pairs byte-identical", reports + 2))
}

fn main() {
    let criteria: [Criterion; 8] = [
        (
            "state-dependent closed form equals the general solver",
            state_dependent,
            Duration::from_secs(1),
        ),
        (
            "line-search closed form equals the general solver",
            line_search_equivalence,
            Duration::from_secs(10),
        ),
        (
            "inner solver beats the constraint-slice grid",
            inner_grid_optimality,
            Duration::from_secs(60),
        ),
        (
            "Gaussian uniform shift equals the Lagrangian path",
            gaussian_closed_form,
            Duration::MAX,
        ),
        (
            "cycle enumeration, optimal cycle and walk decomposition oracles",
            graph_oracles,
            Duration::from_secs(60),
        ),
        (
            "best stationary policy attains the optimal cycle gain",
            stationary_policies,
            Duration::MAX,
        ),
        (
            "KL-UCB tracks the bound, greedy does not",
            simulation_consistency,
            Duration::from_secs(300),
        ),
        (
            "CLI reports are byte-identical across runs",
            determinism,
            Duration::MAX,
        ),
    ];
    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = match result {
            Ok(s) if elapsed > *budget => {
                Err(format!("{s}; over the {}s budget", budget.as_secs()))
            }
            other => other,
        };
        let (status, detail) = match &result {
            Ok(s) => ("PASS", s),
            Err(s) => ("FAIL", s),
        };
        println!(
            "criterion {} {status}: {name} [{detail}] ({:.2}s)",
            i + 1,
            elapsed.as_secs_f64()
        );
        if result.is_err() {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
