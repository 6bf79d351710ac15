mod common;

use dmdp_regret::dmdp::{Dmdp, DmdpDraft, StateId};
use dmdp_regret::error::Error;
use dmdp_regret::generate;
use dmdp_regret::reward::{FamilySpec, RewardModel};
use dmdp_regret::sim::{
    greedy_policy, klucb_cycle_policy, oracle_policy, regret_ratio_report, run, simulate_table,
    LearnerPolicy, PolicyKind, RunConfig, UniformRandomPolicy,
};

fn reference() -> Dmdp {
    generate::line_search(&[(0.5, 0.5), (0.7, 0.7), (0.5, 0.5)], FamilySpec::Bernoulli).unwrap()
}

#[test]
fn same_seed_same_trace() {
    let d = reference();
    for kind in [PolicyKind::KlUcb, PolicyKind::Greedy, PolicyKind::Uniform] {
        let go = |seed| {
            let mut p = kind.build(&d).unwrap();
            run(&d, p.as_mut(), &RunConfig::new(20_000, seed)).unwrap()
        };
        assert_eq!(go(5), go(5), "{kind}");
        assert_ne!(go(5).counts, go(6).counts, "{kind}");
    }
}

#[test]
fn parallel_table_is_deterministic() {
    let d = reference();
    let a = simulate_table(
        &d,
        PolicyKind::KlUcb,
        &[1000, 5000],
        &[3, 1, 2],
        None,
        Some(4.5),
    )
    .unwrap();
    let b = simulate_table(
        &d,
        PolicyKind::KlUcb,
        &[5000, 1000],
        &[3, 1, 2],
        None,
        Some(4.5),
    )
    .unwrap();
    assert_eq!(a, b);
    let seeds: Vec<u64> = a.rows.iter().take(3).map(|r| r.seed).collect();
    assert_eq!(seeds, vec![3, 1, 2]);
}

#[test]
fn counts_conserve_horizon_on_random_instances() {
    let mut r = common::rng(8);
    for n in 1..6 {
        let segs = common::random_segments(&mut r, n, 0.1, 0.9);
        let d = generate::line_search(&segs, FamilySpec::Bernoulli).unwrap();
        for kind in [
            PolicyKind::KlUcb,
            PolicyKind::Greedy,
            PolicyKind::Oracle,
            PolicyKind::Uniform,
        ] {
            let mut p = kind.build(&d).unwrap();
            let t = 3001;
            let tr = run(&d, p.as_mut(), &RunConfig::new(t, n as u64)).unwrap();
            assert_eq!(tr.counts.iter().sum::<u64>(), t);
            assert!((tr.regret_from_counts(&d) - tr.expected_regret).abs() < 1e-9);
        }
    }
}

#[test]
fn navigation_cost_is_bounded_by_navigating_epochs() {
    let d = reference();
    for seed in 0..5 {
        let mut p = klucb_cycle_policy(&d).unwrap();
        let tr = run(&d, &mut p, &RunConfig::new(50_000, seed)).unwrap();
        let nav = p.navigating_epochs();
        assert!(nav <= p.epochs());
        for (c, &k) in p.cycles().iter().zip(&p.traversals()) {
            for e in c.edges() {
                let extra = tr.counts[e.0] - k;
                assert!(
                    extra <= nav + 1,
                    "edge {e:?}: {extra} extra uses, {nav} navigating epochs"
                );
            }
        }
    }
}

#[test]
fn oracle_regret_plateaus() {
    let d = reference();
    let table = simulate_table(
        &d,
        PolicyKind::Oracle,
        &[1000, 10_000, 100_000],
        &[0, 1, 2],
        None,
        None,
    )
    .unwrap();
    let means: Vec<f64> = table.aggregates.iter().map(|a| a.mean_regret).collect();
    // one trip from s1 to the best cycle, then nothing
    assert!(
        means.iter().all(|&m| (m - means[0]).abs() < 1e-12),
        "{means:?}"
    );
    assert!((means[0] - 0.2).abs() < 1e-12);
    assert!(!table.learner && !table.suspicious());
}

#[test]
fn oracle_from_best_cycle_has_zero_regret() {
    let d = reference();
    let mut p = oracle_policy(&d).unwrap();
    let cfg = RunConfig::new(10_000, 0).with_initial_state(StateId(1));
    assert_eq!(run(&d, &mut p, &cfg).unwrap().expected_regret, 0.0);
}

#[test]
fn greedy_ratio_increases() {
    let d = generate::line_search(&[(0.45, 0.45), (0.55, 0.55)], FamilySpec::Bernoulli).unwrap();
    let seeds: Vec<u64> = (0..20).collect();
    let table = regret_ratio_report(
        &d,
        PolicyKind::Greedy,
        &[1000, 10_000, 100_000],
        &seeds,
        None,
    )
    .unwrap();
    let ratios: Vec<f64> = table
        .aggregates
        .iter()
        .map(|a| a.mean_ratio.unwrap())
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] > w[0]), "{ratios:?}");
}

#[test]
fn greedy_locks_onto_worse_cycle_for_some_seed() {
    let d = generate::line_search(&[(0.45, 0.45), (0.55, 0.55)], FamilySpec::Bernoulli).unwrap();
    let stuck = (0..50).any(|seed| {
        let mut p = greedy_policy(&d).unwrap();
        let tr = run(&d, &mut p, &RunConfig::new(20_000, seed)).unwrap();
        // linear regret: more than a quarter of the horizon on the worse cycle
        tr.expected_regret > 0.25 * 20_000.0 * 0.1
    });
    assert!(stuck);
}

#[test]
fn small_noise_greedy_is_consistent() {
    let d = generate::line_search(
        &[(0.3, 0.3), (0.6, 0.6), (0.2, 0.2)],
        FamilySpec::Gaussian { variance: 1e-6 },
    )
    .unwrap();
    for seed in 0..10 {
        let mut p = greedy_policy(&d).unwrap();
        let tr = run(
            &d,
            &mut p,
            &RunConfig::new(100_000, seed).with_checkpoints(vec![1000, 100_000]),
        )
        .unwrap();
        assert_eq!(tr.checkpoints[0].1, tr.checkpoints[1].1, "seed {seed}");
    }
}

#[test]
fn uniform_is_not_a_learner() {
    let d = reference();
    let p = UniformRandomPolicy::new(&d);
    assert!(!p.is_learner());
    let table = regret_ratio_report(&d, PolicyKind::Uniform, &[1000], &[0], None).unwrap();
    assert!(!table.suspicious());
}

#[test]
fn klucb_rejects_shared_edges() {
    let d = DmdpDraft::new(["s1", "s2", "s3"])
        .edge("s1", "a1", "s2", RewardModel::bernoulli(0.5))
        .edge("s2", "a1", "s1", RewardModel::bernoulli(0.5))
        .edge("s2", "a2", "s3", RewardModel::bernoulli(0.3))
        .edge("s3", "a1", "s1", RewardModel::bernoulli(0.5))
        .build()
        .unwrap();
    assert!(matches!(
        klucb_cycle_policy(&d),
        Err(Error::NonDisjoint { .. })
    ));
}
