//! Instance generators for the two structured problem classes: the
//! deterministic line search and DMDPs with state-dependent rewards.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dmdp::{Dmdp, DmdpDraft, RewardSharing};
use crate::error::{Error, Result};
use crate::reward::FamilySpec;

fn state_names(count: usize) -> Vec<String> {
    let width = count.to_string().len();
    (1..=count).map(|i| format!("s{i:0width$}")).collect()
}

fn action_names(count: usize) -> Vec<String> {
    let width = count.to_string().len();
    (1..=count).map(|i| format!("a{i:0width$}")).collect()
}

/// Line search with `n = segment_means.len()` segments over states
/// `s1..s(n+1)`. Segment `i` contributes `(s_i, a1) -> s_(i+1)` with the
/// first mean and `(s_(i+1), a2) -> s_i` with the second, so its only cycle
/// has gain equal to the average of the pair.
pub fn line_search_draft(segment_means: &[(f64, f64)], family: FamilySpec) -> Result<DmdpDraft> {
    if segment_means.is_empty() {
        return Err(Error::Parameter(
            "line search needs at least one segment".into(),
        ));
    }
    let states = state_names(segment_means.len() + 1);
    let mut draft = DmdpDraft::new(states.iter().cloned());
    for (i, &(forward, backward)) in segment_means.iter().enumerate() {
        draft = draft
            .edge(&states[i], "a1", &states[i + 1], family.model(forward))
            .edge(&states[i + 1], "a2", &states[i], family.model(backward));
    }
    Ok(draft)
}

pub fn line_search(segment_means: &[(f64, f64)], family: FamilySpec) -> Result<Dmdp> {
    line_search_draft(segment_means, family)?.build()
}

/// State-dependent rewards on `k = state_means.len()` states: every state
/// has a self-loop, and a ring `s1 -> sk -> ... -> s2 -> s1` links them.
/// Action `a_j` always leads to `s_j` and carries `s_j`'s reward.
pub fn state_rewards_draft(state_means: &[f64], family: FamilySpec) -> Result<DmdpDraft> {
    let k = state_means.len();
    if k == 0 {
        return Err(Error::Parameter(
            "state-rewards instance needs at least one state".into(),
        ));
    }
    let states = state_names(k);
    let actions = action_names(k);
    let mut draft = DmdpDraft::new(states.iter().cloned()).with_sharing(RewardSharing::PerState);
    for i in 0..k {
        draft = draft.edge(
            &states[i],
            &actions[i],
            &states[i],
            family.model(state_means[i]),
        );
        if k > 1 {
            let down = if i == 0 { k - 1 } else { i - 1 };
            draft = draft.edge(
                &states[i],
                &actions[down],
                &states[down],
                family.model(state_means[down]),
            );
        }
    }
    Ok(draft)
}

pub fn state_rewards(state_means: &[f64], family: FamilySpec) -> Result<Dmdp> {
    state_rewards_draft(state_means, family)?.build()
}

/// `count` means drawn uniformly from `[lo, hi)` with a seeded generator.
pub fn random_means(count: usize, seed: u64, lo: f64, hi: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.random_range(lo..hi)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::enumerate_simple_cycles;

    #[test]
    fn names_sort_in_numeric_order() {
        let names = state_names(12);
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
        assert_eq!(names[0], "s01");
    }

    #[test]
    fn single_segment() {
        let d = line_search(&[(0.2, 0.3)], FamilySpec::Bernoulli).unwrap();
        assert_eq!(d.num_states(), 2);
        assert_eq!(enumerate_simple_cycles(&d).unwrap().len(), 1);
    }

    #[test]
    fn three_segments() {
        let d = line_search(&[(0.2, 0.3), (0.4, 0.5), (0.6, 0.7)], FamilySpec::Bernoulli).unwrap();
        assert_eq!(d.num_states(), 4);
        let gains: Vec<f64> = enumerate_simple_cycles(&d)
            .unwrap()
            .iter()
            .map(|c| c.gain())
            .collect();
        assert_eq!(gains.len(), 3);
        for (g, want) in gains.iter().zip([0.25, 0.45, 0.65]) {
            assert!((g - want).abs() < 1e-15);
        }
    }

    #[test]
    fn ring_edges_carry_destination_rewards() {
        let d = state_rewards(&[0.9, 0.8, 0.5, 0.3], FamilySpec::Bernoulli).unwrap();
        for e in d.edge_ids() {
            let target = d.next_state(e).0;
            assert_eq!(d.mean(e), [0.9, 0.8, 0.5, 0.3][target]);
        }
        assert_eq!(d.num_edges(), 8);
    }

    #[test]
    fn random_means_are_reproducible() {
        assert_eq!(random_means(5, 9, 0.1, 0.9), random_means(5, 9, 0.1, 0.9));
        assert_ne!(random_means(5, 9, 0.1, 0.9), random_means(5, 10, 0.1, 0.9));
    }
}
