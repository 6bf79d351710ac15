#![allow(dead_code)]

use std::collections::BTreeSet;

use dmdp_regret::dmdp::{Dmdp, DmdpDraft, EdgeId, StateId};
use dmdp_regret::reward::{FamilySpec, RewardModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random DMDP with `1..=max_states` states and `1..=max_actions` actions
/// per state. With `ring`, action `a1` moves `s_i -> s_(i+1)` (cyclically),
/// which makes the instance communicating.
pub fn random_dmdp(seed: u64, max_states: usize, max_actions: usize, ring: bool) -> Dmdp {
    let mut r = rng(seed);
    let n = r.random_range(1..=max_states);
    let states: Vec<String> = (1..=n).map(|i| format!("s{i}")).collect();
    let mut draft = DmdpDraft::new(states.iter().cloned());
    for i in 0..n {
        let k = r.random_range(1..=max_actions);
        for a in 0..k {
            let next = if ring && a == 0 {
                (i + 1) % n
            } else {
                r.random_range(0..n)
            };
            let mean = r.random_range(0.05..0.95);
            draft = draft.edge(
                &states[i],
                format!("a{}", a + 1),
                &states[next],
                RewardModel::bernoulli(mean),
            );
        }
    }
    draft.build().expect("random instance is valid")
}

/// Every simple cycle by exhaustive path search from each state, rotated
/// so the smallest edge comes first.
pub fn brute_force_cycles(d: &Dmdp) -> BTreeSet<Vec<EdgeId>> {
    fn extend(
        d: &Dmdp,
        start: StateId,
        at: StateId,
        path: &mut Vec<EdgeId>,
        seen: &mut Vec<bool>,
        out: &mut BTreeSet<Vec<EdgeId>>,
    ) {
        for e in d.out_edges(at) {
            let next = d.next_state(e);
            path.push(e);
            if next == start {
                let min = (0..path.len()).min_by_key(|&i| path[i]).unwrap();
                let mut c = path[min..].to_vec();
                c.extend_from_slice(&path[..min]);
                out.insert(c);
            } else if !seen[next.0] {
                seen[next.0] = true;
                extend(d, start, next, path, seen, out);
                seen[next.0] = false;
            }
            path.pop();
        }
    }
    let mut out = BTreeSet::new();
    for s in d.states() {
        let mut seen = vec![false; d.num_states()];
        seen[s.0] = true;
        extend(d, s, s, &mut Vec::new(), &mut seen, &mut out);
    }
    out
}

pub fn gain_of(d: &Dmdp, edges: &[EdgeId]) -> f64 {
    edges.iter().map(|&e| d.mean(e)).sum::<f64>() / edges.len() as f64
}

/// `n` segment pairs drawn from `[lo, hi)`.
pub fn random_segments(r: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    (0..n)
        .map(|_| (r.random_range(lo..hi), r.random_range(lo..hi)))
        .collect()
}

pub fn family_name(f: FamilySpec) -> &'static str {
    match f {
        FamilySpec::Bernoulli => "bernoulli",
        FamilySpec::Gaussian { .. } => "gaussian",
    }
}
