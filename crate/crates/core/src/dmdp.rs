//! Deterministic MDP data model, structural validation and stationary policies.
//!
//! A [`DmdpDraft`] is the raw, possibly malformed description of a problem (as
//! parsed from a file or assembled by hand). [`validate`] lists everything
//! wrong with it; [`DmdpDraft::build`] turns a clean draft into an immutable
//! [`Dmdp`] whose states and edges are indexed in lexicographic order.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::ops::Range;

use crate::cycles::SimpleCycle;
use crate::error::{Error, Result};
use crate::reward::RewardModel;

/// Index of a state in lexicographic order of state identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub usize);

/// Index of a state-action pair in lexicographic `(state, action)` order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

/// How reward parameters are shared between edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RewardSharing {
    /// Every state-action pair has its own reward parameter.
    #[default]
    PerEdge,
    /// All edges entering a state share that state's reward distribution, and
    /// every state has a self-loop.
    PerState,
}

/// A structural problem found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoStates,
    DuplicateState(String),
    UndeclaredState(String),
    NoActions(String),
    DuplicateAction {
        state: String,
        action: String,
    },
    MissingTransition {
        state: String,
        action: String,
    },
    DanglingTransition {
        state: String,
        action: String,
        target: String,
    },
    UndeclaredTransition {
        state: String,
        action: String,
    },
    MissingReward {
        state: String,
        action: String,
    },
    UndeclaredReward {
        state: String,
        action: String,
    },
    MeanOutOfRange {
        state: String,
        action: String,
        mean: f64,
    },
    BadVariance {
        state: String,
        action: String,
        variance: f64,
    },
    VarianceMismatch {
        state: String,
        action: String,
        variance: f64,
        expected: f64,
    },
    SharedRewardMismatch {
        target: String,
        state: String,
        action: String,
    },
    MissingSelfLoop(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            NoStates => write!(f, "no states declared"),
            DuplicateState(s) => write!(f, "state `{s}` declared twice"),
            UndeclaredState(s) => write!(f, "actions given for undeclared state `{s}`"),
            NoActions(s) => write!(f, "state `{s}` has no actions"),
            DuplicateAction { state, action } => {
                write!(f, "action `{action}` declared twice at state `{state}`")
            }
            MissingTransition { state, action } => {
                write!(f, "edge ({state}, {action}) has no next state")
            }
            DanglingTransition { state, action, target } => write!(
                f,
                "edge ({state}, {action}) leads to undeclared state `{target}`"
            ),
            UndeclaredTransition { state, action } => {
                write!(f, "transition given for undeclared edge ({state}, {action})")
            }
            MissingReward { state, action } => {
                write!(f, "edge ({state}, {action}) has no reward model")
            }
            UndeclaredReward { state, action } => {
                write!(f, "reward given for undeclared edge ({state}, {action})")
            }
            MeanOutOfRange { state, action, mean } => write!(
                f,
                "edge ({state}, {action}) has inadmissible mean {mean}"
            ),
            BadVariance { state, action, variance } => write!(
                f,
                "edge ({state}, {action}) has non-positive variance {variance}"
            ),
            VarianceMismatch { state, action, variance, expected } => write!(
                f,
                "edge ({state}, {action}) has variance {variance}, but the problem-wide variance is {expected}"
            ),
            SharedRewardMismatch { target, state, action } => write!(
                f,
                "edge ({state}, {action}) enters `{target}` with a reward differing from other edges entering it"
            ),
            MissingSelfLoop(s) => write!(f, "state `{s}` has no self-loop"),
        }
    }
}

/// Unvalidated problem description.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DmdpDraft {
    pub states: Vec<String>,
    pub actions: BTreeMap<String, Vec<String>>,
    pub next_state: BTreeMap<(String, String), String>,
    pub rewards: BTreeMap<(String, String), RewardModel>,
    pub reward_sharing: RewardSharing,
}

impl DmdpDraft {
    pub fn new<S: Into<String>>(states: impl IntoIterator<Item = S>) -> Self {
        DmdpDraft {
            states: states.into_iter().map(Into::into).collect(),
            ..Default::default()
        }
    }

    pub fn with_sharing(mut self, sharing: RewardSharing) -> Self {
        self.reward_sharing = sharing;
        self
    }

    /// Declares the edge `(state, action)` with its transition and reward.
    pub fn edge(
        mut self,
        state: impl Into<String>,
        action: impl Into<String>,
        next: impl Into<String>,
        reward: RewardModel,
    ) -> Self {
        let (state, action) = (state.into(), action.into());
        self.actions
            .entry(state.clone())
            .or_default()
            .push(action.clone());
        self.next_state
            .insert((state.clone(), action.clone()), next.into());
        self.rewards.insert((state, action), reward);
        self
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate(self)
    }

    pub fn build(&self) -> Result<Dmdp> {
        let violations = validate(self);
        if !violations.is_empty() {
            return Err(Error::Invalid(violations));
        }
        Ok(Dmdp::from_valid_draft(self))
    }
}

/// Lists every invariant violation of `draft`; empty means valid.
pub fn validate(draft: &DmdpDraft) -> Vec<Violation> {
    let mut out = Vec::new();
    if draft.states.is_empty() {
        out.push(Violation::NoStates);
    }
    let mut declared = BTreeSet::new();
    for s in &draft.states {
        if !declared.insert(s.as_str()) {
            out.push(Violation::DuplicateState(s.clone()));
        }
    }
    for s in draft.actions.keys() {
        if !declared.contains(s.as_str()) {
            out.push(Violation::UndeclaredState(s.clone()));
        }
    }

    let mut pairs = BTreeSet::new();
    for s in &declared {
        let acts = draft.actions.get(*s).map(Vec::as_slice).unwrap_or(&[]);
        if acts.is_empty() {
            out.push(Violation::NoActions(s.to_string()));
        }
        for a in acts {
            if !pairs.insert((s.to_string(), a.clone())) {
                out.push(Violation::DuplicateAction {
                    state: s.to_string(),
                    action: a.clone(),
                });
            }
        }
    }

    for (s, a) in &pairs {
        let (state, action) = (s.clone(), a.clone());
        match draft.next_state.get(&(state.clone(), action.clone())) {
            None => out.push(Violation::MissingTransition {
                state: state.clone(),
                action: action.clone(),
            }),
            Some(t) if !declared.contains(t.as_str()) => out.push(Violation::DanglingTransition {
                state: state.clone(),
                action: action.clone(),
                target: t.clone(),
            }),
            Some(_) => {}
        }
        match draft.rewards.get(&(state.clone(), action.clone())) {
            None => out.push(Violation::MissingReward { state, action }),
            Some(m) => check_model(m, &state, &action, &mut out),
        }
    }
    for (s, a) in draft.next_state.keys() {
        if declared.contains(s.as_str()) && !pairs.contains(&(s.clone(), a.clone())) {
            out.push(Violation::UndeclaredTransition {
                state: s.clone(),
                action: a.clone(),
            });
        }
    }
    for (s, a) in draft.rewards.keys() {
        if declared.contains(s.as_str()) && !pairs.contains(&(s.clone(), a.clone())) {
            out.push(Violation::UndeclaredReward {
                state: s.clone(),
                action: a.clone(),
            });
        }
    }

    // Gaussian variance is a single problem-level constant.
    let mut expected_var = None;
    for (s, a) in &pairs {
        if let Some(RewardModel::Gaussian { variance, .. }) =
            draft.rewards.get(&(s.clone(), a.clone()))
        {
            match expected_var {
                None => expected_var = Some(*variance),
                Some(v) if v != *variance => out.push(Violation::VarianceMismatch {
                    state: s.clone(),
                    action: a.clone(),
                    variance: *variance,
                    expected: v,
                }),
                _ => {}
            }
        }
    }

    if draft.reward_sharing == RewardSharing::PerState {
        let mut entering: BTreeMap<&str, RewardModel> = BTreeMap::new();
        let mut has_loop = BTreeSet::new();
        for (s, a) in &pairs {
            let key = (s.clone(), a.clone());
            let (Some(t), Some(m)) = (draft.next_state.get(&key), draft.rewards.get(&key)) else {
                continue;
            };
            if t == s {
                has_loop.insert(s.as_str());
            }
            match entering.get(t.as_str()) {
                None => {
                    entering.insert(t.as_str(), *m);
                }
                Some(first) if first != m => out.push(Violation::SharedRewardMismatch {
                    target: t.clone(),
                    state: s.clone(),
                    action: a.clone(),
                }),
                _ => {}
            }
        }
        for s in &declared {
            if !has_loop.contains(s) {
                out.push(Violation::MissingSelfLoop(s.to_string()));
            }
        }
    }
    out
}

fn check_model(m: &RewardModel, state: &str, action: &str, out: &mut Vec<Violation>) {
    match *m {
        RewardModel::Bernoulli { mean } => {
            if !(mean > 0.0 && mean < 1.0) {
                out.push(Violation::MeanOutOfRange {
                    state: state.into(),
                    action: action.into(),
                    mean,
                });
            }
        }
        RewardModel::Gaussian { mean, variance } => {
            if !mean.is_finite() {
                out.push(Violation::MeanOutOfRange {
                    state: state.into(),
                    action: action.into(),
                    mean,
                });
            }
            if !(variance > 0.0 && variance.is_finite()) {
                out.push(Violation::BadVariance {
                    state: state.into(),
                    action: action.into(),
                    variance,
                });
            }
        }
    }
}

/// A state-action pair of a validated DMDP.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeInfo {
    pub state: StateId,
    pub action: String,
    pub next: StateId,
    pub reward: RewardModel,
}

/// Validated, immutable deterministic MDP.
#[derive(Debug, Clone, PartialEq)]
pub struct Dmdp {
    states: Vec<String>,
    edges: Vec<EdgeInfo>,
    out: Vec<Range<usize>>,
    sharing: RewardSharing,
}

impl Dmdp {
    fn from_valid_draft(draft: &DmdpDraft) -> Dmdp {
        let mut states = draft.states.clone();
        states.sort();
        let index = |s: &str| StateId(states.binary_search_by(|x| x.as_str().cmp(s)).unwrap());
        let mut edges = Vec::new();
        let mut out = Vec::with_capacity(states.len());
        for (i, s) in states.iter().enumerate() {
            let mut acts = draft.actions[s].clone();
            acts.sort();
            let begin = edges.len();
            for a in acts {
                let key = (s.clone(), a);
                edges.push(EdgeInfo {
                    state: StateId(i),
                    next: index(&draft.next_state[&key]),
                    reward: draft.rewards[&key],
                    action: key.1,
                });
            }
            out.push(begin..edges.len());
        }
        Dmdp {
            states,
            edges,
            out,
            sharing: draft.reward_sharing,
        }
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.states.len()).map(StateId)
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s.0]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states
            .binary_search_by(|x| x.as_str().cmp(name))
            .ok()
            .map(StateId)
    }

    pub fn edge(&self, e: EdgeId) -> &EdgeInfo {
        &self.edges[e.0]
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len()).map(EdgeId)
    }

    /// Edges leaving `s`, in action order.
    pub fn out_edges(&self, s: StateId) -> impl ExactSizeIterator<Item = EdgeId> {
        self.out[s.0].clone().map(EdgeId)
    }

    pub fn find_edge(&self, state: &str, action: &str) -> Option<EdgeId> {
        let s = self.state_id(state)?;
        self.out_edges(s)
            .find(|&e| self.edges[e.0].action == action)
    }

    pub fn next_state(&self, e: EdgeId) -> StateId {
        self.edges[e.0].next
    }

    pub fn mean(&self, e: EdgeId) -> f64 {
        self.edges[e.0].reward.mean()
    }

    pub fn reward_sharing(&self) -> RewardSharing {
        self.sharing
    }

    /// `(state, action)` label of an edge.
    pub fn edge_label(&self, e: EdgeId) -> String {
        let info = &self.edges[e.0];
        format!("({}, {})", self.states[info.state.0], info.action)
    }

    /// Lossless conversion back to the raw description.
    pub fn to_draft(&self) -> DmdpDraft {
        let mut draft = DmdpDraft::new(self.states.iter().cloned()).with_sharing(self.sharing);
        for info in &self.edges {
            draft = draft.edge(
                self.states[info.state.0].clone(),
                info.action.clone(),
                self.states[info.next.0].clone(),
                info.reward,
            );
        }
        draft
    }

    /// States reachable from `from` following transitions.
    pub fn reachable_from(&self, from: StateId) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut queue = VecDeque::from([from]);
        seen[from.0] = true;
        while let Some(s) = queue.pop_front() {
            for e in self.out_edges(s) {
                let t = self.next_state(e);
                if !seen[t.0] {
                    seen[t.0] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    /// An ordered pair `(from, to)` such that `to` cannot be reached from
    /// `from`, or `None` when the DMDP is communicating.
    pub fn unreachable_pair(&self) -> Option<(StateId, StateId)> {
        let root = StateId(0);
        let forward = self.reachable_from(root);
        if let Some(t) = forward.iter().position(|&r| !r) {
            return Some((root, StateId(t)));
        }
        let mut reverse = vec![false; self.num_states()];
        let mut preds: Vec<Vec<StateId>> = vec![Vec::new(); self.num_states()];
        for info in &self.edges {
            preds[info.next.0].push(info.state);
        }
        let mut queue = VecDeque::from([root]);
        reverse[root.0] = true;
        while let Some(s) = queue.pop_front() {
            for &p in &preds[s.0] {
                if !reverse[p.0] {
                    reverse[p.0] = true;
                    queue.push_back(p);
                }
            }
        }
        reverse.iter().position(|&r| !r).map(|s| (StateId(s), root))
    }
}

/// True iff every state can be reached from every other state.
pub fn is_communicating(dmdp: &Dmdp) -> bool {
    dmdp.unreachable_pair().is_none()
}

/// Stationary deterministic Markov policy: one edge per state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Policy {
    choice: Vec<EdgeId>,
}

impl Policy {
    pub fn new(dmdp: &Dmdp, choice: Vec<EdgeId>) -> Result<Policy> {
        if choice.len() != dmdp.num_states() {
            return Err(Error::Parameter(format!(
                "policy has {} choices for {} states",
                choice.len(),
                dmdp.num_states()
            )));
        }
        for (i, &e) in choice.iter().enumerate() {
            if e.0 >= dmdp.num_edges() || dmdp.edge(e).state != StateId(i) {
                return Err(Error::UnknownAction {
                    state: dmdp.state_name(StateId(i)).to_string(),
                    action: format!("#{}", e.0),
                });
            }
        }
        Ok(Policy { choice })
    }

    /// Builds a policy from action names, one per state in state order.
    pub fn from_actions<S: AsRef<str>>(dmdp: &Dmdp, actions: &[S]) -> Result<Policy> {
        let choice = dmdp
            .states()
            .zip(actions)
            .map(|(s, a)| {
                dmdp.find_edge(dmdp.state_name(s), a.as_ref())
                    .ok_or_else(|| Error::UnknownAction {
                        state: dmdp.state_name(s).to_string(),
                        action: a.as_ref().to_string(),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Policy::new(dmdp, choice)
    }

    pub fn action(&self, s: StateId) -> EdgeId {
        self.choice[s.0]
    }

    /// Every stationary deterministic policy, in mixed-radix order.
    pub fn enumerate(dmdp: &Dmdp) -> impl Iterator<Item = Policy> + '_ {
        let radix: Vec<usize> = dmdp.states().map(|s| dmdp.out_edges(s).len()).collect();
        let mut digits = Some(vec![0usize; radix.len()]);
        std::iter::from_fn(move || {
            let current = digits.clone()?;
            let policy = Policy {
                choice: current
                    .iter()
                    .enumerate()
                    .map(|(s, &d)| EdgeId(dmdp.out[s].start + d))
                    .collect(),
            };
            let mut next = current;
            let mut i = 0;
            loop {
                if i == next.len() {
                    digits = None;
                    break;
                }
                next[i] += 1;
                if next[i] < radix[i] {
                    digits = Some(next);
                    break;
                }
                next[i] = 0;
                i += 1;
            }
            Some(policy)
        })
    }
}

/// The simple cycle a stationary policy eventually repeats when started at
/// `start`; the transient lead-in is dropped.
pub fn policy_cycle(dmdp: &Dmdp, policy: &Policy, start: StateId) -> SimpleCycle {
    let mut first_visit = vec![usize::MAX; dmdp.num_states()];
    let mut path = Vec::new();
    let mut s = start;
    while first_visit[s.0] == usize::MAX {
        first_visit[s.0] = path.len();
        let e = policy.action(s);
        path.push(e);
        s = dmdp.next_state(e);
    }
    SimpleCycle::from_closed_path(dmdp, path.split_off(first_visit[s.0]))
}

/// Arithmetic mean of edge means along `edges`.
pub fn cycle_gain(dmdp: &Dmdp, edges: &[EdgeId]) -> Result<f64> {
    if edges.is_empty() {
        return Err(Error::EmptyCycle);
    }
    Ok(edges.iter().map(|&e| dmdp.mean(e)).sum::<f64>() / edges.len() as f64)
}
