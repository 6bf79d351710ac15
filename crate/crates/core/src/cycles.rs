//! Simple cycles of the state-action edge graph.
//!
//! A DMDP is a directed multigraph whose vertices are states and whose edges
//! are state-action pairs. Stationary deterministic policies eventually repeat
//! a simple cycle, so optimal gains, walk decompositions and the lower bound
//! are all phrased in terms of the finite set of simple cycles.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::hash::{Hash, Hasher};

use crate::dmdp::{cycle_gain, Dmdp, EdgeId, StateId};
use crate::error::{Error, Result};

/// Default limit on the number of enumerated cycles.
pub const DEFAULT_CYCLE_CAP: usize = 1_000_000;

/// Closed path with no repeated state, stored in canonical rotation (smallest
/// edge first). Equality, ordering and hashing look at the edges only.
#[derive(Debug, Clone)]
pub struct SimpleCycle {
    edges: Vec<EdgeId>,
    gain: f64,
}

impl SimpleCycle {
    /// Checks chaining, closure and state-simplicity, then canonicalizes.
    pub fn new(dmdp: &Dmdp, edges: Vec<EdgeId>) -> Result<SimpleCycle> {
        if edges.is_empty() {
            return Err(Error::EmptyCycle);
        }
        let mut seen = BTreeSet::new();
        for (i, &e) in edges.iter().enumerate() {
            if e.0 >= dmdp.num_edges() {
                return Err(Error::BrokenWalk { index: i });
            }
            let next = edges[(i + 1) % edges.len()];
            if next.0 >= dmdp.num_edges() || dmdp.next_state(e) != dmdp.edge(next).state {
                return Err(Error::BrokenWalk {
                    index: (i + 1) % edges.len(),
                });
            }
            if !seen.insert(dmdp.edge(e).state) {
                return Err(Error::BrokenWalk { index: i });
            }
        }
        Ok(Self::from_closed_path(dmdp, edges))
    }

    /// Caller guarantees `edges` is a nonempty closed path without repeated states.
    pub(crate) fn from_closed_path(dmdp: &Dmdp, mut edges: Vec<EdgeId>) -> SimpleCycle {
        let pivot = edges
            .iter()
            .enumerate()
            .min_by_key(|&(_, e)| *e)
            .map(|(i, _)| i)
            .unwrap_or(0);
        edges.rotate_left(pivot);
        let gain = cycle_gain(dmdp, &edges).expect("nonempty cycle");
        SimpleCycle { edges, gain }
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.edges.contains(&e)
    }

    pub fn states<'a>(&'a self, dmdp: &'a Dmdp) -> impl Iterator<Item = StateId> + 'a {
        self.edges.iter().map(move |&e| dmdp.edge(e).state)
    }

    /// Space-separated `state:action` tokens.
    pub fn label(&self, dmdp: &Dmdp) -> String {
        self.edges
            .iter()
            .map(|&e| {
                let info = dmdp.edge(e);
                format!("{}:{}", dmdp.state_name(info.state), info.action)
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl PartialEq for SimpleCycle {
    fn eq(&self, other: &Self) -> bool {
        self.edges == other.edges
    }
}

impl Eq for SimpleCycle {}

impl Hash for SimpleCycle {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.edges.hash(state);
    }
}

impl PartialOrd for SimpleCycle {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SimpleCycle {
    fn cmp(&self, other: &Self) -> Ordering {
        self.edges.cmp(&other.edges)
    }
}

/// All simple cycles, canonical and sorted, with the default cap.
pub fn enumerate_simple_cycles(dmdp: &Dmdp) -> Result<Vec<SimpleCycle>> {
    enumerate_simple_cycles_capped(dmdp, DEFAULT_CYCLE_CAP)
}

/// Johnson's circuit enumeration over the edge multigraph. For each start
/// state `s`, only the strongly connected piece of the subgraph induced by
/// states `>= s` that contains `s` is searched, so every cycle is reported
/// exactly once, from its smallest state.
pub fn enumerate_simple_cycles_capped(dmdp: &Dmdp, cap: usize) -> Result<Vec<SimpleCycle>> {
    let n = dmdp.num_states();
    let mut found = Vec::new();
    for start in 0..n {
        let component = component_of(dmdp, start);
        let mut search = Johnson {
            dmdp,
            start: StateId(start),
            component: &component,
            blocked: vec![false; n],
            block_map: vec![BTreeSet::new(); n],
            path: Vec::new(),
            found: &mut found,
            cap,
        };
        search.circuit(StateId(start))?;
    }
    let mut cycles: Vec<SimpleCycle> = found
        .into_iter()
        .map(|edges| SimpleCycle::from_closed_path(dmdp, edges))
        .collect();
    cycles.sort();
    Ok(cycles)
}

/// Membership mask of the strongly connected component of `start` within the
/// subgraph induced by states `>= start`.
fn component_of(dmdp: &Dmdp, start: usize) -> Vec<bool> {
    let n = dmdp.num_states();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in dmdp.edge_ids() {
        let (s, t) = (dmdp.edge(e).state.0, dmdp.next_state(e).0);
        if s >= start && t >= start {
            preds[t].push(s);
        }
    }
    let mut fwd = vec![false; n];
    let mut stack = vec![start];
    fwd[start] = true;
    while let Some(s) = stack.pop() {
        for e in dmdp.out_edges(StateId(s)) {
            let t = dmdp.next_state(e).0;
            if t >= start && !fwd[t] {
                fwd[t] = true;
                stack.push(t);
            }
        }
    }
    let mut bwd = vec![false; n];
    stack.push(start);
    bwd[start] = true;
    while let Some(s) = stack.pop() {
        for &p in &preds[s] {
            if !bwd[p] {
                bwd[p] = true;
                stack.push(p);
            }
        }
    }
    fwd.iter().zip(&bwd).map(|(&a, &b)| a && b).collect()
}

struct Johnson<'a> {
    dmdp: &'a Dmdp,
    start: StateId,
    component: &'a [bool],
    blocked: Vec<bool>,
    block_map: Vec<BTreeSet<usize>>,
    path: Vec<EdgeId>,
    found: &'a mut Vec<Vec<EdgeId>>,
    cap: usize,
}

impl Johnson<'_> {
    fn circuit(&mut self, v: StateId) -> Result<bool> {
        let mut closed = false;
        self.blocked[v.0] = true;
        for e in self.dmdp.out_edges(v) {
            let w = self.dmdp.next_state(e);
            if !self.component[w.0] {
                continue;
            }
            self.path.push(e);
            if w == self.start {
                if self.found.len() >= self.cap {
                    return Err(Error::TooManyCycles { cap: self.cap });
                }
                self.found.push(self.path.clone());
                closed = true;
            } else if !self.blocked[w.0] && self.circuit(w)? {
                closed = true;
            }
            self.path.pop();
        }
        if closed {
            self.unblock(v.0);
        } else {
            for e in self.dmdp.out_edges(v) {
                let w = self.dmdp.next_state(e).0;
                if self.component[w] {
                    self.block_map[w].insert(v.0);
                }
            }
        }
        Ok(closed)
    }

    fn unblock(&mut self, u: usize) {
        let mut pending = vec![u];
        while let Some(x) = pending.pop() {
            if !self.blocked[x] {
                continue;
            }
            self.blocked[x] = false;
            pending.extend(std::mem::take(&mut self.block_map[x]));
        }
    }
}

/// Maximum-gain cycle and its gain; ties go to the first cycle in canonical
/// order.
pub fn optimal_cycle(cycles: &[SimpleCycle]) -> Result<(SimpleCycle, f64)> {
    let mut sorted: Vec<&SimpleCycle> = cycles.iter().collect();
    sorted.sort();
    let mut best: Option<&SimpleCycle> = None;
    for c in sorted {
        if best.is_none_or(|b| c.gain() > b.gain()) {
            best = Some(c);
        }
    }
    best.map(|c| (c.clone(), c.gain())).ok_or(Error::NoCycles)
}

/// True iff no state-action pair belongs to two distinct cycles.
pub fn are_disjoint(cycles: &[SimpleCycle]) -> bool {
    shared_edge(cycles).is_none()
}

/// First edge (in edge order) found on two distinct cycles.
pub fn shared_edge(cycles: &[SimpleCycle]) -> Option<EdgeId> {
    let mut owner: BTreeMap<EdgeId, &SimpleCycle> = BTreeMap::new();
    let mut shared: Option<EdgeId> = None;
    for c in cycles {
        for &e in c.edges() {
            match owner.get(&e) {
                Some(&o) if o != c => shared = Some(shared.map_or(e, |s| s.min(e))),
                Some(_) => {}
                None => {
                    owner.insert(e, c);
                }
            }
        }
    }
    shared
}

/// Cycle multiplicities and leftover simple path of a walk.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WalkDecomposition {
    pub cycle_counts: BTreeMap<SimpleCycle, usize>,
    pub residual_path: Vec<EdgeId>,
}

impl WalkDecomposition {
    pub fn total_cycles(&self) -> usize {
        self.cycle_counts.values().sum()
    }
}

/// Peels simple cycles off `walk` left to right: as soon as the walk returns
/// to a state already on the current open path, the enclosed cycle is cut
/// out and counted.
pub fn decompose_walk(dmdp: &Dmdp, walk: &[EdgeId]) -> Result<WalkDecomposition> {
    for (i, &e) in walk.iter().enumerate() {
        if e.0 >= dmdp.num_edges() {
            return Err(Error::BrokenWalk { index: i });
        }
        if i > 0 && dmdp.next_state(walk[i - 1]) != dmdp.edge(e).state {
            return Err(Error::BrokenWalk { index: i });
        }
    }
    let mut out = WalkDecomposition::default();
    let Some(&first) = walk.first() else {
        return Ok(out);
    };
    // position of each state on the open path's state sequence
    let mut position = vec![usize::MAX; dmdp.num_states()];
    let mut visited = vec![dmdp.edge(first).state];
    position[visited[0].0] = 0;
    let mut path: Vec<EdgeId> = Vec::new();
    for &e in walk {
        path.push(e);
        let t = dmdp.next_state(e);
        let j = position[t.0];
        if j != usize::MAX {
            let cycle_edges = path.split_off(j);
            for s in visited.drain(j + 1..) {
                position[s.0] = usize::MAX;
            }
            let cycle = SimpleCycle::from_closed_path(dmdp, cycle_edges);
            *out.cycle_counts.entry(cycle).or_insert(0) += 1;
        } else {
            position[t.0] = visited.len();
            visited.push(t);
        }
    }
    out.residual_path = path;
    Ok(out)
}
