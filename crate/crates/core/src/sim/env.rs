use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dmdp::{Dmdp, EdgeId, StateId};
use crate::error::{Error, Result};
use crate::reward::RewardModel;

/// 32-bit words reserved per step in an edge's stream.
const WORDS_PER_STEP: u128 = 64;

/// Counter-based reward source: the draw for `(seed, step, edge)` is read
/// from ChaCha stream `edge` at a word offset fixed by `step`, so it does not
/// depend on what was sampled before.
#[derive(Debug, Clone)]
pub struct RewardSampler {
    rng: ChaCha8Rng,
}

impl RewardSampler {
    pub fn new(seed: u64) -> Self {
        RewardSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn sample(&mut self, step: u64, edge: EdgeId, model: &RewardModel) -> f64 {
        self.rng.set_stream(edge.0 as u64);
        self.rng.set_word_pos(step as u128 * WORDS_PER_STEP);
        match *model {
            RewardModel::Bernoulli { mean } => {
                if self.rng.random::<f64>() < mean {
                    1.0
                } else {
                    0.0
                }
            }
            RewardModel::Gaussian { mean, variance } => {
                let z: f64 = self.rng.sample(StandardNormal);
                mean + variance.sqrt() * z
            }
        }
    }
}

/// A DMDP being played: current state, step counter and reward source.
#[derive(Debug, Clone)]
pub struct Environment<'a> {
    dmdp: &'a Dmdp,
    current: StateId,
    seed: u64,
    step: u64,
    sampler: RewardSampler,
}

impl<'a> Environment<'a> {
    pub fn new(dmdp: &'a Dmdp, start: StateId, seed: u64) -> Self {
        Environment {
            dmdp,
            current: start,
            seed,
            step: 0,
            sampler: RewardSampler::new(seed),
        }
    }

    pub fn dmdp(&self) -> &'a Dmdp {
        self.dmdp
    }

    pub fn current_state(&self) -> StateId {
        self.current
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Takes `edge` from the current state: samples its reward, moves to its
    /// deterministic successor and advances the step counter.
    pub fn step(&mut self, edge: EdgeId) -> Result<(f64, StateId)> {
        if edge.0 >= self.dmdp.num_edges() || self.dmdp.edge(edge).state != self.current {
            return Err(Error::ContractViolation { step: self.step });
        }
        let info = self.dmdp.edge(edge);
        let reward = self.sampler.sample(self.step, edge, &info.reward);
        self.current = info.next;
        self.step += 1;
        Ok((reward, self.current))
    }
}
