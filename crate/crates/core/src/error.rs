use thiserror::Error;

use crate::dmdp::Violation;
use crate::reward::Family;

/// A mean outside the admissible open interval of its family.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("mean {mean} is outside the admissible domain of the {family} family")]
    MeanOutOfDomain { family: Family, mean: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Domain(#[from] DomainError),

    #[error("invalid DMDP: {}", join_violations(.0))]
    Invalid(Vec<Violation>),

    #[error("DMDP is not communicating: state `{to}` is unreachable from state `{from}`")]
    NotCommunicating { from: String, to: String },

    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("action `{action}` is not available at state `{state}`")]
    UnknownAction { state: String, action: String },

    #[error("cycle is empty")]
    EmptyCycle,

    #[error("no simple cycle exists")]
    NoCycles,

    #[error("more than {cap} simple cycles; raise the enumeration cap or simplify the instance")]
    TooManyCycles { cap: usize },

    #[error("walk is broken at index {index}: edge does not leave the state the walk is in")]
    BrokenWalk { index: usize },

    #[error(
        "cycles share state-action pair ({state}, {action}); only edge-disjoint cycles are supported, \
         the general non-disjoint lower bound is out of scope"
    )]
    NonDisjoint { state: String, action: String },

    #[error("optimal gain {gain} is attained by {count} cycles; the lower bound requires a unique optimum")]
    DegenerateOptimum { gain: f64, count: usize },

    #[error("cycle mixes reward families {0} and {1}")]
    MixedFamilies(Family, Family),

    #[error("target gain {target} is infeasible for a Bernoulli cycle (must lie strictly inside (0, 1))")]
    Infeasible { target: f64 },

    #[error("lower-bound constant is zero (no suboptimal cycle); the regret ratio is undefined, use the raw regret output")]
    ZeroConstant,

    #[error("policy returned an action unavailable at the current state at step {step}")]
    ContractViolation { step: u64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("malformed problem file: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
