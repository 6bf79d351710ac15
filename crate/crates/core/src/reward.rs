//! One-parameter reward families and their Kullback-Leibler machinery.
//!
//! Every edge of a DMDP carries a reward distribution from a one-parameter
//! exponential family, parameterized by its mean. Two families are supported:
//! Bernoulli and Gaussian with a known (problem-wide) variance. Both admit a
//! closed-form divergence, a closed-form derivative with respect to the second
//! mean, and a closed-form inverse of that derivative, which is what the
//! Lagrangian solvers in [`crate::bound`] need.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::DomainError;

/// Distribution family of an edge reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Bernoulli,
    #[serde(rename = "gaussian")]
    GaussianFixedVariance,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Bernoulli => f.write_str("bernoulli"),
            Family::GaussianFixedVariance => f.write_str("gaussian"),
        }
    }
}

/// Family selector used by the instance generators and closed-form bounds,
/// carrying the shared variance for the Gaussian case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilySpec {
    Bernoulli,
    Gaussian { variance: f64 },
}

impl FamilySpec {
    pub fn model(&self, mean: f64) -> RewardModel {
        match *self {
            FamilySpec::Bernoulli => RewardModel::bernoulli(mean),
            FamilySpec::Gaussian { variance } => RewardModel::gaussian(mean, variance),
        }
    }
}

/// Reward distribution of a single edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RewardModel {
    Bernoulli { mean: f64 },
    Gaussian { mean: f64, variance: f64 },
}

impl RewardModel {
    pub fn bernoulli(mean: f64) -> Self {
        RewardModel::Bernoulli { mean }
    }

    pub fn gaussian(mean: f64, variance: f64) -> Self {
        RewardModel::Gaussian { mean, variance }
    }

    pub fn family(&self) -> Family {
        match self {
            RewardModel::Bernoulli { .. } => Family::Bernoulli,
            RewardModel::Gaussian { .. } => Family::GaussianFixedVariance,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            RewardModel::Bernoulli { mean } | RewardModel::Gaussian { mean, .. } => mean,
        }
    }

    pub fn variance(&self) -> Option<f64> {
        match *self {
            RewardModel::Bernoulli { .. } => None,
            RewardModel::Gaussian { variance, .. } => Some(variance),
        }
    }

    /// Same family and variance, different mean.
    pub fn with_mean(&self, mean: f64) -> Self {
        match *self {
            RewardModel::Bernoulli { .. } => RewardModel::Bernoulli { mean },
            RewardModel::Gaussian { variance, .. } => RewardModel::Gaussian { mean, variance },
        }
    }

    /// Whether `q` lies in the open set of means the family admits.
    pub fn admits_mean(&self, q: f64) -> bool {
        match self {
            RewardModel::Bernoulli { .. } => q > 0.0 && q < 1.0,
            RewardModel::Gaussian { .. } => q.is_finite(),
        }
    }

    fn check_mean(&self, q: f64) -> Result<(), DomainError> {
        if self.admits_mean(q) {
            Ok(())
        } else {
            Err(DomainError::MeanOutOfDomain {
                family: self.family(),
                mean: q,
            })
        }
    }

    /// `KL(self || same family with mean q)`.
    pub fn kl(&self, q: f64) -> Result<f64, DomainError> {
        self.check_mean(q)?;
        Ok(match *self {
            RewardModel::Bernoulli { mean: p } => bernoulli_kl(p, q),
            RewardModel::Gaussian { mean: p, variance } => (p - q) * (p - q) / (2.0 * variance),
        })
    }

    /// Derivative of [`RewardModel::kl`] with respect to `q`.
    pub fn kl_mean_derivative(&self, q: f64) -> Result<f64, DomainError> {
        self.check_mean(q)?;
        Ok(match *self {
            RewardModel::Bernoulli { mean: p } => (q - p) / (q * (1.0 - q)),
            RewardModel::Gaussian { mean: p, variance } => (q - p) / variance,
        })
    }

    /// The unique admissible `q` with `kl_mean_derivative(q) == slope`.
    ///
    /// For Bernoulli this is the root in `(0, 1)` of
    /// `slope * q^2 + (1 - slope) * q - p = 0`, evaluated in whichever of the
    /// two algebraically equal forms avoids cancellation.
    pub fn mean_for_slope(&self, slope: f64) -> f64 {
        match *self {
            RewardModel::Bernoulli { mean: p } => {
                if slope == 0.0 {
                    return p;
                }
                let b = 1.0 - slope;
                let disc = (b * b + 4.0 * slope * p).max(0.0).sqrt();
                let q = if b >= 0.0 {
                    2.0 * p / (b + disc)
                } else {
                    (disc - b) / (2.0 * slope)
                };
                q.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
            }
            RewardModel::Gaussian { mean: p, variance } => p + variance * slope,
        }
    }
}

impl fmt::Display for RewardModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RewardModel::Bernoulli { mean } => write!(f, "Bernoulli({mean})"),
            RewardModel::Gaussian { mean, variance } => write!(f, "Gaussian({mean}, {variance})"),
        }
    }
}

/// Bernoulli divergence with the `0 ln 0 = 0` convention; `p` may sit on the
/// boundary, `q` is assumed interior.
///
/// Written as `p h(d/p) + (1-p) h(-d/(1-p))` with `d = q - p` and
/// `h(x) = x - ln(1 + x) >= 0`: the two terms never cancel, so the result
/// keeps full relative precision when `q` is close to `p`.
pub(crate) fn bernoulli_kl(p: f64, q: f64) -> f64 {
    if p <= 0.0 {
        return -(-q).ln_1p();
    }
    if p >= 1.0 {
        return -q.ln();
    }
    let d = q - p;
    p * x_minus_ln1p(d / p) + (1.0 - p) * x_minus_ln1p(-d / (1.0 - p))
}

/// `x - ln(1 + x)` for `x > -1`, by its power series near zero.
fn x_minus_ln1p(x: f64) -> f64 {
    if x.abs() >= 0.25 {
        return x - x.ln_1p();
    }
    // sum_{k >= 2} (-1)^k x^k / k
    let mut term = x * x;
    let mut sum = 0.0;
    for k in 2..60 {
        let t = term / k as f64;
        sum += if k % 2 == 0 { t } else { -t };
        if t.abs() <= f64::EPSILON * 0.25 * sum.abs() {
            break;
        }
        term *= x;
    }
    sum
}

/// Free-function form of [`RewardModel::kl`].
pub fn kl(model: &RewardModel, mean_q: f64) -> Result<f64, DomainError> {
    model.kl(mean_q)
}

/// Free-function form of [`RewardModel::kl_mean_derivative`].
pub fn kl_mean_derivative(model: &RewardModel, mean_q: f64) -> Result<f64, DomainError> {
    model.kl_mean_derivative(mean_q)
}
