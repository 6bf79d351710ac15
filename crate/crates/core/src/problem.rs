//! JSON problem files.
//!
//! ```json
//! {
//!   "states": ["s1", "s2"],
//!   "actions": {
//!     "s1": { "a1": { "next": "s2", "reward": { "family": "bernoulli", "mean": 0.4 } } },
//!     "s2": { "a2": { "next": "s1", "reward": { "family": "gaussian", "mean": 0.1, "variance": 1.0 } } }
//!   },
//!   "initial_state": "s1",
//!   "reward_structure": "state"
//! }
//! ```
//!
//! `initial_state` and `reward_structure` (`"edge"`, the default, or
//! `"state"`) are optional. Unknown keys are rejected at every level.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dmdp::{Dmdp, DmdpDraft, RewardSharing};
use crate::error::{Error, Result};
use crate::reward::{Family, RewardModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardStructure {
    #[default]
    Edge,
    State,
}

impl RewardStructure {
    fn is_default(&self) -> bool {
        *self == RewardStructure::Edge
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardSpec {
    pub family: Family,
    pub mean: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    pub next: String,
    pub reward: RewardSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub states: Vec<String>,
    pub actions: BTreeMap<String, BTreeMap<String, ActionSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<String>,
    #[serde(default, skip_serializing_if = "RewardStructure::is_default")]
    pub reward_structure: RewardStructure,
}

impl RewardSpec {
    fn to_model(&self, state: &str, action: &str) -> Result<RewardModel> {
        match (self.family, self.variance) {
            (Family::Bernoulli, None) => Ok(RewardModel::bernoulli(self.mean)),
            (Family::GaussianFixedVariance, Some(v)) => Ok(RewardModel::gaussian(self.mean, v)),
            (Family::Bernoulli, Some(_)) => Err(Error::Parse(format!(
                "edge ({state}, {action}): bernoulli rewards take no variance"
            ))),
            (Family::GaussianFixedVariance, None) => Err(Error::Parse(format!(
                "edge ({state}, {action}): gaussian rewards need a variance"
            ))),
        }
    }

    fn from_model(m: &RewardModel) -> RewardSpec {
        RewardSpec {
            family: m.family(),
            mean: m.mean(),
            variance: m.variance(),
        }
    }
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<ProblemFile> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ProblemFile> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("problem file serializes");
        s.push('\n');
        s
    }

    /// Raw draft, not yet validated.
    pub fn to_draft(&self) -> Result<DmdpDraft> {
        let sharing = match self.reward_structure {
            RewardStructure::Edge => RewardSharing::PerEdge,
            RewardStructure::State => RewardSharing::PerState,
        };
        let mut draft = DmdpDraft::new(self.states.iter().cloned()).with_sharing(sharing);
        for (state, acts) in &self.actions {
            // a state listed with an empty action map still gets an entry
            draft.actions.entry(state.clone()).or_default();
            for (action, spec) in acts {
                let model = spec.reward.to_model(state, action)?;
                draft = draft.edge(state, action, &spec.next, model);
            }
        }
        Ok(draft)
    }

    pub fn from_dmdp(dmdp: &Dmdp, initial_state: Option<String>) -> ProblemFile {
        let mut actions: BTreeMap<String, BTreeMap<String, ActionSpec>> = BTreeMap::new();
        for e in dmdp.edge_ids() {
            let info = dmdp.edge(e);
            actions
                .entry(dmdp.state_name(info.state).to_string())
                .or_default()
                .insert(
                    info.action.clone(),
                    ActionSpec {
                        next: dmdp.state_name(info.next).to_string(),
                        reward: RewardSpec::from_model(&info.reward),
                    },
                );
        }
        ProblemFile {
            states: dmdp
                .states()
                .map(|s| dmdp.state_name(s).to_string())
                .collect(),
            actions,
            initial_state,
            reward_structure: match dmdp.reward_sharing() {
                RewardSharing::PerEdge => RewardStructure::Edge,
                RewardSharing::PerState => RewardStructure::State,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmdp::Violation;
    use crate::generate;
    use crate::reward::FamilySpec;

    #[test]
    fn parses_documented_example() {
        let text = r#"{
          "states": ["s1", "s2"],
          "actions": {
            "s1": { "a1": { "next": "s2", "reward": { "family": "bernoulli", "mean": 0.4 } } },
            "s2": { "a2": { "next": "s1", "reward": { "family": "gaussian", "mean": 0.1, "variance": 1.0 } } }
          },
          "initial_state": "s1"
        }"#;
        let p = ProblemFile::from_json(text).unwrap();
        assert_eq!(p.initial_state.as_deref(), Some("s1"));
        let d = p.to_draft().unwrap().build().unwrap();
        assert_eq!(d.num_edges(), 2);
        assert_eq!(
            d.edge(d.find_edge("s2", "a2").unwrap()).reward,
            RewardModel::gaussian(0.1, 1.0)
        );
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad_top = r#"{"states": [], "actions": {}, "horizon": 3}"#;
        assert!(matches!(
            ProblemFile::from_json(bad_top),
            Err(Error::Parse(_))
        ));
        let bad_reward = r#"{"states": ["s"], "actions": {"s": {"a": {"next": "s",
            "reward": {"family": "bernoulli", "mena": 0.3}}}}}"#;
        assert!(matches!(
            ProblemFile::from_json(bad_reward),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn full_precision_means() {
        let text = r#"{"states": ["s"], "actions": {"s": {"a": {"next": "s",
            "reward": {"family": "bernoulli", "mean": 0.30000000000000004}}}}}"#;
        let p = ProblemFile::from_json(text).unwrap();
        assert_eq!(p.actions["s"]["a"].reward.mean, 0.1 + 0.2);
    }

    #[test]
    fn dangling_transition_surfaces_as_violation() {
        let text = r#"{"states": ["s"], "actions": {"s": {"a": {"next": "t",
            "reward": {"family": "bernoulli", "mean": 0.3}}}}}"#;
        let draft = ProblemFile::from_json(text).unwrap().to_draft().unwrap();
        assert_eq!(
            draft.validate(),
            vec![Violation::DanglingTransition {
                state: "s".into(),
                action: "a".into(),
                target: "t".into()
            }]
        );
    }

    #[test]
    fn variance_presence_checked() {
        let text = r#"{"states": ["s"], "actions": {"s": {"a": {"next": "s",
            "reward": {"family": "gaussian", "mean": 0.3}}}}}"#;
        assert!(ProblemFile::from_json(text).unwrap().to_draft().is_err());
    }

    #[test]
    fn generated_instances_round_trip() {
        let d = generate::state_rewards(&[0.9, 0.8, 0.5], FamilySpec::Bernoulli).unwrap();
        let text = ProblemFile::from_dmdp(&d, None).to_json();
        assert!(text.contains("\"reward_structure\": \"state\""));
        let back = ProblemFile::from_json(&text)
            .unwrap()
            .to_draft()
            .unwrap()
            .build()
            .unwrap();
        assert_eq!(back, d);

        let d =
            generate::line_search(&[(0.1, 0.2)], FamilySpec::Gaussian { variance: 0.5 }).unwrap();
        let text = ProblemFile::from_dmdp(&d, Some("s2".into())).to_json();
        let p = ProblemFile::from_json(&text).unwrap();
        assert_eq!(p.initial_state.as_deref(), Some("s2"));
        assert_eq!(p.to_draft().unwrap().build().unwrap(), d);
    }
}
