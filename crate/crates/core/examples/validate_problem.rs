//! Draft validation and the communicating check.

use dmdp_regret::dmdp::{is_communicating, DmdpDraft};
use dmdp_regret::reward::RewardModel;

fn main() {
    let broken = DmdpDraft::new(["s1", "s2"])
        .edge("s1", "a1", "s3", RewardModel::bernoulli(0.4))
        .edge("s2", "a1", "s1", RewardModel::bernoulli(1.0));
    for v in broken.validate() {
        println!("violation: {v}");
    }

    let split = DmdpDraft::new(["s1", "s2"])
        .edge("s1", "a1", "s1", RewardModel::bernoulli(0.4))
        .edge("s1", "a2", "s2", RewardModel::bernoulli(0.4))
        .edge("s2", "a1", "s2", RewardModel::bernoulli(0.6))
        .build()
        .expect("structurally valid");
    println!("communicating: {}", is_communicating(&split));
    if let Some((from, to)) = split.unreachable_pair() {
        println!(
            "{} cannot reach {}",
            split.state_name(from),
            split.state_name(to)
        );
    }
}
