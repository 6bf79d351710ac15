//! The cheapest reward change (in KL) that lifts a cycle to a target gain.

use dmdp_regret::bound::{inner_confusing, inner_confusing_lagrangian};
use dmdp_regret::cycles::enumerate_simple_cycles;
use dmdp_regret::generate;
use dmdp_regret::reward::FamilySpec;

fn main() -> Result<(), dmdp_regret::Error> {
    for family in [
        FamilySpec::Bernoulli,
        FamilySpec::Gaussian { variance: 0.25 },
    ] {
        let dmdp = generate::line_search(&[(0.2, 0.4)], family)?;
        let cycle = &enumerate_simple_cycles(&dmdp)?[0];
        let target = 0.5;
        let r = inner_confusing(&dmdp, cycle, target)?;
        println!(
            "{family:?}: means [0.2, 0.4] -> {:.6?}, KL {:.6}",
            r.means, r.kl_cost
        );
        // the generic slope solver agrees with the specialized path
        let g = inner_confusing_lagrangian(&dmdp, cycle, target)?;
        println!("  lagrangian KL {:.6}", g.kl_cost);
    }
    Ok(())
}
