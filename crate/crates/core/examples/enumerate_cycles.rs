//! Simple cycles of a four-state ring with self-loops, and the best one.

use dmdp_regret::cycles::{are_disjoint, enumerate_simple_cycles, optimal_cycle};
use dmdp_regret::generate;
use dmdp_regret::reward::FamilySpec;

fn main() -> Result<(), dmdp_regret::Error> {
    let dmdp = generate::state_rewards(&[0.9, 0.8, 0.5, 0.3], FamilySpec::Bernoulli)?;
    let cycles = enumerate_simple_cycles(&dmdp)?;
    for (i, c) in cycles.iter().enumerate() {
        println!(
            "{:>2}  len {}  gain {:.3}  {}",
            i + 1,
            c.len(),
            c.gain(),
            c.label(&dmdp)
        );
    }
    let (best, gain) = optimal_cycle(&cycles)?;
    println!("optimal: {} (gain {gain})", best.label(&dmdp));
    println!("edge-disjoint: {}", are_disjoint(&cycles));
    Ok(())
}
