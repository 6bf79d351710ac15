//! When rewards depend only on the state entered, the bound reduces to a
//! bandit over the self-loops.

use dmdp_regret::bound::{solve_disjoint, state_dependent_bound};
use dmdp_regret::generate;
use dmdp_regret::reward::FamilySpec;

fn main() -> Result<(), dmdp_regret::Error> {
    let means = [0.9, 0.8, 0.5];
    let closed = state_dependent_bound(&means, FamilySpec::Bernoulli)?;
    let dmdp = generate::state_rewards(&means, FamilySpec::Bernoulli)?;
    let sol = solve_disjoint(&dmdp)?;
    println!("closed form {closed:.10}");
    println!("solver      {:.10}", sol.constant);
    for c in &sol.unconstrained {
        println!("never optimal under any model: {}", c.label(&dmdp));
    }
    Ok(())
}
