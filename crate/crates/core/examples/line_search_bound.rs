//! Closed-form line-search bound next to the general disjoint-cycle solver.

use dmdp_regret::bound::{line_search_bound, solve_disjoint};
use dmdp_regret::generate;
use dmdp_regret::reward::FamilySpec;

fn main() -> Result<(), dmdp_regret::Error> {
    let segments = [(0.3, 0.5), (0.6, 0.8), (0.4, 0.4), (0.1, 0.9)];
    for family in [
        FamilySpec::Bernoulli,
        FamilySpec::Gaussian { variance: 1.0 },
    ] {
        let closed = line_search_bound(&segments, family)?;
        let dmdp = generate::line_search(&segments, family)?;
        let sol = solve_disjoint(&dmdp)?;
        println!(
            "{family:?}: closed form {closed:.9}, solver {:.9}",
            sol.constant
        );
        for cb in &sol.per_cycle {
            println!(
                "  {:<12} I = {:.5}  eta = {:.3}  contribution {:.4}",
                cb.cycle.label(&dmdp),
                cb.information_number,
                cb.rate,
                cb.contribution
            );
        }
    }
    Ok(())
}
