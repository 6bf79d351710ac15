//! Expected regret of the cycle-arm learners against C log T on a
//! three-segment line search. Takes about a minute in release mode.

use std::time::Instant;

use dmdp_regret::bound::solve_disjoint;
use dmdp_regret::generate;
use dmdp_regret::reward::FamilySpec;
use dmdp_regret::sim::{simulate_table, PolicyKind};

fn main() -> Result<(), dmdp_regret::Error> {
    let dmdp = generate::line_search(&[(0.5, 0.5), (0.7, 0.7), (0.5, 0.5)], FamilySpec::Bernoulli)?;
    let c = solve_disjoint(&dmdp)?.constant;
    println!("C = {c:.6}");
    let horizons = [1_000, 10_000, 100_000, 1_000_000];
    let seeds: Vec<u64> = (0..20).collect();
    for kind in [PolicyKind::KlUcb, PolicyKind::Greedy, PolicyKind::Oracle] {
        let t0 = Instant::now();
        let table = simulate_table(&dmdp, kind, &horizons, &seeds, None, Some(c))?;
        for a in &table.aggregates {
            println!(
                "{kind:<7} T = {:>7}  regret {:>10.2} +- {:<9.2} ratio {:.3}",
                a.horizon,
                a.mean_regret,
                a.std_regret,
                a.mean_ratio.unwrap_or(f64::NAN)
            );
        }
        if table.suspicious() {
            println!("{kind}: below the bound, check the run");
        }
        println!("{kind}: {:.1?}", t0.elapsed());
    }
    Ok(())
}
