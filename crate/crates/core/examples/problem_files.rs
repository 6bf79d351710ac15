//! Problem files in and reports out.

use dmdp_regret::bound::solve_disjoint_cycles;
use dmdp_regret::cycles::enumerate_simple_cycles;
use dmdp_regret::problem::ProblemFile;
use dmdp_regret::report::{bound_report, cycles_report};

const PROBLEM: &str = r#"{
  "states": ["home", "left", "right"],
  "actions": {
    "home":  { "go_left":  { "next": "left",  "reward": { "family": "gaussian", "mean": 0.2, "variance": 1.0 } },
               "go_right": { "next": "right", "reward": { "family": "gaussian", "mean": 0.5, "variance": 1.0 } } },
    "left":  { "back":     { "next": "home",  "reward": { "family": "gaussian", "mean": 0.4, "variance": 1.0 } } },
    "right": { "back":     { "next": "home",  "reward": { "family": "gaussian", "mean": 0.9, "variance": 1.0 } } }
  }
}"#;

fn main() -> Result<(), dmdp_regret::Error> {
    let dmdp = ProblemFile::from_json(PROBLEM)?.to_draft()?.build()?;
    let cycles = enumerate_simple_cycles(&dmdp)?;
    print!("{}", cycles_report(&dmdp, &cycles).to_csv_string());
    println!();
    let sol = solve_disjoint_cycles(&dmdp, &cycles)?;
    print!("{}", bound_report(&sol, &cycles).to_csv_string());
    println!();
    // canonical form, as `dmdp generate` would write it
    print!(
        "{}",
        ProblemFile::from_dmdp(&dmdp, Some("home".into())).to_json()
    );
    Ok(())
}
