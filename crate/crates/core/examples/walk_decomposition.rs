use dmdp_regret::cycles::decompose_walk;
use dmdp_regret::generate;
use dmdp_regret::reward::FamilySpec;

fn main() -> Result<(), dmdp_regret::Error> {
    let dmdp = generate::line_search(&[(0.2, 0.4), (0.6, 0.6)], FamilySpec::Bernoulli)?;
    let e = |s: &str, a: &str| dmdp.find_edge(s, a).expect("edge exists");
    // s1 -> s2 -> s1 -> s2 -> s3 -> s2 -> s3
    let walk = [
        e("s1", "a1"),
        e("s2", "a2"),
        e("s1", "a1"),
        e("s2", "a1"),
        e("s3", "a2"),
        e("s2", "a1"),
    ];
    let dec = decompose_walk(&dmdp, &walk)?;
    for (cycle, n) in &dec.cycle_counts {
        println!("{n} x {}", cycle.label(&dmdp));
    }
    let rest: Vec<String> = dec
        .residual_path
        .iter()
        .map(|&x| dmdp.edge_label(x))
        .collect();
    println!("residual path: {}", rest.join(" "));
    Ok(())
}
