//! Which g_s lie in L log^p L, and the criterion series of the family.
use ergolab::divergence::{c_k, example_criterion_series, membership_exponent_classifier, s_k};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for k in [16usize, 100, 10_000] {
        println!("k={k:>6}: s_k={:.4} c_k={:.6} c_k*s_k={:.6}", s_k(0.5, k), c_k(0.5, k), c_k(0.5, k) * s_k(0.5, k));
    }
    println!("{:>4} {:>5} {:>12} {:>12} {:>10}", "s", "p", "membership", "series", "partial");
    for s in [0.5, 1.0, 2.0] {
        for p in [0.25, 1.0, 2.5] {
            let member = membership_exponent_classifier(s, p)?;
            let rep = example_criterion_series(s, p, 100_000)?;
            println!(
                "{s:>4} {p:>5} {:>12} {:>12} {:>10.4}",
                format!("{member:?}"),
                rep.classification.to_string(),
                rep.total()
            );
        }
    }
    Ok(())
}
