//! Level sets of the maximal average, the weak bound and the disjoint
//! decomposition.
use ergolab::levelset::{compute_level_set, decompose_level_set, m_lambda, weak_bound_from};
use ergolab::numerics::MonotoneFunction;
use ergolab::rotation::RotationSystem;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sys = RotationSystem::golden();
    let f = MonotoneFunction::power(0.5);
    let grid = 100_000;
    println!("{:>4} {:>6} {:>10} {:>10} {:>6} {:>10}", "N", "lambda", "|B|", "M", "arcs", "symdiff");
    for n in [1u64, 5, 50] {
        let seq: Vec<u64> = (1..=n).collect();
        for lambda in [1.5, 3.0, 10.0] {
            let level = compute_level_set(&sys, &f, &seq, lambda, grid)?;
            let bound = weak_bound_from(&level, m_lambda(&f, lambda, 1e-10)?);
            assert!(bound.holds);
            let dec = decompose_level_set(&sys, &f, &seq, lambda, grid)?;
            println!(
                "{:>4} {:>6} {:>10.6} {:>10.6} {:>6} {:>10.2e}",
                n,
                lambda,
                level.outer_measure,
                bound.m,
                level.arcs.len(),
                dec.symdiff_vs_levelset
            );
        }
    }
    Ok(())
}
