//! Staged construction of a perturbed block sequence along which the
//! averages of g_s stay large on arcs sweeping the circle.
use ergolab::divergence::{
    construct_divergent_sequence, divergence_precondition_check, schedule_from_example, ConstructionOptions,
    GsFunction,
};
use ergolab::rotation::RotationSystem;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k_max: usize = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(18);
    let gs = GsFunction::new(0.5)?;
    println!("g_0.5 is decreasing on (0, {:.4e}]; mass below 0.01 = {:.6}", gs.eps_s, gs.mass_below(0.01));
    let f = gs.to_monotone();
    let sched = schedule_from_example(0.5, k_max, &f, 1e-8)?;
    let pre = divergence_precondition_check(&sched, k_max);
    println!("sum of a_k up to {k_max}: {:.4} (a_k >= 1/(k ln k): {})", pre.sum_a, pre.comparison_holds);

    let sys = RotationSystem::golden();
    let (seq, reports) = construct_divergent_sequence(&sys, &f, &sched, k_max, &ConstructionOptions::default())?;
    println!("{:>3} {:>9} {:>7} {:>10} {:>10} {:>7}", "k", "l_k", "d_k", "lhs min", "rhs", "passed");
    for r in &reports {
        println!(
            "{:>3} {:>9} {:>7} {:>10.5} {:>10.5} {:>7}",
            r.k, r.l_k, r.d_k, r.lower_bound_lhs, r.lower_bound_rhs, r.passed
        );
    }
    println!("{} elements, largest {}", seq.total_len(), seq.max_element().unwrap_or(0));
    Ok(())
}
