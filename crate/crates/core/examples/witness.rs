//! A finite subsequence whose averages stay above λ/2 on most of an arc.
use ergolab::levelset::{certify_witness, construct_witness, WitnessParams};
use ergolab::numerics::MonotoneFunction;
use ergolab::rotation::{CircleArc, RotationSystem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sys = RotationSystem::golden();
    let f = MonotoneFunction::power(0.5);
    for (arc, n_start) in [(CircleArc::full(), 1u64), (CircleArc::from_f64(0.2, 0.5), 1_000_000)] {
        let params = WitnessParams {
            delta: 0.05,
            n_start,
            ..WitnessParams::default()
        };
        let w = construct_witness(&sys, &f, 2.0, &arc, &params)?;
        let recheck = certify_witness(&sys, &f, &w.subsequence, &w.certified_arc, 2 * w.cells);
        let min2 = recheck.iter().copied().fold(f64::INFINITY, f64::min);
        println!(
            "arc |I|={:.2} n0={n_start}: {} times in [{}, {}], certified on {:.4} with min average {:.4} (recheck {:.4})",
            arc.measure(),
            w.subsequence.len(),
            w.subsequence[0],
            w.subsequence[w.subsequence.len() - 1],
            w.certified_measure,
            w.min_average_on_arc,
            min2
        );
    }
    Ok(())
}
