//! Perturbed block sequences: layout, text form, average splitting and the
//! perturbation criterion.
use std::collections::HashMap;

use ergolab::blockseq::{
    decompose_average, generate_sizes, perturbation_criterion, proposition_conditions, reinhold_ratio,
    PerturbedBlockSequence,
};
use ergolab::numerics::MonotoneFunction;
use ergolab::orlicz::OrliczFunction;
use ergolab::rotation::{CirclePoint, RotationSystem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seq: PerturbedBlockSequence = "B:1,5; D:{8,11}; B:12,20; D:{40}".parse()?;
    println!("{seq}  ({} elements)", seq.total_len());

    let sys = RotationSystem::golden();
    let f = MonotoneFunction::power(0.5);
    let dec = decompose_average(&seq, &sys, &f, CirclePoint::from_f64(0.3), 40)?;
    println!(
        "A_40 = {:.6} = {:.3}*{:.6} + {:.3}*{:.6}",
        dec.a_total, dec.w_b, dec.a_b, dec.w_d, dec.a_d
    );

    let k = 30;
    let phi2 = OrliczFunction::power(2.0)?;
    for (l_expr, d_expr) in [("2^k", "2"), ("k", "k"), ("4^k", "floor(sqrt(l_k))")] {
        let (l, d) = generate_sizes(l_expr, d_expr, k, &HashMap::new())?;
        let crit = perturbation_criterion(&phi2, &l, &d, k)?;
        let rein = reinhold_ratio(&l, &d, k, 1.0)?;
        println!(
            "l={l_expr:<6} d={d_expr:<18} criterion {:<12} sum {:>10.4e}  reinhold bounded={} ->0={}",
            crit.classification.to_string(),
            crit.total(),
            rein.bounded,
            rein.limit_zero
        );
    }

    let (l, d) = generate_sizes("3^k", "k", 20, &HashMap::new())?;
    let prop = proposition_conditions(&OrliczFunction::llog(2.0)?, &l, &d, 1.0, 20)?;
    println!(
        "growth condition holds: {}; sums: {} and {}",
        prop.cond_growth, prop.sum1.classification, prop.sum2.classification
    );
    Ok(())
}
