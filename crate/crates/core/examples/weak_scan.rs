//! Empirical constant in the weak Orlicz inequality for the maximal
//! operator over prefix averages.
use ergolab::levelset::weak_phi_inequality_scan;
use ergolab::numerics::MonotoneFunction;
use ergolab::orlicz::OrliczFunction;
use ergolab::rotation::RotationSystem;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sys = RotationSystem::golden();
    let family: Vec<Vec<u64>> = (1..=20u64).map(|n| (1..=n).collect()).collect();
    let lambdas: Vec<f64> = (0..8).map(|i| 1.5 * 2f64.powi(i)).collect();
    for (phi, f) in [
        ("power:1", MonotoneFunction::power(0.5)),
        ("llog:1", MonotoneFunction::power(0.5)),
        ("power:2", MonotoneFunction::power(0.25)),
    ] {
        let phi: OrliczFunction = phi.parse()?;
        let rep = weak_phi_inequality_scan(&sys, &f, &phi, &family, &lambdas, 20_000)?;
        println!("{phi} with {}: max empirical C = {:.4}", f.label(), rep.max_c);
    }
    Ok(())
}
