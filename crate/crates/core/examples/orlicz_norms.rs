//! Luxemburg norms and modulars for the three Orlicz families.
use ergolab::numerics::MonotoneFunction;
use ergolab::orlicz::{log_grid, luxemburg_norm, membership_integral, sawyer_growth_check, OrliczFunction};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let phis: Vec<OrliczFunction> = ["power:1", "power:2", "llog:1", "composite:1.5,2"]
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_, _>>()?;
    let fs = [MonotoneFunction::constant(2.0), MonotoneFunction::power(0.25), MonotoneFunction::one_minus_x()];
    println!("{:<16} {:<12} {:>12} {:>14}", "phi", "f", "norm", "int phi(f)");
    for phi in &phis {
        for f in &fs {
            let norm = luxemburg_norm(phi, f, 1e-8)?;
            let modular = membership_integral(phi, f, 1e-9)?;
            println!("{:<16} {:<12} {:>12.8} {:>14.8}", phi.to_string(), f.label(), norm, modular.value);
        }
    }

    // x^{-1/2} is in L^1 but not L^2
    match luxemburg_norm(&OrliczFunction::power(2.0)?, &MonotoneFunction::power(0.5), 1e-6) {
        Ok(n) => println!("unexpected finite norm {n}"),
        Err(e) => println!("power:2 norm of x^-1/2: {e}"),
    }

    let report = sawyer_growth_check(&OrliczFunction::llog(1.0)?, 4.0, 1.0, &log_grid(1.0, 1e6, 30));
    println!(
        "Sawyer growth for llog:1 with C=4, p=1: {} violations, max ratio {:.3}",
        report.violations.len(),
        report.max_ratio
    );
    Ok(())
}
