//! Exact orbits of an irrational rotation on the 128-bit circle.
use ergolab::numerics::MonotoneFunction;
use ergolab::rotation::{CircleArc, CirclePoint, RotationSystem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sys = RotationSystem::parse("golden")?;
    let x = CirclePoint::from_decimal("0.1")?;
    println!("alpha = {}", sys.alpha().to_decimal());

    // T^m T^n x = T^{m+n} x, bit for bit
    let (m, n) = (123_456_789u64, 987_654_321u64);
    assert_eq!(sys.orbit_point(sys.orbit_point(x, m), n), sys.orbit_point(x, m + n));
    println!("T^(10^9) x = {}", sys.orbit_point(x, 1_000_000_000).to_decimal());

    let arc = CircleArc::from_f64(0.25, 0.1);
    let hit = sys.first_entry_time(x, &arc, 1, 1000);
    println!("first entry into [0.25, 0.35): {hit:?}");
    println!("visit fraction over 10^5 steps: {:.5}", sys.interval_visit_fraction(x, &arc, 100_000));

    let seq: Vec<u64> = (1..=100_000).collect();
    let avg = sys.ergodic_average(&MonotoneFunction::identity(), &seq, x);
    println!("Birkhoff average of x over 10^5 steps: {avg:.6}");
    Ok(())
}
