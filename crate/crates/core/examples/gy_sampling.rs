// Samples random histories to test the sandwich `r(M(φ)) ≤ f(φ) ≤
// r(−M(−φ))`, for Wright's equation and for a functional that breaks it.

use std::error::Error;

use dde_stability::criterion::verify_gy_functional;
use dde_stability::{Model, RationalBound};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let bound = RationalBound::new(-1.5, 0.5)?;
    let wright = Model::make_wright(1.5)?;
    let report = verify_gy_functional(&wright, &bound, 2000, 1)?;
    println!(
        "Wright: lower {:?}, upper {:?} ({} skipped)",
        report.lower.outcome, report.upper.outcome, report.upper.skipped
    );

    let a = bound.a();
    let broken = Model::custom("2a M(φ)", 1.0, f64::NEG_INFINITY, move |_, h| Ok(2.0 * a * h.max_all().max(0.0)));
    let report = verify_gy_functional(&broken, &bound, 2000, 1)?;
    if let Some(w) = report.lower.witnesses.first() {
        println!(
            "2a M(φ): violated at t = {:.3}, M = {:.4}: r(M) = {:.6} > f = {:.6}",
            w.t.unwrap_or(f64::NAN),
            w.x,
            w.lhs,
            w.rhs
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
