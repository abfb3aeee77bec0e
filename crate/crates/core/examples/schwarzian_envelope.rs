// Checks the smooth-map hypotheses for the Wright nonlinearity: negative
// Schwarzian, sign and monotonicity conditions, and the fitted Möbius
// envelope.

use std::error::Error;

use dde_stability::calculus::{check_a_conditions, check_envelope, fit_rational_bound, schwarz_derivative, EnvelopeFit};
use dde_stability::SmoothScalarMap;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let f = SmoothScalarMap::wright(1.2);
    for x in [-2.0, 0.0, 1.5] {
        println!("Sf({x}) = {:.9}", schwarz_derivative(&f, x)?);
    }

    for report in check_a_conditions(&f, (-5.0, 20.0), 1000)? {
        println!("{:?} holds: {} ({:?})", report.condition_id, report.holds, report.outcome);
    }

    let EnvelopeFit::Bound(bound) = fit_rational_bound(&f)? else {
        return Err("the Wright map should fit directly".into());
    };
    println!("envelope a = {}, b = {:.6}", bound.a(), bound.b());
    let report = check_envelope(&f, &bound, 20.0, 2000)?;
    println!("envelope holds: {} on {} points", report.holds, report.grid_size);

    let food = SmoothScalarMap::food_limited(2.0, 0.5);
    println!("food-limited Sf(0.3) = {:.6}", schwarz_derivative(&food, 0.3)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
