// Upper and lower bounds on oscillation amplitude, iterated until they
// collapse.

use std::error::Error;

use dde_stability::criterion::mm_iteration;
use dde_stability::RationalBound;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    for (a, b, m0) in [(-1.0, 1.0, 10.0), (-1.4, 1.0, 0.4), (-1.2, 0.0, 1.0), (-1.5, 0.0, 1.0)] {
        let trace = mm_iteration(&RationalBound::new(a, b)?, m0, 10_000)?;
        println!(
            "a = {a}, b = {b}: {:?} map, {} steps, outcome {:?}, final M = {:.3e}",
            trace.map,
            trace.steps.len(),
            trace.outcome,
            trace.final_upper
        );
        for step in trace.steps.iter().take(3) {
            println!("  k = {}: M = {:.6}, m = {:.6}", step.k, step.upper, step.lower);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
