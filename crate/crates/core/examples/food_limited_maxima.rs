// The food-limited equation with a point delay and with a running maximum
// over the past, both converging to `k^(1/l)`.

use std::error::Error;

use dde_stability::criterion::{assess, decide_food_limited};
use dde_stability::integrator::{integrate, tail_metrics, Prehistory};
use dde_stability::models::{CoefficientFn, MaximaBase};
use dde_stability::Model;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let point = Model::make_food_limited(
        1.0,
        1.0,
        CoefficientFn::constant(1.0),
        CoefficientFn::constant(0.0),
        CoefficientFn::constant(1.5),
        1.5,
        None,
    )?;
    let maxima = Model::make_maxima_model(
        MaximaBase::FoodLimited {
            k: 1.0,
            l: 1.0,
            growth: CoefficientFn::constant(1.0),
            nu: CoefficientFn::constant(0.0),
        },
        1.5,
    )?;
    for model in [&point, &maxima] {
        let verdict = assess(model)?;
        let traj = integrate(model, &Prehistory::constant(model.span, 2.5), 300.0, 0.01)?;
        let tail = tail_metrics(&traj, model.equilibrium, 0.1)?;
        println!("{}: {:?}, tail deviation {:.3e}", model.family(), verdict.status, tail.sup_dev);
    }

    // At ν₀ = 1 the 3/2 threshold is strict.
    let edge = decide_food_limited(2.0, 1.0, 1.5)?;
    println!("l = 2, ν₀ = 1, Λ = 1.5: {:?} ({})", edge.status, edge.reason);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
