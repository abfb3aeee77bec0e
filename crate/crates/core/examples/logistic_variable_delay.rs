// Logistic growth with a periodic delay `h(t) = 0.75(1 + sin²t)`, in the
// original coordinate and after the logarithmic change of variables.

use std::error::Error;
use std::f64::consts::FRAC_PI_2;

use dde_stability::criterion::assess;
use dde_stability::integrator::{integrate, tail_metrics, Prehistory};
use dde_stability::models::{log_transform, CoefficientFn};
use dde_stability::Model;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let delay = CoefficientFn::Sinusoidal {
        mean: 1.125,
        amplitude: 0.375,
        omega: 2.0,
        phase: -FRAC_PI_2,
    };
    let model = Model::make_logistic_vd(1.0, delay, 1.5)?;
    let verdict = assess(&model)?;
    println!("{:?} via {:?}: {}", verdict.status, verdict.theorem, verdict.reason);

    let history = Prehistory::constant(model.span, 0.4);
    let traj = integrate(&model, &history, 300.0, 0.01)?;
    println!("sup |x - 1| on the tail: {:.3e}", tail_metrics(&traj, 1.0, 0.1)?.sup_dev);

    let canonical = log_transform(&model)?;
    let y_history = canonical.transform_prehistory(&history)?;
    let y = integrate(&canonical, &y_history, 20.0, 0.01)?;
    for s in [5.0, 10.0, 20.0] {
        let (t, x) = canonical.to_original(s, y.value_at(s)?)?;
        println!("s = {s}: x({t:.4}) = {x:.6}, direct {:.6}", traj.value_at(t)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
