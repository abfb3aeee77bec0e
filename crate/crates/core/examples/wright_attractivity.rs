// Wright's equation at the edge of the stability region: the verdict, and
// a simulation from a random history settling at zero.

use std::error::Error;

use dde_stability::criterion::assess;
use dde_stability::integrator::{integrate, tail_metrics, Prehistory};
use dde_stability::Model;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let model = Model::make_wright(1.5)?;
    println!("{}", assess(&model)?.to_json());

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let history = Prehistory::random(model.span, 8, -0.9, 3.0, &mut rng);
    let traj = integrate(&model, &history, 400.0, 0.01)?;
    let tail = tail_metrics(&traj, model.equilibrium, 0.1)?;
    println!(
        "t in [{}, {}]: sup |x| = {:.3e}",
        tail.t_start, tail.t_end, tail.sup_dev
    );
    for (t, x) in traj.resample(9) {
        println!("x({t:>5.1}) = {x:+.6}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
