// A small convergence map for Wright's equation across the 3/2 frontier.

use std::error::Error;
use std::io;

use dde_stability::cli::SweepSpec;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let spec = SweepSpec::from_json(
        r#"{
            "model_family": "wright",
            "axis1": {"param": "p", "range": [0.5, 1.7], "steps": 4},
            "trials_per_cell": 3,
            "seed": 7,
            "t_end": 200
        }"#,
    )?;
    let rows = spec.run();
    spec.write_csv(&rows, io::stdout().lock())?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
