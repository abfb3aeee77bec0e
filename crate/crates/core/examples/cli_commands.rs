// Drives the command-line front end in-process: a verdict, a short
// simulation and a bound table written to a temporary directory.

use std::error::Error;
use std::fs;
use std::io;

use dde_stability::cli::run_args;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = tempfile::tempdir()?;
    let config = dir.path().join("logistic.json");
    fs::write(&config, r#"{"family":"logistic","params":{"p":1.0,"h":1.5},"history":{"kind":"constant","value":0.5}}"#)?;
    let config = config.to_str().ok_or("non-UTF-8 path")?;
    let csv = dir.path().join("trajectory.csv");
    let table = dir.path().join("bounds.csv");

    let mut out = io::stdout().lock();
    let mut err = io::stderr().lock();
    let check = run_args(["dde-stability", "check", "--config", config], &mut out, &mut err);
    println!("check exit code {check}");
    let simulate = run_args(
        ["dde-stability", "simulate", "--config", config, "--t-end", "60", "--out", csv.to_str().unwrap()],
        &mut out,
        &mut err,
    );
    println!("simulate exit code {simulate}, {} CSV lines", fs::read_to_string(&csv)?.lines().count());
    let bounds = run_args(
        ["dde-stability", "bounds", "--a", "-1.5", "--b", "1", "--n", "5", "--out", table.to_str().unwrap()],
        &mut out,
        &mut err,
    );
    println!("bounds exit code {bounds}");
    print!("{}", fs::read_to_string(&table)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
