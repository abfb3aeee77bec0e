// Tabulates A, B, D and R for `r(x) = −1.5x/(1 + x)` and cross-checks the
// closed forms against quadrature.

use std::error::Error;
use std::io;

use dde_stability::{BoundTable, RationalBound};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let bound = RationalBound::new(-1.5, 1.0)?;
    let c = bound.derived_constants();
    println!(
        "A'(0) = {}, A''(0) = {:.6}, B'(0) = {}, nu = {:?}, x2 = {:?}",
        c.a_prime0, c.a_second0, c.b_prime0, c.nu, c.x2
    );

    for x in [-0.5, 0.25, 2.0] {
        let closed = bound.bound_a(x)?;
        let quad = bound.bound_a_quadrature(x)?;
        println!("A({x}) = {closed:.12} (quadrature {quad:.12})");
        assert!((closed - quad).abs() < 1e-9);
    }

    let table = BoundTable::build(bound, BoundTable::default_grid(&bound, 4.0, 9));
    table.write_csv(io::stdout().lock())?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
