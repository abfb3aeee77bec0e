macro_rules! example {
    ($module:ident, $file:literal) => {
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }
    };
}

example!(bound_functions, "bound_functions.rs");
example!(schwarzian_envelope, "schwarzian_envelope.rs");
example!(wright_attractivity, "wright_attractivity.rs");
example!(logistic_variable_delay, "logistic_variable_delay.rs");
example!(food_limited_maxima, "food_limited_maxima.rs");
example!(mm_iteration, "mm_iteration.rs");
example!(parameter_sweep, "parameter_sweep.rs");
example!(gy_sampling, "gy_sampling.rs");
example!(cli_commands, "cli_commands.rs");

#[test]
fn examples_run() {
    bound_functions::run_example().unwrap();
    schwarzian_envelope::run_example().unwrap();
    wright_attractivity::run_example().unwrap();
    logistic_variable_delay::run_example().unwrap();
    food_limited_maxima::run_example().unwrap();
    mm_iteration::run_example().unwrap();
    parameter_sweep::run_example().unwrap();
    gy_sampling::run_example().unwrap();
    cli_commands::run_example().unwrap();
}
