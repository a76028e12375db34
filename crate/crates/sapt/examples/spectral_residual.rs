// How well the electronic ground state of H is an eigenvector of the
// effective hamiltonian after the almost-unitary rotation.

use sapt::grid::{spectral_residual_experiment, ExperimentConfig, ExperimentReport};
use sapt::matrix::Scaling;

pub fn run_example() -> Result<ExperimentReport, Box<dyn std::error::Error>> {
    let mut cfg = ExperimentConfig::new(Scaling::Sr, 2);
    cfg.grid.n = 64;
    cfg.grid.length = 16.0;
    cfg.c_list = vec![4.0, 8.0, 16.0];
    Ok(spectral_residual_experiment(&cfg)?)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rep = run_example()?;
    print!("{}", rep.to_csv());
    println!("residual ~ c^-{:.3}", rep.slope.unwrap_or(f64::NAN));
    Ok(())
}
