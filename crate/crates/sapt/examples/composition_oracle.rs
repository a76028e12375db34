// Op(f)Op(g) against the quantized truncated Moyal series.

use sapt::grid::{composition_oracle, ExperimentReport, GridSpec, Preset};
use sapt::matrix::{MatrixSymbol, Scaling};

pub fn run_example() -> Result<(ExperimentReport, ExperimentReport), Box<dyn std::error::Error>> {
    let f = MatrixSymbol::xi_alpha();
    let g = MatrixSymbol::xi_alpha();
    let c_list = [4.0, 8.0, 16.0];
    let magnetic = GridSpec { n: 64, ..GridSpec::with_preset(Preset::Magnetic) };
    let electric = GridSpec { n: 64, ..GridSpec::with_preset(Preset::Electric) };
    Ok((composition_oracle(&f, &g, 2, Scaling::Sr, &c_list, &magnetic)?, composition_oracle(&f, &g, 2, Scaling::Sr, &c_list, &electric)?))
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (mag, el) = run_example()?;
    print!("{}", mag.to_csv());
    println!("magnetic: error ~ c^-{:.3}", mag.slope.unwrap_or(f64::NAN));
    println!("no magnetic field: max error {:.2e}", el.max_error());
    Ok(())
}
