// Op^{A+ε∇χ}(σ) = e^{iχ/c} Op^A(σ) e^{−iχ/c} for a gauge-invariant symbol.

use sapt::grid::{gauge_covariance_check, generic_chi, Geometry, GridSpec, NumericSymbol, Preset, Trig};
use sapt::matrix::{MatrixSymbol, Scaling};

pub struct Summary {
    pub generic: f64,
    pub constant: f64,
}

pub fn run_example() -> Result<Summary, Box<dyn std::error::Error>> {
    let spec = GridSpec { n: 64, ..GridSpec::with_preset(Preset::Generic) };
    let geo = Geometry::new(&spec, Scaling::Sr, 4.0)?;
    let sym = NumericSymbol::new(MatrixSymbol::h0_sr());
    let generic = gauge_covariance_check(&geo, &generic_chi(7), &sym)?.relative;
    let constant = gauge_covariance_check(&geo, &Trig::constant(1.5), &sym)?.relative;
    Ok(Summary { generic, constant })
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = run_example()?;
    println!("relative deviation, random χ:   {:.2e}", s.generic);
    println!("relative deviation, constant χ: {:.2e}", s.constant);
    Ok(())
}
