// Magnetic Weyl quantization of matrix symbols on a periodic grid.

use sapt::grid::{quantize, Geometry, GridSpec, NumericSymbol, Preset};
use sapt::matrix::{MatrixSymbol, Scaling};
use sapt::scalar::{rat, ScalarExpr};

pub struct Summary {
    pub hermiticity_defect: f64,
    /// ‖Op(σ)† − Op(σ†)‖ for a non-Hermitian symbol
    pub adjoint_defect: f64,
    pub lowest_eigenvalues: Vec<f64>,
}

pub fn run_example() -> Result<Summary, Box<dyn std::error::Error>> {
    let spec = GridSpec { n: 64, ..GridSpec::with_preset(Preset::Mixed) };
    let geo = Geometry::new(&spec, Scaling::Nr, 4.0)?;

    // the Pauli-type operator ξ²/2m + V − (ε/2m)B·Σ
    let kinetic = MatrixSymbol::scalar(&ScalarExpr::xi_sq().scale(&rat(1, 2)) + &ScalarExpr::v());
    let sym = &kinetic + &MatrixSymbol::b_spin().scale(&ScalarExpr::eps().scale(&rat(-1, 2)));
    let op = quantize(&NumericSymbol::new(sym), &geo)?;

    let skew = &MatrixSymbol::scalar(&ScalarExpr::i() * &ScalarExpr::xi(0)) + &MatrixSymbol::alpha(0).scale(&ScalarExpr::v());
    let a = quantize(&NumericSymbol::new(skew.clone()), &geo)?;
    let b = quantize(&NumericSymbol::new(skew.dagger()), &geo)?;
    let adjoint_defect = a.adjoint().sub(&b).op_norm()?;

    let ev = op.eigenvalues()?;
    Ok(Summary { hermiticity_defect: op.hermiticity_defect(), adjoint_defect, lowest_eigenvalues: ev.iter().take(4).cloned().collect() })
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = run_example()?;
    println!("hermiticity defect: {:.2e}", s.hermiticity_defect);
    println!("‖Op(σ)† − Op(σ†)‖ = {:.2e}", s.adjoint_defect);
    println!("lowest eigenvalues: {:?}", s.lowest_eigenvalues);
    Ok(())
}
