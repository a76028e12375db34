// Magnetic Moyal products of matrix symbols, term by term.

use sapt::matrix::{MatrixSymbol, Scaling};
use sapt::moyal::{moyal_term, scaled_term};
use sapt::scalar::{rat, ScalarExpr};

pub struct Summary {
    /// (1,1) term of (ξ·α/2m)♯(ξ·α/2m), expected −(1/4m²)B·Σ; ε enters through the scaling
    pub spin_term: MatrixSymbol,
    pub spin_term_as_expected: bool,
    /// first sr correction of (ξ·α)♯(ξ·α) sits at order 3
    pub first_sr_order: usize,
}

pub fn run_example() -> Result<Summary, Box<dyn std::error::Error>> {
    let a = MatrixSymbol::xi_alpha().scale(&ScalarExpr::m_pow(-1).scale(&rat(1, 2)));
    let spin_term = moyal_term(&a, &a, 1, 1)?.normal_form();
    let want = MatrixSymbol::b_spin().scale(&ScalarExpr::m_pow(-2).scale(&rat(-1, 4)));
    let spin_term_as_expected = (&spin_term - &want).is_zero();

    let f = MatrixSymbol::xi_alpha();
    let mut first_sr_order = 0;
    for j in 1..=3 {
        if !scaled_term(Scaling::Sr, &f, &f, j)?.is_zero() {
            first_sr_order = j;
            break;
        }
    }
    Ok(Summary { spin_term, spin_term_as_expected, first_sr_order })
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = run_example()?;
    println!("(ξ·α/2m) ♯₁,₁ (ξ·α/2m) = {}", s.spin_term.to_latex_dirac());
    println!("matches −(1/4m²)B·Σ: {}", s.spin_term_as_expected);
    println!("first nonzero sr correction of (ξ·α)♯(ξ·α): order {}", s.first_sr_order);
    Ok(())
}
