// Exact symbol arithmetic: products, ξ-derivatives and the rational normal
// form that decides equality.

use sapt::scalar::ScalarExpr;

pub struct Summary {
    pub energy_identity_holds: bool,
    pub derivative_of_energy: String,
    pub spin_term_vanishes: bool,
}

pub fn run_example() -> Result<Summary, Box<dyn std::error::Error>> {
    let e = ScalarExpr::energy();
    let m = ScalarExpr::m();

    // E² − m² − ξ² = 0, and 1/(E+m) = (E−m)/ξ²
    let lhs = &(&e * &e) - &(&(&m * &m) + &ScalarExpr::xi_sq());
    let check = &(&ScalarExpr::xi_sq() * &ScalarExpr::e_plus_m_pow(-1)) - &(&e - &m);
    let energy_identity_holds = lhs.is_zero() && check.is_zero();

    // ∂ξ₁E = ξ₁/E
    let d = e.d_xi(0);
    let expect = &ScalarExpr::xi(0) * &ScalarExpr::energy_pow(-1);
    assert!((&d - &expect).is_zero());

    // div B = 0 is part of the normal form
    let div_b = (0..3).fold(ScalarExpr::zero(), |acc, l| &acc + &ScalarExpr::b_vec(l).d_x(l));
    let spin_term_vanishes = div_b.is_zero();

    Ok(Summary { energy_identity_holds, derivative_of_energy: sapt::matrix::scalar_latex(&d.normal_form()), spin_term_vanishes })
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = run_example()?;
    println!("E² = m² + ξ² and 1/(E+m) = (E−m)/ξ²: {}", s.energy_identity_holds);
    println!("∂ξ₁ E = {}", s.derivative_of_energy);
    println!("∂₁B₂₃ − ∂₂B₁₃ + ∂₃B₁₂ = 0: {}", s.spin_term_vanishes);
    Ok(())
}
