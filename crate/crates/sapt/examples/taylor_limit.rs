// Expanding the semi-relativistic effective hamiltonian in ξ/c and comparing
// with the non-relativistic one.

use sapt::taylor::{taylor_compare, TaylorReport};

pub fn run_example() -> Result<(TaylorReport, TaylorReport), Box<dyn std::error::Error>> {
    Ok((taylor_compare(4, false)?, taylor_compare(4, true)?))
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (with_fields, free) = run_example()?;
    println!("residual orders: {:?}", with_fields.nonzero_orders);
    for (n, m) in with_fields.residual.orders().filter(|(_, m)| !m.is_zero()) {
        println!("order {n}: {}", m.to_latex_dirac());
    }
    println!("only the Darwin term is left: {}", with_fields.darwin_only);
    println!("without fields the residual vanishes: {}", free.nonzero_orders.is_empty());
    Ok(())
}
