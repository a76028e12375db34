// Almost-projection, almost-unitary and effective hamiltonian in the
// non-relativistic scaling, printed as LaTeX.

use sapt::matrix::Scaling;
use sapt::recursion::expand;

pub struct Summary {
    pub latex: Vec<(usize, String)>,
    pub zero_orders: Vec<usize>,
}

pub fn run_example() -> Result<Summary, Box<dyn std::error::Error>> {
    let exp = expand(Scaling::Nr, 4)?;
    let mut latex = Vec::new();
    let mut zero_orders = Vec::new();
    for n in 0..=4 {
        let h = exp.h_eff.get(n);
        if h.is_zero() {
            zero_orders.push(n);
        } else {
            latex.push((n, h.to_latex_dirac()));
        }
    }
    Ok(Summary { latex, zero_orders })
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = run_example()?;
    for (n, l) in &s.latex {
        println!("h_eff[{n}] = {l}\n");
    }
    println!("vanishing orders: {:?}", s.zero_orders);
    Ok(())
}
