// Fixture diffs and the four defect checks for both scalings.

use sapt::cli::verify;
use sapt::matrix::Scaling;

pub struct Summary {
    /// (scaling, fixture, passed)
    pub fixtures: Vec<(Scaling, String, bool)>,
    pub defects_pass: Vec<(Scaling, bool)>,
    /// orders of the mismatching entries in the stored third-order projection
    pub pi3_mismatch_orders: Vec<usize>,
}

pub fn run_example() -> Result<Summary, Box<dyn std::error::Error>> {
    let mut fixtures = Vec::new();
    let mut defects_pass = Vec::new();
    let mut pi3_mismatch_orders = Vec::new();
    for (sc, k) in [(Scaling::Sr, 3), (Scaling::Nr, 4)] {
        let rep = verify(sc, k)?;
        for f in &rep.fixtures {
            fixtures.push((sc, f.fixture.clone(), f.passed));
            if f.fixture == "nr_pi3" {
                pi3_mismatch_orders = f.mismatched_orders();
            }
        }
        defects_pass.push((sc, rep.defects.iter().all(|d| d.passed)));
    }
    Ok(Summary { fixtures, defects_pass, pi3_mismatch_orders })
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = run_example()?;
    for (sc, name, ok) in &s.fixtures {
        println!("{:>2} {name:<10} {}", sc.name(), if *ok { "ok" } else { "MISMATCH" });
    }
    for (sc, ok) in &s.defects_pass {
        println!("{} defects vanish: {ok}", sc.name());
    }
    println!("stored π₃ differs at orders {:?}", s.pi3_mismatch_orders);
    Ok(())
}
