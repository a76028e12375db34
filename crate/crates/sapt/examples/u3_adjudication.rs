// Which stored third-order unitary the construction reproduces, and whether
// either one satisfies the defect equations.

use sapt::fixtures::{adjudicate_u3, U3Verdict};
use sapt::matrix::Scaling;
use sapt::recursion::{expand, verify_defects};

pub struct Summary {
    pub verdict: U3Verdict,
    pub computed_defects_pass: bool,
}

pub fn run_example() -> Result<Summary, Box<dyn std::error::Error>> {
    let exp = expand(Scaling::Nr, 3)?;
    let reps = verify_defects(&exp.cfg, &exp.pi, &exp.u, 3)?;
    let verdict = adjudicate_u3(&exp.cfg, &exp.pi, &exp.u)?;
    Ok(Summary { verdict, computed_defects_pass: reps.iter().all(|r| r.passed) })
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = run_example()?;
    println!("computed u₃ passes all defects: {}", s.computed_defects_pass);
    println!("exact matches: {:?}, closest: {}", s.verdict.matches, s.verdict.closest);
    for (name, ok) in &s.verdict.variant_defects_pass {
        println!("{name}: defects {}", if *ok { "vanish" } else { "do not vanish" });
    }
    for r in &s.verdict.reports {
        for d in &r.mismatches {
            println!("{} [{},{}] order {}: {}", r.fixture, d.row, d.col, d.order, d.difference);
        }
    }
    Ok(())
}
