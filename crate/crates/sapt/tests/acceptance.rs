// One line per acceptance criterion, then the expected overall state:
// everything passes except the stored third-order projection, whose ∇V
// entries disagree with the constructed series.

mod common;

use std::io::Write;
use std::time::Instant;

use sapt::fixtures::{adjudicate_u3, compare_fixture, fixture};
use sapt::grid::{
    composition_oracle, dirac_hamiltonian, error_scaling_experiment, free_dispersion, gauge_covariance_check, generic_chi,
    spectral_residual_experiment, ExperimentConfig, ExperimentReport, Geometry, GridSpec, NumericSymbol, Preset, Trig, DEFAULT_C_LIST,
};
use sapt::matrix::{MatrixSymbol, PowerSeries, Scaling};
use sapt::recursion::{
    build_projection, build_unitary, diagonalize_hamiltonian, effective_hamiltonian, expand, verify_defects, ScalingConfig,
};
use sapt::scalar::{rat, FieldKind, ScalarExpr};
use sapt::taylor::{darwin_term, taylor_compare_scalings};

type Check = Result<(bool, String), Box<dyn std::error::Error>>;

struct Line {
    id: usize,
    name: &'static str,
    passed: bool,
    detail: String,
}

fn run(id: usize, name: &'static str, f: impl FnOnce() -> Check) -> Line {
    let t = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let line = Line { id, name, passed, detail: format!("{detail} [{:.1} s]", t.elapsed().as_secs_f64()) };
    // straight to the handle so the lines survive test output capture
    let _ = writeln!(std::io::stdout(), "{:>2} {} {}: {}", line.id, if line.passed { "PASS" } else { "FAIL" }, line.name, line.detail);
    line
}

fn same(a: &MatrixSymbol, b: &MatrixSymbol) -> bool {
    (a - b).is_zero()
}

fn slope_in_band(rep: &ExperimentReport) -> (bool, String) {
    let s = rep.slope.unwrap_or(f64::NAN);
    let r2 = rep.r_squared.unwrap_or(f64::NAN);
    ((2.5..=3.5).contains(&s) && r2 >= 0.98, format!("slope {s:.4}, r² {r2:.6}"))
}

fn pi3_fixture() -> Check {
    let t = Instant::now();
    let pi = build_projection(&ScalingConfig::nr(3)?, 3)?;
    let secs = t.elapsed().as_secs_f64();
    let rep = compare_fixture("nr_pi3", &pi)?;
    let entries: Vec<String> = rep.mismatches.iter().map(|d| format!("({},{})@{}", d.row, d.col, d.order)).collect();
    Ok((rep.passed && secs < 10.0, format!("{} mismatching entries {:?}, built in {secs:.2} s", entries.len(), entries)))
}

fn h_fixtures() -> Check {
    let cfg = ScalingConfig::nr(3)?;
    let pi = build_projection(&cfg, 3)?;
    let u = build_unitary(&cfg, &pi, 3)?;
    let h = diagonalize_hamiltonian(&cfg, &u, 3)?;
    let m_inv_half = ScalarExpr::m_pow(-1).scale(&rat(1, 2));
    let want = [
        MatrixSymbol::beta().scale(&ScalarExpr::m()),
        MatrixSymbol::zero(),
        &MatrixSymbol::beta().scale(&(&ScalarExpr::xi_sq() * &m_inv_half)) + &MatrixSymbol::scalar(ScalarExpr::v()),
        (&MatrixSymbol::b_spin() * &MatrixSymbol::beta()).scale(&(&ScalarExpr::eps() * &m_inv_half).scale(&rat(-1, 1))),
    ];
    let low: Vec<bool> = want.iter().enumerate().map(|(n, w)| same(&h.get(n), w)).collect();
    let h3 = compare_fixture("nr_h3", &h)?.passed;
    let heff = compare_fixture("nr_heff4", &effective_hamiltonian(Scaling::Nr, 4)?)?.passed;
    Ok((low.iter().all(|&b| b) && h3 && heff, format!("h₀..h₃ {low:?}, nr_h3 {h3}, nr_heff4 {heff}")))
}

fn sr_fixtures() -> Check {
    let cfg = ScalingConfig::sr(3)?;
    let pi = build_projection(&cfg, 2)?;
    let u = build_unitary(&cfg, &pi, 2)?;
    let quiet = (1..=2).all(|n| pi.get(n).is_zero() && u.get(n).is_zero());
    let names = ["sr_pi2", "sr_u2"];
    let fx = compare_fixture(names[0], &pi)?.passed && compare_fixture(names[1], &u)?.passed;
    let heff = compare_fixture("sr_heff3", &effective_hamiltonian(Scaling::Sr, 3)?)?.passed;
    Ok((quiet && fx && heff, format!("orders 1-2 vanish {quiet}, sr_pi2/sr_u2 {fx}, sr_heff3 {heff}")))
}

fn defects() -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for (sc, k) in [(Scaling::Nr, 4), (Scaling::Sr, 3)] {
        let e = expand(sc, k)?;
        let reps = verify_defects(&e.cfg, &e.pi, &e.u, k)?;
        let pass = reps.iter().all(|r| r.passed);
        ok &= pass;
        parts.push(format!("{} through {k}: {}", sc.name(), if pass { "zero" } else { "nonzero" }));
    }
    Ok((ok, parts.join(", ")))
}

fn u3() -> Check {
    let e = expand(Scaling::Nr, 3)?;
    let pass = verify_defects(&e.cfg, &e.pi, &e.u, 3)?.iter().all(|r| r.passed);
    let v = adjudicate_u3(&e.cfg, &e.pi, &e.u)?;
    Ok((
        pass,
        format!(
            "computed u₃ satisfies all defects {pass}; exact matches {:?}, closest {}, stored variants pass defects {:?}",
            v.matches, v.closest, v.variant_defects_pass
        ),
    ))
}

fn taylor() -> Check {
    let rep = taylor_compare_scalings(4)?;
    let exact = rep.nonzero_orders == vec![4] && rep.residual.get(4) == darwin_term();
    Ok((exact && rep.darwin_only, format!("nonzero residual orders {:?}", rep.nonzero_orders)))
}

fn dynamics() -> Check {
    let t = Instant::now();
    let rep = error_scaling_experiment(&ExperimentConfig::new(Scaling::Sr, 2))?;
    let secs = t.elapsed().as_secs_f64();
    let (ok, s) = slope_in_band(&rep);
    Ok((ok && secs < 120.0, s))
}

fn composition() -> Check {
    let f = MatrixSymbol::xi_alpha();
    let g = MatrixSymbol::scalar(ScalarExpr::xi(0));
    let mag = composition_oracle(&f, &g, 0, Scaling::Sr, &DEFAULT_C_LIST, &GridSpec::with_preset(Preset::Magnetic))?;
    let el = composition_oracle(&f, &g, 0, Scaling::Sr, &DEFAULT_C_LIST, &GridSpec::with_preset(Preset::Electric))?;
    let (ok, s) = slope_in_band(&mag);
    let flat = el.max_error();
    Ok((ok && flat < 1e-10, format!("magnetic {s}; B = 0 max error {flat:.1e}")))
}

fn gauge() -> Check {
    let spec = GridSpec::with_preset(Preset::Generic);
    let mut worst = 0.0f64;
    let mut trivial = 0.0f64;
    for sc in [Scaling::Sr, Scaling::Nr] {
        let geo = Geometry::new(&spec, sc, 8.0)?;
        let sym = NumericSymbol::new(&MatrixSymbol::h0_sr() + &MatrixSymbol::scalar(&ScalarExpr::xi_sq() * &ScalarExpr::v()));
        worst = worst.max(gauge_covariance_check(&geo, &generic_chi(spec.seed), &sym)?.relative);
        trivial = trivial.max(gauge_covariance_check(&geo, &Trig::zero(), &sym)?.deviation);
    }
    Ok((worst < 1e-8 && trivial == 0.0, format!("generic χ {worst:.2e}, χ = 0 gives {trivial:e}")))
}

fn spectral() -> Check {
    Ok(slope_in_band(&spectral_residual_experiment(&ExperimentConfig::new(Scaling::Sr, 2))?))
}

fn free_fields() -> Check {
    let spec = GridSpec { k_perp: [0.4, -0.3], ..GridSpec::with_preset(Preset::Free) };
    let mut disp = 0.0f64;
    for sc in [Scaling::Sr, Scaling::Nr] {
        for c in DEFAULT_C_LIST {
            let geo = Geometry::new(&spec, sc, c)?;
            let ev = dirac_hamiltonian(&geo)?.eigenvalues()?;
            let want = free_dispersion(&geo);
            disp = ev.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(disp, f64::max);
        }
    }
    let mut cfg = ExperimentConfig::new(Scaling::Sr, 2);
    cfg.grid = GridSpec::with_preset(Preset::Free);
    let err = error_scaling_experiment(&cfg)?.max_error();
    Ok((disp < 1e-10 && err < 1e-10, format!("dispersion deviation {disp:.1e}, dynamics error {err:.1e}")))
}

fn algebra() -> Check {
    let mut failed = Vec::new();
    for (name, law) in common::algebra_laws() {
        if let Err(e) = law(common::CASES) {
            failed.push(format!("{name}: {e}"));
        }
    }
    let n = common::algebra_laws().len();
    Ok((failed.is_empty(), if failed.is_empty() { format!("{n} laws, {} cases each", common::CASES) } else { failed.join("; ") }))
}

/// The fixture minus the construction, restricted to terms with a first
/// derivative of V.
fn pi3_gap_is_grad_v_only(computed: &PowerSeries) -> bool {
    let fx = &fixture("nr_pi3").unwrap().series;
    (0..=3).all(|n| {
        let d = (&fx.get(n) - &computed.get(n)).normal_form();
        d.entries().all(|e| {
            e.terms().all(|(mono, _)| {
                mono.atoms.len() == 1 && mono.atoms[0].kind == FieldKind::V && mono.atoms[0].deriv.iter().sum::<u32>() == 1
            })
        }) && (n == 3 || d.is_zero())
    })
}

#[test]
fn acceptance_criteria() {
    let lines = vec![
        run(1, "symbolic projection fixture", pi3_fixture),
        run(2, "symbolic hamiltonian fixtures", h_fixtures),
        run(3, "semi-relativistic fixtures", sr_fixtures),
        run(4, "defect suites", defects),
        run(5, "third-order unitary", u3),
        run(6, "Taylor consistency", taylor),
        run(7, "numeric dynamics scaling", dynamics),
        run(8, "composition oracle", composition),
        run(9, "gauge covariance", gauge),
        run(10, "spectral residuals", spectral),
        run(11, "free-field exactness", free_fields),
        run(12, "algebra laws", algebra),
    ];
    let failing: Vec<usize> = lines.iter().filter(|l| !l.passed).map(|l| l.id).collect();
    let _ = writeln!(std::io::stdout(), "failing: {failing:?}");

    // the one known failure is confined to the ∇V entries of the stored π₃
    assert_eq!(failing, vec![1]);
    let pi = build_projection(&ScalingConfig::nr(3).unwrap(), 3).unwrap();
    let rep = compare_fixture("nr_pi3", &pi).unwrap();
    let mut cells: Vec<(usize, usize)> = rep.mismatches.iter().map(|d| (d.row, d.col)).collect();
    cells.sort();
    assert_eq!(cells, vec![(0, 2), (0, 3), (1, 2), (1, 3), (2, 0), (2, 1), (3, 0), (3, 1)]);
    assert_eq!(rep.mismatched_orders(), vec![3]);
    assert!(pi3_gap_is_grad_v_only(&pi));
}
