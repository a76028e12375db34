//! Order-by-order construction of the almost-projection π, almost-unitary u,
//! diagonalized hamiltonian h and effective hamiltonian in both scalings.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Result, SaptError};
use crate::matrix::{MatrixSymbol, PowerSeries, Scaling};
use crate::moyal::scaled_term;
use crate::scalar::{rat, ScalarExpr};

pub fn max_order(scaling: Scaling) -> usize {
    match scaling {
        Scaling::Nr => 4,
        Scaling::Sr => 3,
    }
}

pub fn check_order(scaling: Scaling, k: usize) -> Result<()> {
    if k > max_order(scaling) {
        return Err(SaptError::UnsupportedOrder(format!(
            "{} recursion supports orders up to {}, got {k}",
            scaling.name(),
            max_order(scaling)
        )));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct ScalingConfig {
    pub tag: Scaling,
    pub truncation: usize,
    pub h: PowerSeries,
    pub pi0: MatrixSymbol,
    pub u0: MatrixSymbol,
    /// −1/(2m) for nr, −1/(2E) for sr
    pub gap_inverse: ScalarExpr,
}

impl ScalingConfig {
    pub fn new(tag: Scaling, truncation: usize) -> Result<Self> {
        check_order(tag, truncation)?;
        let mut h = PowerSeries::new(tag, truncation);
        let v = MatrixSymbol::scalar(ScalarExpr::v());
        let mb = MatrixSymbol::beta().scale(&ScalarExpr::m());
        let cfg = match tag {
            Scaling::Nr => {
                h.set(0, mb);
                h.set(1, MatrixSymbol::xi_alpha());
                h.set(2, v);
                ScalingConfig {
                    tag,
                    truncation,
                    h,
                    pi0: MatrixSymbol::pi_ref(),
                    u0: MatrixSymbol::identity(),
                    gap_inverse: ScalarExpr::m_pow(-1).scale(&rat(-1, 2)),
                }
            }
            Scaling::Sr => {
                h.set(0, MatrixSymbol::h0_sr());
                h.set(2, v);
                ScalingConfig {
                    tag,
                    truncation,
                    h,
                    pi0: MatrixSymbol::pi0_sr(),
                    u0: MatrixSymbol::u0_sr(),
                    gap_inverse: ScalarExpr::energy_pow(-1).scale(&rat(-1, 2)),
                }
            }
        };
        Ok(cfg)
    }

    pub fn nr(k: usize) -> Result<Self> {
        Self::new(Scaling::Nr, k)
    }

    pub fn sr(k: usize) -> Result<Self> {
        Self::new(Scaling::Sr, k)
    }
}

/// Order-n coefficient of a♯b.
pub fn product_order(a: &PowerSeries, b: &PowerSeries, n: usize) -> Result<MatrixSymbol> {
    let mut out = MatrixSymbol::zero();
    for (k, ak) in a.orders() {
        for (l, bl) in b.orders() {
            if k + l > n {
                continue;
            }
            let t = scaled_term(a.scaling, ak, bl, n - k - l)?;
            if !t.is_structurally_zero() {
                out = &out + &t;
            }
        }
    }
    Ok(out.normal_form())
}

/// a♯b through order n (n ≤ truncation).
pub fn product_upto(a: &PowerSeries, b: &PowerSeries, n: usize) -> Result<PowerSeries> {
    let mut out = PowerSeries::new(a.scaling, a.truncation);
    for k in 0..=n.min(a.truncation) {
        out.set(k, product_order(a, b, k)?);
    }
    Ok(out)
}

fn commutator_order(a: &PowerSeries, b: &PowerSeries, n: usize) -> Result<MatrixSymbol> {
    Ok((&product_order(a, b, n)? - &product_order(b, a, n)?).normal_form())
}

#[derive(Clone, Debug)]
pub struct ProjectionBuild {
    pub series: PowerSeries,
    /// per order: (diagonal part, off-diagonal part) relative to π₀
    pub parts: BTreeMap<usize, (MatrixSymbol, MatrixSymbol)>,
}

pub fn build_projection_parts(cfg: &ScalingConfig, k_max: usize) -> Result<ProjectionBuild> {
    check_order(cfg.tag, k_max)?;
    let h = cfg.h.with_truncation(k_max);
    let p0 = &cfg.pi0;
    let q0 = &MatrixSymbol::identity() - p0;
    let g = MatrixSymbol::scalar(cfg.gap_inverse.clone());
    let mut pi = PowerSeries::constant(cfg.tag, k_max, p0.clone());
    let mut parts = BTreeMap::new();
    for k in 0..k_max {
        let n = k + 1;
        let gk = (&product_order(&pi, &pi, n)? - &pi.get(n)).normal_form();
        let diag = (&(&(&q0 * &gk) * &q0) - &(&(p0 * &gk) * p0)).normal_form();
        let mut trial = pi.clone();
        trial.set(n, diag.clone());
        let f = commutator_order(&h, &trial, n)?;
        let off = (&(&(&(p0 * &f) * &g) * &q0) - &(&(&(&q0 * &g) * &f) * p0)).normal_form();
        pi.set(n, (&diag + &off).normal_form());
        parts.insert(n, (diag, off));
    }
    Ok(ProjectionBuild { series: pi, parts })
}

pub fn build_projection(cfg: &ScalingConfig, k_max: usize) -> Result<PowerSeries> {
    Ok(build_projection_parts(cfg, k_max)?.series)
}

/// Needs π through order k_max.
pub fn build_unitary(cfg: &ScalingConfig, pi: &PowerSeries, k_max: usize) -> Result<PowerSeries> {
    check_order(cfg.tag, k_max)?;
    let pi = pi.with_truncation(k_max);
    let pref = MatrixSymbol::pi_ref();
    let u0 = &cfg.u0;
    let mut u = PowerSeries::constant(cfg.tag, k_max, u0.clone());
    for k in 0..k_max {
        let n = k + 1;
        let a_def = product_order(&u, &u.dagger(), n)?;
        let a = a_def.scale_rat(&rat(-1, 2));
        let mut ut = u.clone();
        ut.set(n, (&a * u0).normal_form());
        let left = product_upto(&ut, &pi, n)?;
        let b_def = product_order(&left, &ut.dagger(), n)?;
        let corr = pref.commutator(&b_def);
        u.set(n, (&(&a + &corr) * u0).normal_form());
    }
    Ok(u)
}

/// h with u♯H = h♯u through order k_max; needs u through k_max.
pub fn diagonalize_hamiltonian(cfg: &ScalingConfig, u: &PowerSeries, k_max: usize) -> Result<PowerSeries> {
    check_order(cfg.tag, k_max)?;
    let u = u.with_truncation(k_max);
    let hs = cfg.h.with_truncation(k_max);
    let u0d = cfg.u0.dagger();
    let mut h = PowerSeries::new(cfg.tag, k_max);
    for k in 0..=k_max {
        let mut r = product_order(&u, &hs, k)?;
        // Σ_{l<k} (h_l ♯ u_j)_(n) with l+j+n = k
        let lower = product_order(&h.with_truncation(k_max), &u, k)?;
        r = &r - &lower;
        h.set(k, (&r * &u0d).normal_form());
    }
    Ok(h)
}

pub fn effective_from(h: &PowerSeries) -> PowerSeries {
    let p = MatrixSymbol::pi_ref();
    h.map(|m| (&(&p * m) * &p).normal_form())
}

/// All four series of the construction at one order.
#[derive(Clone, Debug)]
pub struct Expansion {
    pub cfg: ScalingConfig,
    pub pi: PowerSeries,
    pub u: PowerSeries,
    pub h: PowerSeries,
    pub h_eff: PowerSeries,
}

pub fn expand(scaling: Scaling, k: usize) -> Result<Expansion> {
    let cfg = ScalingConfig::new(scaling, k)?;
    let pi = build_projection(&cfg, k)?;
    let u = build_unitary(&cfg, &pi, k)?;
    let h = diagonalize_hamiltonian(&cfg, &u, k)?;
    let h_eff = effective_from(&h);
    Ok(Expansion { cfg, pi, u, h, h_eff })
}

pub fn effective_hamiltonian(scaling: Scaling, k: usize) -> Result<PowerSeries> {
    Ok(expand(scaling, k)?.h_eff)
}

// ---- defects -------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DefectKind {
    Projection,
    Commutation,
    Unitarity,
    Intertwining,
}

#[derive(Clone, Debug, Serialize)]
pub struct DefectReport {
    pub kind: DefectKind,
    pub through_order: usize,
    /// nonvanishing residuals only
    pub residuals: BTreeMap<usize, MatrixSymbol>,
    pub max_nonvanishing_order: Option<usize>,
    pub passed: bool,
}

impl DefectReport {
    fn from_series(kind: DefectKind, s: &PowerSeries, k: usize) -> Self {
        let mut residuals = BTreeMap::new();
        for n in 0..=k {
            let m = s.get(n).normal_form();
            if !m.is_zero() {
                residuals.insert(n, m);
            }
        }
        let max = residuals.keys().next_back().copied();
        DefectReport { kind, through_order: k, passed: residuals.is_empty(), residuals, max_nonvanishing_order: max }
    }
}

pub fn verify_defects(cfg: &ScalingConfig, pi: &PowerSeries, u: &PowerSeries, k: usize) -> Result<Vec<DefectReport>> {
    let pi = pi.with_truncation(k);
    let u = u.with_truncation(k);
    let h = cfg.h.with_truncation(k);
    let id = PowerSeries::identity(cfg.tag, k);
    let pref = PowerSeries::constant(cfg.tag, k, MatrixSymbol::pi_ref());
    let proj = product_upto(&pi, &pi, k)?.sub(&pi)?;
    let comm = product_upto(&h, &pi, k)?.sub(&product_upto(&pi, &h, k)?)?;
    let ud = u.dagger();
    let unit = product_upto(&u, &ud, k)?.sub(&id)?;
    let inter = product_upto(&product_upto(&u, &pi, k)?, &ud, k)?.sub(&pref)?;
    Ok(vec![
        DefectReport::from_series(DefectKind::Projection, &proj, k),
        DefectReport::from_series(DefectKind::Commutation, &comm, k),
        DefectReport::from_series(DefectKind::Unitarity, &unit, k),
        DefectReport::from_series(DefectKind::Intertwining, &inter, k),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m_inv(p: u32) -> ScalarExpr {
        ScalarExpr::m_pow(-1).pow(p)
    }

    #[test]
    fn nr_first_orders() {
        let cfg = ScalingConfig::nr(2).unwrap();
        let pi = build_projection(&cfg, 2).unwrap();
        let pi1 = MatrixSymbol::xi_alpha().scale(&m_inv(1).scale(&rat(1, 2)));
        assert_eq!(pi.get(1), pi1);
        assert_eq!(pi.get(1).block_offdiag(), pi.get(1));
        let pi2 = MatrixSymbol::beta().scale(&(&ScalarExpr::xi_sq() * &m_inv(2)).scale(&rat(-1, 4)));
        assert_eq!(pi.get(2), pi2);
        let u = build_unitary(&cfg, &pi, 2).unwrap();
        let u1 = (&MatrixSymbol::xi_alpha() * &MatrixSymbol::beta()).scale(&m_inv(1).scale(&rat(-1, 2)));
        assert_eq!(u.get(1), u1);
        let u2 = MatrixSymbol::scalar((&ScalarExpr::xi_sq() * &m_inv(2)).scale(&rat(-1, 8)));
        assert_eq!(u.get(2), u2);
    }

    #[test]
    fn order_zero_effective() {
        let h = effective_hamiltonian(Scaling::Nr, 0).unwrap();
        assert_eq!(h.get(0), MatrixSymbol::pi_ref().scale(&ScalarExpr::m()));
    }

    #[test]
    fn sr_low_orders_vanish() {
        let cfg = ScalingConfig::sr(2).unwrap();
        let pi = build_projection(&cfg, 2).unwrap();
        assert!(pi.get(1).is_zero() && pi.get(2).is_zero());
        let u = build_unitary(&cfg, &pi, 2).unwrap();
        assert!(u.get(1).is_zero() && u.get(2).is_zero());
        let h = diagonalize_hamiltonian(&cfg, &u, 0).unwrap();
        assert_eq!(h.get(0), MatrixSymbol::beta().scale(&ScalarExpr::energy()));
    }

    #[test]
    fn orders_beyond_support_fail() {
        assert!(matches!(ScalingConfig::nr(5), Err(SaptError::UnsupportedOrder(_))));
        assert!(matches!(ScalingConfig::sr(4), Err(SaptError::UnsupportedOrder(_))));
    }

    #[test]
    fn bare_pi0_fails_commutation_at_order_one() {
        let cfg = ScalingConfig::nr(1).unwrap();
        let pi = PowerSeries::constant(Scaling::Nr, 1, cfg.pi0.clone());
        let u = PowerSeries::identity(Scaling::Nr, 1);
        let reps = verify_defects(&cfg, &pi, &u, 1).unwrap();
        let comm = &reps[1];
        assert!(!comm.passed);
        assert_eq!(comm.max_nonvanishing_order, Some(1));
        assert_eq!(comm.residuals[&1], MatrixSymbol::xi_alpha().commutator(&cfg.pi0));
        let reps0 = verify_defects(&cfg, &pi, &u, 0).unwrap();
        assert!(reps0.iter().all(|r| r.passed));
    }
}
