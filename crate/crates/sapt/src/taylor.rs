//! Small-momentum expansion of the semi-relativistic effective hamiltonian,
//! compared order by order with the non-relativistic one.
//!
//! Substituting ξ → ξ/c turns every ξ^α into c^(−|α|) ξ^α, and the energy atoms
//! into power series in x = ξ²/(c²m²):
//! E = m(1+x)^½ and E+m = 2m(1+w) with w = ((1+x)^½ − 1)/2.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Result, SaptError};
use crate::matrix::{MatrixSymbol, PowerSeries, Scaling};
use crate::recursion::{check_order, effective_hamiltonian, max_order};
use crate::scalar::{rat, Monomial, Rat, ScalarExpr};

/// Truncated power series in one variable.
type Series = Vec<Rat>;

fn mul(a: &Series, b: &Series, deg: usize) -> Series {
    let mut out = vec![Rat::zero(); deg + 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            if i + j <= deg {
                out[i + j] += x * y;
            }
        }
    }
    out
}

/// (1+t)^a
fn binomial(a: &Rat, deg: usize) -> Series {
    let mut out = vec![Rat::one()];
    let mut c = Rat::one();
    for j in 0..deg {
        c = c * (a - Rat::from_integer(j.into())) / Rat::from_integer((j + 1).into());
        out.push(c.clone());
    }
    out
}

/// f(g(t)) for g with zero constant term
fn compose(f: &Series, g: &Series, deg: usize) -> Series {
    let mut out = vec![Rat::zero(); deg + 1];
    let mut gp = vec![Rat::one()];
    for fj in f.iter().take(deg + 1) {
        for (i, v) in gp.iter().enumerate() {
            out[i] += fj * v;
        }
        gp = mul(&gp, g, deg);
    }
    out
}

/// E^p (E+m)^q = m^p (2m)^q · Σ_j a_j x^j
fn energy_series(p: &Rat, q: i64, deg: usize) -> Series {
    let sqrt = binomial(&rat(1, 2), deg);
    let mut w: Series = sqrt.iter().map(|c| c / Rat::from_integer(2.into())).collect();
    w[0] = Rat::zero();
    let eq = compose(&binomial(&Rat::from_integer(q.into()), deg), &w, deg);
    mul(&binomial(&(p / Rat::from_integer(2.into())), deg), &eq, deg)
}

/// Expands one semi-relativistic scalar after ξ → ξ/c. Returns the graded
/// pieces, keyed by the extra power of 1/c, up to `budget`.
fn expand_scalar(s: &ScalarExpr, budget: usize) -> Result<BTreeMap<usize, ScalarExpr>> {
    let mut out: BTreeMap<usize, ScalarExpr> = BTreeMap::new();
    for (mono, c) in s.terms() {
        if mono.r_pow % 2 == 1 {
            return Err(SaptError::NonPolynomialSymbol("odd power of N has no rational expansion".into()));
        }
        let deg_xi: u32 = mono.xi.iter().sum();
        if deg_xi as usize > budget {
            continue;
        }
        let half_r = (mono.r_pow / 2) as i32;
        let p = mono.e_pow - half_r;
        let q = mono.em_pow - half_r;
        let base = Monomial { xi: mono.xi, e_pow: 0, em_pow: 0, r_pow: 0, m_pow: mono.m_pow + p + q, ..mono.clone() };
        // 2^(q − r/2) from (2m)^q and N^r = (2E(E+m))^(−r/2)
        let two = Rat::from_integer(2.into());
        let mut coeff = c.clone();
        let shift = q - half_r;
        for _ in 0..shift.unsigned_abs() {
            coeff = if shift > 0 { coeff * &two } else { coeff / &two };
        }
        let room = (budget - deg_xi as usize) / 2;
        let ser = energy_series(&Rat::from_integer(p.into()), q as i64, room);
        for (j, a) in ser.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let x_j = &ScalarExpr::xi_sq().pow(j as u32) * &ScalarExpr::m_pow(-2 * j as i32);
            let t = &ScalarExpr::term(&coeff * a, base.clone()) * &x_j;
            *out.entry(deg_xi as usize + 2 * j).or_insert_with(ScalarExpr::zero) += t;
        }
    }
    Ok(out)
}

/// Rewrites a semi-relativistic series in ξ/c and regrades it as a
/// non-relativistic series truncated at `k`.
pub fn small_momentum_expansion(sr: &PowerSeries, k: usize) -> Result<PowerSeries> {
    if sr.scaling != Scaling::Sr {
        return Err(SaptError::ScalingMismatch);
    }
    let mut out = PowerSeries::new(Scaling::Nr, k);
    for (n, m) in sr.orders() {
        if n > k {
            continue;
        }
        let mut graded: BTreeMap<usize, MatrixSymbol> = BTreeMap::new();
        for r in 0..4 {
            for c in 0..4 {
                for (extra, s) in expand_scalar(m.get(r, c), k - n)? {
                    graded.entry(n + extra).or_insert_with(MatrixSymbol::zero).set(r, c, s);
                }
            }
        }
        for (order, piece) in graded {
            let sum = &out.get(order) + &piece;
            out.set(order, sum.normal_form());
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct TaylorReport {
    pub truncation: usize,
    pub field_free: bool,
    /// non-relativistic h_eff minus the expanded semi-relativistic h_eff
    pub residual: PowerSeries,
    pub nonzero_orders: Vec<usize>,
    /// residual equals (ε²/8m²)ΔV π_ref at order 4 and vanishes elsewhere
    pub darwin_only: bool,
}

pub fn darwin_term() -> MatrixSymbol {
    let coeff = &(&ScalarExpr::eps().pow(2) * &ScalarExpr::m_pow(-2)).scale(&rat(1, 8)) * &MatrixSymbol::laplace_v();
    MatrixSymbol::pi_ref().scale(&coeff)
}

pub fn taylor_compare_scalings(k: usize) -> Result<TaylorReport> {
    taylor_compare(k, false)
}

/// With `field_free`, V and B are dropped from both sides before comparing.
pub fn taylor_compare(k: usize, field_free: bool) -> Result<TaylorReport> {
    check_order(Scaling::Nr, k)?;
    let mut nr = effective_hamiltonian(Scaling::Nr, k)?;
    let mut sr = effective_hamiltonian(Scaling::Sr, k.min(max_order(Scaling::Sr)))?;
    if field_free {
        nr = nr.map(|m| m.drop_fields(|_| true));
        sr = sr.map(|m| m.drop_fields(|_| true));
    }
    let expanded = small_momentum_expansion(&sr, k)?;
    let residual = nr.sub(&expanded)?.normal_form();
    let nonzero_orders: Vec<usize> = residual.orders().filter(|(_, m)| !m.is_zero()).map(|(n, _)| n).collect();
    let darwin_only = (0..=k).all(|n| {
        let want = if n == 4 && !field_free { darwin_term() } else { MatrixSymbol::zero() };
        residual.get(n) == want
    });
    Ok(TaylorReport { truncation: k, field_free, residual, nonzero_orders, darwin_only })
}
