//! Terms (f♯g)_(n,k) of the two-parameter magnetic Moyal expansion and their
//! resummation into 1/c-graded products for both scalings.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Result, SaptError};
use crate::matrix::{MatrixSymbol, PowerSeries, Scaling};
use crate::scalar::{rat, FieldKind, Rat, ScalarExpr};

type Idx = [u32; 3];

fn unit(j: usize) -> Idx {
    let mut d = [0; 3];
    d[j] = 1;
    d
}

fn plus(a: Idx, b: Idx) -> Idx {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn order(a: Idx) -> u32 {
    a.iter().sum()
}

/// coeff · (∂ξ^fxi ∂x^fx f)(∂ξ^gxi ∂x^gx g)
struct BiTerm {
    coeff: ScalarExpr,
    fxi: Idx,
    fx: Idx,
    gxi: Idx,
    gx: Idx,
}

/// Memoized mixed derivatives of a symbol.
struct Derivs<'a> {
    base: &'a MatrixSymbol,
    degree: Option<u32>,
    x_free: bool,
    cache: HashMap<(Idx, Idx), MatrixSymbol>,
}

impl<'a> Derivs<'a> {
    fn new(base: &'a MatrixSymbol) -> Self {
        Self { base, degree: base.xi_degree(), x_free: !base.has_fields(), cache: HashMap::new() }
    }

    fn vanishes(&self, xi: Idx, x: Idx) -> bool {
        if self.x_free && order(x) > 0 {
            return true;
        }
        matches!(self.degree, Some(d) if order(xi) > d)
    }

    fn get(&mut self, xi: Idx, x: Idx) -> MatrixSymbol {
        if let Some(m) = self.cache.get(&(xi, x)) {
            return m.clone();
        }
        let m = if xi == [0, 0, 0] && x == [0, 0, 0] {
            self.base.clone()
        } else if let Some(j) = (0..3).find(|&j| x[j] > 0) {
            let mut x2 = x;
            x2[j] -= 1;
            self.get(xi, x2).d_x(j)
        } else {
            let j = (0..3).find(|&j| xi[j] > 0).unwrap();
            let mut xi2 = xi;
            xi2[j] -= 1;
            self.get(xi2, x).d_xi(j)
        };
        self.cache.insert((xi, x), m.clone());
        m
    }
}

fn apply(f: &MatrixSymbol, g: &MatrixSymbol, terms: Vec<BiTerm>) -> MatrixSymbol {
    let mut df = Derivs::new(f);
    let mut dg = Derivs::new(g);
    let mut out = MatrixSymbol::zero();
    for t in terms {
        if t.coeff.is_structurally_zero() || df.vanishes(t.fxi, t.fx) || dg.vanishes(t.gxi, t.gx) {
            continue;
        }
        let a = df.get(t.fxi, t.fx);
        if a.is_structurally_zero() {
            continue;
        }
        let b = dg.get(t.gxi, t.gx);
        if b.is_structurally_zero() {
            continue;
        }
        out = &out + &(&a * &b).scale(&t.coeff);
    }
    out.normal_form()
}

/// n-fold power of the Poisson bidifferential with prefactor (1/n!)(−i/2)ⁿ.
fn weyl_terms(n: usize) -> Vec<BiTerm> {
    let mut acc: BTreeMap<(Idx, Idx, Idx, Idx), Rat> = BTreeMap::new();
    acc.insert(([0; 3], [0; 3], [0; 3], [0; 3]), Rat::from_integer(1.into()));
    for _ in 0..n {
        let mut next: BTreeMap<(Idx, Idx, Idx, Idx), Rat> = BTreeMap::new();
        for ((fxi, fx, gxi, gx), c) in &acc {
            for j in 0..3 {
                let a = (plus(*fxi, unit(j)), *fx, *gxi, plus(*gx, unit(j)));
                *next.entry(a).or_insert_with(|| rat(0, 1)) += c;
                let b = (*fxi, plus(*fx, unit(j)), plus(*gxi, unit(j)), *gx);
                *next.entry(b).or_insert_with(|| rat(0, 1)) -= c;
            }
        }
        next.retain(|_, v| *v != rat(0, 1));
        acc = next;
    }
    let mut fact = 1i64;
    for k in 1..=n as i64 {
        fact *= k;
    }
    // (−i/2)ⁿ = (−1/2)ⁿ iⁿ
    let mut pre = ScalarExpr::constant(rat(1, fact));
    for _ in 0..n {
        pre = &pre * &ScalarExpr::i().scale(&rat(-1, 2));
    }
    acc.into_iter().map(|((fxi, fx, gxi, gx), c)| BiTerm { coeff: pre.scale(&c), fxi, fx, gxi, gx }).collect()
}

fn b_atom(l: usize, k: usize, deriv: Idx) -> ScalarExpr {
    match FieldKind::b(l, k) {
        Some((s, kind)) => ScalarExpr::field(kind, deriv).scale(&rat(s, 1)),
        None => ScalarExpr::zero(),
    }
}

fn terms_1_1() -> Vec<BiTerm> {
    let mut out = Vec::new();
    let half_i = ScalarExpr::i().scale(&rat(1, 2));
    for l in 0..3 {
        for j in 0..3 {
            out.push(BiTerm { coeff: &half_i * &b_atom(l, j, [0; 3]), fxi: unit(l), fx: [0; 3], gxi: unit(j), gx: [0; 3] });
        }
    }
    out
}

fn terms_2_1() -> Vec<BiTerm> {
    let mut out = Vec::new();
    let z = [0; 3];
    for j in 0..3 {
        for k in 0..3 {
            for l in 0..3 {
                let db = b_atom(l, k, unit(j));
                let b = b_atom(l, k, z);
                out.push(BiTerm { coeff: db.scale(&rat(1, 12)), fxi: plus(unit(l), unit(j)), fx: z, gxi: unit(k), gx: z });
                out.push(BiTerm { coeff: db.scale(&rat(-1, 12)), fxi: unit(l), fx: z, gxi: plus(unit(j), unit(k)), gx: z });
                out.push(BiTerm { coeff: b.scale(&rat(-1, 4)), fxi: plus(unit(l), unit(j)), fx: z, gxi: unit(k), gx: unit(j) });
                out.push(BiTerm { coeff: b.scale(&rat(1, 4)), fxi: unit(l), fx: unit(j), gxi: plus(unit(k), unit(j)), gx: z });
            }
        }
    }
    out
}

fn terms_2_2() -> Vec<BiTerm> {
    let mut out = Vec::new();
    let z = [0; 3];
    for l1 in 0..3 {
        for j1 in 0..3 {
            for l2 in 0..3 {
                for j2 in 0..3 {
                    let c = (&b_atom(l1, j1, z) * &b_atom(l2, j2, z)).scale(&rat(-1, 8));
                    out.push(BiTerm { coeff: c, fxi: plus(unit(l1), unit(l2)), fx: z, gxi: plus(unit(j1), unit(j2)), gx: z });
                }
            }
        }
    }
    out
}

pub fn is_supported(n: usize, k: usize) -> bool {
    k == 0 || (k <= 2 && k <= n && n <= 2)
}

/// (f♯g)_(n,k). Terms with k > n are identically zero.
pub fn moyal_term(f: &MatrixSymbol, g: &MatrixSymbol, n: usize, k: usize) -> Result<MatrixSymbol> {
    if k > n {
        return Ok(MatrixSymbol::zero());
    }
    let terms = match (n, k) {
        (0, 0) => return Ok((f * g).normal_form()),
        (_, 0) => weyl_terms(n),
        (1, 1) => terms_1_1(),
        (2, 1) => terms_2_1(),
        (2, 2) => terms_2_2(),
        _ => return Err(SaptError::UnsupportedOrder(format!("magnetic Moyal term ({n},{k})"))),
    };
    Ok(apply(f, g, terms))
}

/// Largest ε-order n that can contribute to λ-order k, None if unbounded.
fn eps_cap(f: &MatrixSymbol, g: &MatrixSymbol, k: usize) -> Option<usize> {
    let (df, dg) = (f.xi_degree(), g.xi_degree());
    let mut cap: Option<usize> = match (df, dg) {
        (Some(a), Some(b)) => Some(((a + b) as usize).saturating_sub(k)),
        _ => None,
    };
    if k == 0 {
        let fx_free = !f.has_fields();
        let gx_free = !g.has_fields();
        let mut tighten = |c: usize| cap = Some(cap.map_or(c, |x| x.min(c)));
        if fx_free && gx_free {
            tighten(0);
        }
        // an x-free f forces every ξ-derivative onto f, and vice versa
        if fx_free {
            if let Some(d) = df {
                tighten(d as usize);
            }
        }
        if gx_free {
            if let Some(d) = dg {
                tighten(d as usize);
            }
        }
    }
    cap
}

/// Order-k coefficient of f♯_nr g: Σ_{n≥k} εⁿ (f♯g)_(n,k).
pub fn nr_term(f: &MatrixSymbol, g: &MatrixSymbol, k: usize) -> Result<MatrixSymbol> {
    if k >= 1 && (f.is_xi_free() || g.is_xi_free()) {
        return Ok(MatrixSymbol::zero());
    }
    let cap = eps_cap(f, g, k).ok_or_else(|| SaptError::NonTerminating(format!("nr order {k} with two factors of unbounded ξ-degree")))?;
    let mut out = MatrixSymbol::zero();
    for n in k..=cap {
        if !is_supported(n, k) {
            return Err(SaptError::UnsupportedOrder(format!("nr order {k} needs ({n},{k})")));
        }
        let t = moyal_term(f, g, n, k)?;
        if !t.is_structurally_zero() {
            out = &out + &t.scale(&eps_pow(n));
        }
    }
    Ok(out.normal_form())
}

/// Order-n coefficient of f♯_sr g: Σ_{3k≤n} ε^{n−2k} (f♯g)_(n−2k,k).
pub fn sr_term(f: &MatrixSymbol, g: &MatrixSymbol, n: usize) -> Result<MatrixSymbol> {
    let mut out = MatrixSymbol::zero();
    let mut k = 0;
    while 3 * k <= n {
        let e = n - 2 * k;
        if k >= 1 && (f.is_xi_free() || g.is_xi_free()) {
            k += 1;
            continue;
        }
        if !is_supported(e, k) {
            return Err(SaptError::UnsupportedOrder(format!("sr order {n} needs ({e},{k})")));
        }
        let t = moyal_term(f, g, e, k)?;
        if !t.is_structurally_zero() {
            out = &out + &t.scale(&eps_pow(e));
        }
        k += 1;
    }
    Ok(out.normal_form())
}

fn eps_pow(n: usize) -> ScalarExpr {
    ScalarExpr::eps().pow(n as u32)
}

pub fn scaled_term(scaling: Scaling, f: &MatrixSymbol, g: &MatrixSymbol, j: usize) -> Result<MatrixSymbol> {
    match scaling {
        Scaling::Nr => nr_term(f, g, j),
        Scaling::Sr => sr_term(f, g, j),
    }
}

/// hₙ = Σ_{k+l+j=n} (a_k ♯ b_l)_(j), truncated at the common truncation.
pub fn series_moyal(a: &PowerSeries, b: &PowerSeries) -> Result<PowerSeries> {
    if a.scaling != b.scaling {
        return Err(SaptError::ScalingMismatch);
    }
    if a.truncation != b.truncation {
        return Err(SaptError::TruncationMismatch(a.truncation, b.truncation));
    }
    let kmax = a.truncation;
    let mut out = PowerSeries::new(a.scaling, kmax);
    for (k, ak) in a.orders() {
        for (l, bl) in b.orders() {
            if k + l > kmax {
                continue;
            }
            for j in 0..=(kmax - k - l) {
                let t = scaled_term(a.scaling, ak, bl, j)?;
                if !t.is_structurally_zero() {
                    let n = k + l + j;
                    out.set(n, (&out.get(n) + &t).normal_form());
                }
            }
        }
    }
    Ok(out)
}

/// [a, b]♯
pub fn series_commutator(a: &PowerSeries, b: &PowerSeries) -> Result<PowerSeries> {
    series_moyal(a, b)?.sub(&series_moyal(b, a)?)
}
