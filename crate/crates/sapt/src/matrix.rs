//! 4×4 matrix symbols over [`ScalarExpr`] in the Dirac representation, and
//! truncated power series in 1/c with matrix coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SaptError};
use crate::scalar::{rat, FieldKind, Rat, ScalarExpr};

#[derive(Clone, Debug)]
pub struct MatrixSymbol {
    e: [[ScalarExpr; 4]; 4],
}

type Cplx = (i64, i64);

fn from_ints(m: [[Cplx; 4]; 4]) -> MatrixSymbol {
    let mut out = MatrixSymbol::zero();
    for (r, row) in m.iter().enumerate() {
        for (c, &(re, im)) in row.iter().enumerate() {
            out.e[r][c] = &ScalarExpr::int(re) + &ScalarExpr::i().scale(&rat(im, 1));
        }
    }
    out
}

fn pauli(j: usize) -> [[Cplx; 2]; 2] {
    match j {
        0 => [[(0, 0), (1, 0)], [(1, 0), (0, 0)]],
        1 => [[(0, 0), (0, -1)], [(0, 1), (0, 0)]],
        _ => [[(1, 0), (0, 0)], [(0, 0), (-1, 0)]],
    }
}

impl MatrixSymbol {
    pub fn zero() -> Self {
        Self { e: std::array::from_fn(|_| std::array::from_fn(|_| ScalarExpr::zero())) }
    }

    pub fn identity() -> Self {
        Self::diag([1, 1, 1, 1])
    }

    fn diag(d: [i64; 4]) -> Self {
        let mut out = Self::zero();
        for (k, v) in d.iter().enumerate() {
            out.e[k][k] = ScalarExpr::int(*v);
        }
        out
    }

    pub fn beta() -> Self {
        Self::diag([1, 1, -1, -1])
    }

    pub fn alpha(j: usize) -> Self {
        let s = pauli(j);
        let mut m = [[(0, 0); 4]; 4];
        for r in 0..2 {
            for c in 0..2 {
                m[r][c + 2] = s[r][c];
                m[r + 2][c] = s[r][c];
            }
        }
        from_ints(m)
    }

    /// Σ_j = σ_j ⊕ σ_j
    pub fn spin(j: usize) -> Self {
        let s = pauli(j);
        let mut m = [[(0, 0); 4]; 4];
        for r in 0..2 {
            for c in 0..2 {
                m[r][c] = s[r][c];
                m[r + 2][c + 2] = s[r][c];
            }
        }
        from_ints(m)
    }

    /// σ_j ⊕ 0 on the electronic block
    pub fn sigma_el(j: usize) -> Self {
        let s = pauli(j);
        let mut m = [[(0, 0); 4]; 4];
        for r in 0..2 {
            for c in 0..2 {
                m[r][c] = s[r][c];
            }
        }
        from_ints(m)
    }

    pub fn gamma5() -> Self {
        let mut m = [[(0, 0); 4]; 4];
        for k in 0..2 {
            m[k][k + 2] = (1, 0);
            m[k + 2][k] = (1, 0);
        }
        from_ints(m)
    }

    pub fn pi_ref() -> Self {
        Self::diag([1, 1, 0, 0])
    }

    pub fn scalar(s: ScalarExpr) -> Self {
        Self::identity().scale(&s)
    }

    /// ξ·α
    pub fn xi_alpha() -> Self {
        (0..3).map(|j| Self::alpha(j).scale(&ScalarExpr::xi(j))).fold(Self::zero(), |a, b| &a + &b)
    }

    /// B·Σ with B₁ = B₂₃, B₂ = −B₁₃, B₃ = B₁₂
    pub fn b_spin() -> Self {
        (0..3).map(|l| Self::spin(l).scale(&ScalarExpr::b_vec(l))).fold(Self::zero(), |a, b| &a + &b)
    }

    /// B·σ ⊕ 0
    pub fn b_sigma_el() -> Self {
        (0..3).map(|l| Self::sigma_el(l).scale(&ScalarExpr::b_vec(l))).fold(Self::zero(), |a, b| &a + &b)
    }

    /// ∇V·α
    pub fn grad_v_alpha() -> Self {
        (0..3).map(|j| Self::alpha(j).scale(&ScalarExpr::grad_v(j))).fold(Self::zero(), |a, b| &a + &b)
    }

    /// (∇V ∧ ξ)·σ ⊕ 0
    pub fn grad_v_cross_xi_sigma_el() -> Self {
        let mut out = Self::zero();
        for l in 0..3 {
            let (a, b) = ((l + 1) % 3, (l + 2) % 3);
            let comp = &(&ScalarExpr::grad_v(a) * &ScalarExpr::xi(b)) - &(&ScalarExpr::grad_v(b) * &ScalarExpr::xi(a));
            out = &out + &Self::sigma_el(l).scale(&comp);
        }
        out
    }

    /// ΔV
    pub fn laplace_v() -> ScalarExpr {
        (0..3)
            .map(|j| {
                let mut d = [0; 3];
                d[j] = 2;
                ScalarExpr::field(FieldKind::V, d)
            })
            .sum()
    }

    pub fn h0_sr() -> Self {
        &Self::beta().scale(&ScalarExpr::m()) + &Self::xi_alpha()
    }

    /// π₀(ξ) = ½(1 + (mβ + ξ·α)/E)
    pub fn pi0_sr() -> Self {
        let half = ScalarExpr::frac(1, 2);
        &Self::scalar(half.clone()) + &Self::h0_sr().scale(&(&half * &ScalarExpr::energy_pow(-1)))
    }

    /// u₀(ξ) = N((E+m) − (ξ·α)β)
    pub fn u0_sr() -> Self {
        let a = Self::scalar(ScalarExpr::e_plus_m_pow(1));
        (&a - &(&Self::xi_alpha() * &Self::beta())).scale(&ScalarExpr::n_factor())
    }

    pub fn get(&self, r: usize, c: usize) -> &ScalarExpr {
        &self.e[r][c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: ScalarExpr) {
        self.e[r][c] = v;
    }

    pub fn map(&self, f: impl Fn(&ScalarExpr) -> ScalarExpr) -> Self {
        Self { e: std::array::from_fn(|r| std::array::from_fn(|c| f(&self.e[r][c]))) }
    }

    pub fn scale(&self, s: &ScalarExpr) -> Self {
        self.map(|x| x * s)
    }

    pub fn scale_rat(&self, c: &Rat) -> Self {
        self.map(|x| x.scale(c))
    }

    pub fn dagger(&self) -> Self {
        Self { e: std::array::from_fn(|r| std::array::from_fn(|c| self.e[c][r].conj())) }
    }

    pub fn d_xi(&self, j: usize) -> Self {
        self.map(|x| x.d_xi(j))
    }

    pub fn d_x(&self, j: usize) -> Self {
        self.map(|x| x.d_x(j))
    }

    pub fn normal_form(&self) -> Self {
        self.map(|x| x.normal_form())
    }

    pub fn is_zero(&self) -> bool {
        self.e.iter().flatten().all(|x| x.is_zero())
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.e.iter().flatten().all(|x| x.is_structurally_zero())
    }

    pub fn entries(&self) -> impl Iterator<Item = &ScalarExpr> {
        self.e.iter().flatten()
    }

    pub fn has_fields(&self) -> bool {
        self.entries().any(|x| x.has_fields())
    }

    pub fn has_energy_atoms(&self) -> bool {
        self.entries().any(|x| x.has_energy_atoms())
    }

    pub fn is_xi_free(&self) -> bool {
        self.entries().all(|x| x.is_xi_free())
    }

    /// Largest ξ-degree over the entries, None if unbounded.
    pub fn xi_degree(&self) -> Option<u32> {
        let mut d = 0;
        for x in self.entries() {
            d = d.max(x.xi_degree()?);
        }
        Some(d)
    }

    pub fn drop_fields(&self, pred: impl Fn(FieldKind) -> bool + Copy) -> Self {
        self.map(|x| x.drop_fields(pred))
    }

    pub fn commutator(&self, o: &Self) -> Self {
        &(self * o) - &(o * self)
    }

    /// p a p + (1−p) a (1−p)
    pub fn block_diag_wrt(&self, p: &Self) -> Self {
        let q = &Self::identity() - p;
        &(&(p * self) * p) + &(&(&q * self) * &q)
    }

    pub fn block_offdiag_wrt(&self, p: &Self) -> Self {
        self - &self.block_diag_wrt(p)
    }

    pub fn block_diag(&self) -> Self {
        self.block_diag_wrt(&Self::pi_ref())
    }

    pub fn block_offdiag(&self) -> Self {
        self.block_offdiag_wrt(&Self::pi_ref())
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("matrix symbol serializes")
    }

    /// Coefficients in the 16-element Dirac basis, c_A = tr(Γ_A† M)/4.
    pub fn dirac_decompose(&self) -> Vec<(&'static str, ScalarExpr)> {
        dirac_basis()
            .into_iter()
            .map(|(name, g)| {
                let prod = &g.dagger() * self;
                let tr: ScalarExpr = (0..4).map(|k| prod.e[k][k].clone()).sum();
                (name, tr.scale(&rat(1, 4)).normal_form())
            })
            .filter(|(_, c)| !c.is_zero())
            .collect()
    }

    pub fn to_latex(&self) -> String {
        let mut rows = Vec::new();
        for r in 0..4 {
            let cells: Vec<String> = (0..4).map(|c| scalar_latex(&self.e[r][c])).collect();
            rows.push(cells.join(" & "));
        }
        format!("\\begin{{pmatrix}} {} \\end{{pmatrix}}", rows.join(" \\\\ "))
    }

    /// Readable sum over Dirac basis elements, folding ξ·α, B·Σ and σ patterns.
    pub fn to_latex_dirac(&self) -> String {
        let parts = self.dirac_decompose();
        if parts.is_empty() {
            return "0".into();
        }
        let mut out: Vec<String> = Vec::new();
        for (name, c) in parts {
            out.push(format!("\\left({}\\right){}", scalar_latex(&c), basis_latex(name)));
        }
        out.join(" + ")
    }
}

fn basis_latex(name: &str) -> String {
    match name {
        "1" => String::new(),
        "beta" => "\\beta".into(),
        "gamma5" => "\\gamma_5".into(),
        "beta gamma5" => "\\beta\\gamma_5".into(),
        _ => {
            let (head, j) = name.split_at(name.len() - 1);
            match head {
                "alpha" => format!("\\alpha_{j}"),
                "beta alpha" => format!("\\beta\\alpha_{j}"),
                "Sigma" => format!("\\Sigma_{j}"),
                _ => format!("\\beta\\Sigma_{j}"),
            }
        }
    }
}

pub fn dirac_basis() -> Vec<(&'static str, MatrixSymbol)> {
    let b = MatrixSymbol::beta();
    let g5 = MatrixSymbol::gamma5();
    let names_a = ["alpha1", "alpha2", "alpha3"];
    let names_ba = ["beta alpha1", "beta alpha2", "beta alpha3"];
    let names_s = ["Sigma1", "Sigma2", "Sigma3"];
    let names_bs = ["beta Sigma1", "beta Sigma2", "beta Sigma3"];
    let mut out = vec![("1", MatrixSymbol::identity()), ("beta", b.clone()), ("gamma5", g5.clone()), ("beta gamma5", &b * &g5)];
    for j in 0..3 {
        out.push((names_a[j], MatrixSymbol::alpha(j)));
        out.push((names_ba[j], &b * &MatrixSymbol::alpha(j)));
        out.push((names_s[j], MatrixSymbol::spin(j)));
        out.push((names_bs[j], &b * &MatrixSymbol::spin(j)));
    }
    out
}

pub fn scalar_latex(s: &ScalarExpr) -> String {
    if s.is_structurally_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (k, (mono, c)) in s.terms().enumerate() {
        let neg = c < &Rat::from_integer(0.into());
        let a = if neg { -c.clone() } else { c.clone() };
        if k == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mut factors: Vec<String> = Vec::new();
        if mono.i_pow == 1 {
            factors.push("i".into());
        }
        if mono.eps_pow > 0 {
            factors.push(pow_tex("\\varepsilon", mono.eps_pow as i64));
        }
        if mono.m_pow != 0 {
            factors.push(pow_tex("m", mono.m_pow as i64));
        }
        for j in 0..3 {
            if mono.xi[j] > 0 {
                factors.push(pow_tex(&format!("\\xi_{}", j + 1), mono.xi[j] as i64));
            }
        }
        if mono.e_pow != 0 {
            factors.push(pow_tex("E", mono.e_pow as i64));
        }
        if mono.em_pow != 0 {
            factors.push(pow_tex("(E+m)", mono.em_pow as i64));
        }
        if mono.r_pow != 0 {
            factors.push(pow_tex("N", mono.r_pow as i64));
        }
        for at in &mono.atoms {
            let base = match at.kind {
                FieldKind::V => "V".to_string(),
                FieldKind::B12 => "B_{12}".into(),
                FieldKind::B13 => "B_{13}".into(),
                FieldKind::B23 => "B_{23}".into(),
            };
            let mut d = String::new();
            for (j, &n) in at.deriv.iter().enumerate() {
                if n > 0 {
                    d.push_str(&pow_tex(&format!("\\partial_{{x_{}}}", j + 1), n as i64));
                }
            }
            let atom = if d.is_empty() { base } else { format!("({d} {base})") };
            factors.push(pow_tex(&atom, at.pow as i64));
        }
        let coeff = if *a.denom() == 1.into() { a.numer().to_string() } else { format!("\\tfrac{{{}}}{{{}}}", a.numer(), a.denom()) };
        if factors.is_empty() || coeff != "1" {
            factors.insert(0, coeff);
        }
        out.push_str(&factors.join(" "));
    }
    out
}

fn pow_tex(base: &str, p: i64) -> String {
    if p == 1 {
        base.to_string()
    } else {
        format!("{base}^{{{p}}}")
    }
}

impl PartialEq for MatrixSymbol {
    fn eq(&self, o: &Self) -> bool {
        (0..4).all(|r| (0..4).all(|c| self.e[r][c] == o.e[r][c]))
    }
}

impl<'a> Add<&'a MatrixSymbol> for &'a MatrixSymbol {
    type Output = MatrixSymbol;
    fn add(self, o: &MatrixSymbol) -> MatrixSymbol {
        MatrixSymbol { e: std::array::from_fn(|r| std::array::from_fn(|c| &self.e[r][c] + &o.e[r][c])) }
    }
}

impl<'a> Sub<&'a MatrixSymbol> for &'a MatrixSymbol {
    type Output = MatrixSymbol;
    fn sub(self, o: &MatrixSymbol) -> MatrixSymbol {
        MatrixSymbol { e: std::array::from_fn(|r| std::array::from_fn(|c| &self.e[r][c] - &o.e[r][c])) }
    }
}

impl Neg for &MatrixSymbol {
    type Output = MatrixSymbol;
    fn neg(self) -> MatrixSymbol {
        self.map(|x| -x)
    }
}

impl<'a> Mul<&'a MatrixSymbol> for &'a MatrixSymbol {
    type Output = MatrixSymbol;
    fn mul(self, o: &MatrixSymbol) -> MatrixSymbol {
        let mut out = MatrixSymbol::zero();
        for r in 0..4 {
            for c in 0..4 {
                let mut acc = ScalarExpr::zero();
                for k in 0..4 {
                    if self.e[r][k].is_structurally_zero() || o.e[k][c].is_structurally_zero() {
                        continue;
                    }
                    acc += &self.e[r][k] * &o.e[k][c];
                }
                out.e[r][c] = acc;
            }
        }
        out
    }
}

impl Serialize for MatrixSymbol {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.e.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatrixSymbol {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<Vec<ScalarExpr>>::deserialize(d)?;
        if v.len() != 4 || v.iter().any(|r| r.len() != 4) {
            return Err(serde::de::Error::custom("matrix symbol must be 4x4"));
        }
        let mut out = MatrixSymbol::zero();
        for (r, row) in v.into_iter().enumerate() {
            for (c, x) in row.into_iter().enumerate() {
                out.e[r][c] = x;
            }
        }
        Ok(out)
    }
}

impl fmt::Display for MatrixSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..4 {
            let cells: Vec<String> = (0..4).map(|c| self.e[r][c].to_string()).collect();
            writeln!(f, "[{}]", cells.join(" | "))?;
        }
        Ok(())
    }
}

// ---- power series -------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    Sr,
    Nr,
}

impl Scaling {
    pub fn name(self) -> &'static str {
        match self {
            Scaling::Sr => "sr",
            Scaling::Nr => "nr",
        }
    }
}

impl std::str::FromStr for Scaling {
    type Err = SaptError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sr" => Ok(Scaling::Sr),
            "nr" => Ok(Scaling::Nr),
            _ => Err(SaptError::Config(format!("unknown scaling `{s}`"))),
        }
    }
}

/// Σ_{n≤K} c⁻ⁿ Mₙ; absent orders are zero.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PowerSeries {
    pub scaling: Scaling,
    pub truncation: usize,
    #[serde(rename = "orders", with = "order_map")]
    coeffs: BTreeMap<usize, MatrixSymbol>,
}

mod order_map {
    use super::MatrixSymbol;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer>(m: &BTreeMap<usize, MatrixSymbol>, s: S) -> Result<S::Ok, S::Error> {
        let sm: BTreeMap<String, &MatrixSymbol> = m.iter().map(|(k, v)| (k.to_string(), v)).collect();
        sm.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<usize, MatrixSymbol>, D::Error> {
        let sm = BTreeMap::<String, MatrixSymbol>::deserialize(d)?;
        sm.into_iter().map(|(k, v)| k.parse::<usize>().map(|k| (k, v)).map_err(serde::de::Error::custom)).collect()
    }
}

impl PowerSeries {
    pub fn new(scaling: Scaling, truncation: usize) -> Self {
        Self { scaling, truncation, coeffs: BTreeMap::new() }
    }

    pub fn constant(scaling: Scaling, truncation: usize, m: MatrixSymbol) -> Self {
        let mut s = Self::new(scaling, truncation);
        s.set(0, m);
        s
    }

    pub fn identity(scaling: Scaling, truncation: usize) -> Self {
        Self::constant(scaling, truncation, MatrixSymbol::identity())
    }

    pub fn get(&self, n: usize) -> MatrixSymbol {
        self.coeffs.get(&n).cloned().unwrap_or_else(MatrixSymbol::zero)
    }

    pub fn get_ref(&self, n: usize) -> Option<&MatrixSymbol> {
        self.coeffs.get(&n)
    }

    /// Orders above the truncation are dropped.
    pub fn set(&mut self, n: usize, m: MatrixSymbol) {
        if n > self.truncation {
            return;
        }
        if m.is_structurally_zero() {
            self.coeffs.remove(&n);
        } else {
            self.coeffs.insert(n, m);
        }
    }

    pub fn orders(&self) -> impl Iterator<Item = (usize, &MatrixSymbol)> {
        self.coeffs.iter().map(|(k, v)| (*k, v))
    }

    pub fn with_truncation(&self, k: usize) -> Self {
        let mut s = Self::new(self.scaling, k);
        for (n, m) in self.orders() {
            s.set(n, m.clone());
        }
        s
    }

    pub fn map(&self, f: impl Fn(&MatrixSymbol) -> MatrixSymbol) -> Self {
        let mut s = Self::new(self.scaling, self.truncation);
        for (n, m) in self.orders() {
            s.set(n, f(m));
        }
        s
    }

    pub fn dagger(&self) -> Self {
        self.map(|m| m.dagger())
    }

    pub fn normal_form(&self) -> Self {
        self.map(|m| m.normal_form())
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.scaling != o.scaling {
            return Err(SaptError::ScalingMismatch);
        }
        if self.truncation != o.truncation {
            return Err(SaptError::TruncationMismatch(self.truncation, o.truncation));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let mut s = self.clone();
        for (n, m) in o.orders() {
            s.set(n, &s.get(n) + m);
        }
        Ok(s)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let mut s = self.clone();
        for (n, m) in o.orders() {
            s.set(n, &s.get(n) - m);
        }
        Ok(s)
    }

    pub fn mul_pointwise(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let mut s = Self::new(self.scaling, self.truncation);
        for (j, a) in self.orders() {
            for (l, b) in o.orders() {
                if j + l <= self.truncation {
                    s.set(j + l, &s.get(j + l) + &(a * b));
                }
            }
        }
        Ok(s)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|m| m.is_zero())
    }
}

impl PartialEq for PowerSeries {
    fn eq(&self, o: &Self) -> bool {
        self.scaling == o.scaling && self.truncation == o.truncation && (0..=self.truncation).all(|n| self.get(n) == o.get(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(j: usize) -> MatrixSymbol {
        MatrixSymbol::alpha(j)
    }

    #[test]
    fn clifford_relations() {
        let one = MatrixSymbol::identity();
        let b = MatrixSymbol::beta();
        for j in 0..3 {
            for k in 0..3 {
                let anti = &(&a(j) * &a(k)) + &(&a(k) * &a(j));
                let want = if j == k { one.scale_rat(&rat(2, 1)) } else { MatrixSymbol::zero() };
                assert_eq!(anti, want);
            }
            assert!((&(&a(j) * &b) + &(&b * &a(j))).is_zero());
        }
        assert_eq!(&b * &b, one);
        assert_eq!(&a(0) * &a(0), one);
    }

    #[test]
    fn pi_ref_properties() {
        let p = MatrixSymbol::pi_ref();
        assert_eq!(&p * &p, p);
        assert_eq!(&MatrixSymbol::beta() * &p, p);
    }

    #[test]
    fn xi_alpha_squares_to_xi_sq() {
        let x = MatrixSymbol::xi_alpha();
        assert_eq!(&x * &x, MatrixSymbol::scalar(ScalarExpr::xi_sq()));
    }

    #[test]
    fn dagger_examples() {
        for j in 0..3 {
            assert_eq!(a(j).dagger(), a(j));
        }
        let ib = MatrixSymbol::beta().scale(&ScalarExpr::i());
        assert_eq!(ib.dagger(), -&ib);
        let u1 = (&MatrixSymbol::xi_alpha() * &MatrixSymbol::beta()).scale(&ScalarExpr::m_pow(-1).scale(&rat(-1, 2)));
        assert_eq!(u1.dagger(), -&u1);
    }

    #[test]
    fn block_split() {
        let b = MatrixSymbol::beta();
        assert_eq!(b.block_diag(), b);
        let x = MatrixSymbol::xi_alpha();
        assert_eq!(x.block_offdiag(), x);
        assert!(x.block_diag().is_zero());
        let mixed = &x + &b;
        assert_eq!(&mixed.block_diag() + &mixed.block_offdiag(), mixed);
        assert_eq!(mixed.block_diag().block_diag(), mixed.block_diag());
    }

    #[test]
    fn closure_of_basis_products() {
        let gens: Vec<MatrixSymbol> = std::iter::once(MatrixSymbol::identity())
            .chain(std::iter::once(MatrixSymbol::beta()))
            .chain((0..3).map(a))
            .chain((0..3).map(MatrixSymbol::spin))
            .collect();
        let basis = dirac_basis();
        for x in &gens {
            for y in &gens {
                let p = x * y;
                let parts = p.dirac_decompose();
                let mut rebuilt = MatrixSymbol::zero();
                for (name, c) in &parts {
                    // coefficients are Gaussian integers
                    for (mono, r) in c.terms() {
                        assert!(r.is_integer(), "{name}: {r}");
                        assert_eq!(mono.xi, [0, 0, 0]);
                    }
                    let g = &basis.iter().find(|(n, _)| n == name).unwrap().1;
                    rebuilt = &rebuilt + &g.scale(c);
                }
                assert_eq!(rebuilt, p);
            }
        }
    }

    #[test]
    fn free_fw_identities() {
        let u0 = MatrixSymbol::u0_sr();
        let p0 = MatrixSymbol::pi0_sr();
        assert_eq!(&p0 * &p0, p0);
        assert_eq!(&u0 * &u0.dagger(), MatrixSymbol::identity());
        assert_eq!(&(&u0 * &p0) * &u0.dagger(), MatrixSymbol::pi_ref());
        let h = &(&u0 * &MatrixSymbol::h0_sr()) * &u0.dagger();
        assert_eq!(h, MatrixSymbol::beta().scale(&ScalarExpr::energy()));
    }

    #[test]
    fn series_pointwise_product() {
        let x = MatrixSymbol::xi_alpha();
        let mut p = PowerSeries::identity(Scaling::Nr, 1);
        p.set(1, x.clone());
        let mut q = PowerSeries::identity(Scaling::Nr, 1);
        q.set(1, -&x);
        let r = p.mul_pointwise(&q).unwrap();
        assert_eq!(r, PowerSeries::identity(Scaling::Nr, 1));
        let id = PowerSeries::identity(Scaling::Nr, 1);
        assert_eq!(id.mul_pointwise(&p).unwrap(), p);
        let other = PowerSeries::identity(Scaling::Nr, 2);
        assert!(matches!(p.mul_pointwise(&other), Err(SaptError::TruncationMismatch(1, 2))));
    }

    #[test]
    fn series_json_round_trip() {
        let mut p = PowerSeries::constant(Scaling::Sr, 3, MatrixSymbol::pi0_sr());
        p.set(2, MatrixSymbol::b_spin());
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"scaling\":\"sr\""));
        assert!(s.contains("\"orders\""));
        let q: PowerSeries = serde_json::from_str(&s).unwrap();
        assert_eq!(serde_json::to_string(&q).unwrap(), s);
    }
}
