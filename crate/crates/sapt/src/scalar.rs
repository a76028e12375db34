//! Exact scalar expressions over momentum, mass, ε, field atoms and the
//! relativistic energy atoms E = √(m²+ξ²), (E+m) and N = (2E(E+m))^(-1/2).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FieldKind {
    V,
    B12,
    B13,
    B23,
}

impl FieldKind {
    /// B_{jk} for axes j,k in 0..3; returns the sign needed to reach the j<k atom.
    pub fn b(j: usize, k: usize) -> Option<(i64, FieldKind)> {
        match (j, k) {
            (0, 1) => Some((1, FieldKind::B12)),
            (1, 0) => Some((-1, FieldKind::B12)),
            (0, 2) => Some((1, FieldKind::B13)),
            (2, 0) => Some((-1, FieldKind::B13)),
            (1, 2) => Some((1, FieldKind::B23)),
            (2, 1) => Some((-1, FieldKind::B23)),
            _ => None,
        }
    }

    pub fn is_magnetic(self) -> bool {
        self != FieldKind::V
    }

    fn name(self) -> &'static str {
        match self {
            FieldKind::V => "V",
            FieldKind::B12 => "B12",
            FieldKind::B13 => "B13",
            FieldKind::B23 => "B23",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FieldAtom {
    pub kind: FieldKind,
    pub deriv: [u32; 3],
    pub pow: u32,
}

/// Everything in a term except the coefficient. Field order fixes the term order.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub xi: [u32; 3],
    pub e_pow: i32,
    pub em_pow: i32,
    pub r_pow: u32,
    pub atoms: Vec<FieldAtom>,
    pub eps_pow: u32,
    pub m_pow: i32,
    pub i_pow: u32,
}

impl Monomial {
    fn times(&self, o: &Monomial) -> Monomial {
        let mut atoms = self.atoms.clone();
        for a in &o.atoms {
            push_atom(&mut atoms, a.kind, a.deriv, a.pow);
        }
        Monomial {
            xi: [self.xi[0] + o.xi[0], self.xi[1] + o.xi[1], self.xi[2] + o.xi[2]],
            e_pow: self.e_pow + o.e_pow,
            em_pow: self.em_pow + o.em_pow,
            r_pow: self.r_pow + o.r_pow,
            atoms,
            eps_pow: self.eps_pow + o.eps_pow,
            m_pow: self.m_pow + o.m_pow,
            i_pow: self.i_pow + o.i_pow,
        }
    }

    fn xi_degree(&self) -> u32 {
        self.xi.iter().sum()
    }
}

fn push_atom(atoms: &mut Vec<FieldAtom>, kind: FieldKind, deriv: [u32; 3], pow: u32) {
    if pow == 0 {
        return;
    }
    match atoms.binary_search_by(|a| (a.kind, a.deriv).cmp(&(kind, deriv))) {
        Ok(i) => atoms[i].pow += pow,
        Err(i) => atoms.insert(i, FieldAtom { kind, deriv, pow }),
    }
}

/// Canonical sum of terms. Structural storage applies the rewrite rules
/// E² → m²+ξ², N² → ½E⁻¹(E+m)⁻¹ and i² → −1; equality goes through
/// [`ScalarExpr::normal_form`], which also resolves the relations between
/// negative powers of E and (E+m).
#[derive(Clone, Debug, Default)]
pub struct ScalarExpr {
    terms: BTreeMap<Monomial, Rat>,
}

impl ScalarExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        Self::term(c, Monomial::default())
    }

    pub fn int(n: i64) -> Self {
        Self::constant(rat(n, 1))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Self::constant(rat(n, d))
    }

    pub fn term(c: Rat, mono: Monomial) -> Self {
        let mut s = Self::zero();
        s.push(mono, c);
        s
    }

    pub fn xi(j: usize) -> Self {
        let mut mono = Monomial::default();
        mono.xi[j] = 1;
        Self::term(Rat::one(), mono)
    }

    /// ξ₁² + ξ₂² + ξ₃²
    pub fn xi_sq() -> Self {
        (0..3).map(|j| Self::xi(j) * Self::xi(j)).sum()
    }

    pub fn m() -> Self {
        Self::m_pow(1)
    }

    pub fn m_pow(p: i32) -> Self {
        Self::term(Rat::one(), Monomial { m_pow: p, ..Default::default() })
    }

    pub fn eps() -> Self {
        Self::term(Rat::one(), Monomial { eps_pow: 1, ..Default::default() })
    }

    pub fn i() -> Self {
        Self::term(Rat::one(), Monomial { i_pow: 1, ..Default::default() })
    }

    pub fn energy() -> Self {
        Self::energy_pow(1)
    }

    pub fn energy_pow(p: i32) -> Self {
        Self::term(Rat::one(), Monomial { e_pow: p, ..Default::default() })
    }

    /// (E+m)^p
    pub fn e_plus_m_pow(p: i32) -> Self {
        Self::term(Rat::one(), Monomial { em_pow: p, ..Default::default() })
    }

    /// N = (2E(E+m))^(-1/2)
    pub fn n_factor() -> Self {
        Self::term(Rat::one(), Monomial { r_pow: 1, ..Default::default() })
    }

    pub fn field(kind: FieldKind, deriv: [u32; 3]) -> Self {
        let mut mono = Monomial::default();
        push_atom(&mut mono.atoms, kind, deriv, 1);
        Self::term(Rat::one(), mono)
    }

    pub fn v() -> Self {
        Self::field(FieldKind::V, [0, 0, 0])
    }

    /// ∂_{x_j} V
    pub fn grad_v(j: usize) -> Self {
        let mut d = [0; 3];
        d[j] = 1;
        Self::field(FieldKind::V, d)
    }

    /// B_{jk} with the antisymmetry folded in; zero on the diagonal.
    pub fn b(j: usize, k: usize) -> Self {
        match FieldKind::b(j, k) {
            Some((s, kind)) => Self::field(kind, [0, 0, 0]).scale(&rat(s, 1)),
            None => Self::zero(),
        }
    }

    /// Component l of the field vector, B_l = ½ ε_{ljk} B_{jk}.
    pub fn b_vec(l: usize) -> Self {
        match l {
            0 => Self::b(1, 2),
            1 => Self::b(2, 0),
            _ => Self::b(0, 1),
        }
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    fn push(&mut self, mut mono: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        if mono.e_pow >= 2 {
            mono.e_pow -= 2;
            let mut mm = mono.clone();
            mm.m_pow += 2;
            self.push(mm, c.clone());
            for j in 0..3 {
                let mut mx = mono.clone();
                mx.xi[j] += 2;
                self.push(mx, c.clone());
            }
            return;
        }
        if mono.r_pow >= 2 {
            mono.r_pow -= 2;
            mono.e_pow -= 1;
            mono.em_pow -= 1;
            self.push(mono, c / rat(2, 1));
            return;
        }
        let mut c = c;
        if mono.i_pow >= 2 {
            if (mono.i_pow / 2) % 2 == 1 {
                c = -c;
            }
            mono.i_pow %= 2;
        }
        mono.atoms.retain(|a| a.pow > 0);
        match self.terms.entry(mono) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect() }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    pub fn conj(&self) -> Self {
        Self { terms: self.terms.iter().map(|(k, v)| (k.clone(), if k.i_pow == 1 { -v.clone() } else { v.clone() })).collect() }
    }

    pub fn d_xi(&self, j: usize) -> Self {
        let mut out = Self::zero();
        for (mono, c) in &self.terms {
            let a = mono.xi[j];
            if a > 0 {
                let mut m2 = mono.clone();
                m2.xi[j] -= 1;
                out.push(m2, c * rat(a as i64, 1));
            }
            if mono.e_pow != 0 {
                let mut m2 = mono.clone();
                m2.xi[j] += 1;
                m2.e_pow -= 2;
                out.push(m2, c * rat(mono.e_pow as i64, 1));
            }
            if mono.em_pow != 0 {
                let mut m2 = mono.clone();
                m2.xi[j] += 1;
                m2.e_pow -= 1;
                m2.em_pow -= 1;
                out.push(m2, c * rat(mono.em_pow as i64, 1));
            }
            if mono.r_pow != 0 {
                // ∂N = −N ξ (2E+m) / (2E²(E+m)), times r for N^r
                let r = rat(mono.r_pow as i64, 1);
                let mut m2 = mono.clone();
                m2.xi[j] += 1;
                m2.e_pow -= 1;
                m2.em_pow -= 1;
                out.push(m2, -(c * &r));
                let mut m3 = mono.clone();
                m3.xi[j] += 1;
                m3.e_pow -= 2;
                m3.em_pow -= 1;
                m3.m_pow += 1;
                out.push(m3, -(c * &r) / rat(2, 1));
            }
        }
        out
    }

    pub fn d_x(&self, j: usize) -> Self {
        let mut out = Self::zero();
        for (mono, c) in &self.terms {
            for (idx, atom) in mono.atoms.iter().enumerate() {
                let mut m2 = mono.clone();
                m2.atoms[idx].pow -= 1;
                let mut d = atom.deriv;
                d[j] += 1;
                let mut atoms: Vec<FieldAtom> = m2.atoms.into_iter().filter(|a| a.pow > 0).collect();
                push_atom(&mut atoms, atom.kind, d, 1);
                m2.atoms = atoms;
                out.push(m2, c * rat(atom.pow as i64, 1));
            }
        }
        out
    }

    /// Drop every term that carries a field atom matching `pred`.
    pub fn drop_fields(&self, pred: impl Fn(FieldKind) -> bool) -> Self {
        Self {
            terms: self.terms.iter().filter(|(k, _)| !k.atoms.iter().any(|a| pred(a.kind))).map(|(k, v)| (k.clone(), v.clone())).collect(),
        }
    }

    pub fn has_fields(&self) -> bool {
        self.terms.keys().any(|k| !k.atoms.is_empty())
    }

    /// True if any term carries E, (E+m) or N, so the ξ-degree is unbounded.
    pub fn has_energy_atoms(&self) -> bool {
        self.terms.keys().any(|k| k.e_pow != 0 || k.em_pow != 0 || k.r_pow != 0)
    }

    /// Degree in ξ, or None when energy atoms make it infinite.
    pub fn xi_degree(&self) -> Option<u32> {
        if self.has_energy_atoms() {
            return None;
        }
        Some(self.terms.keys().map(|k| k.xi_degree()).max().unwrap_or(0))
    }

    pub fn is_xi_free(&self) -> bool {
        self.terms.keys().all(|k| k.xi == [0, 0, 0] && k.e_pow == 0 && k.em_pow == 0 && k.r_pow == 0)
    }

    /// Canonical representative. Within each group of equal (i, ε, fields, N parity)
    /// the value is written as (P₀ + E·P₁)·E^(−2c)·(E+m)^(−b) with b, c minimal.
    pub fn normal_form(&self) -> Self {
        if self.needs_bianchi() {
            return self.bianchi().normal_form();
        }
        if self.is_fast_canonical() {
            return self.clone();
        }
        let mut out = Self::zero();
        for (key, frac) in self.groups() {
            let frac = frac.reduce();
            frac.emit(&key, &mut out);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        if self.needs_bianchi() {
            return self.bianchi().is_zero();
        }
        if self.is_fast_canonical() {
            return self.terms.is_empty();
        }
        self.groups().into_iter().all(|(_, f)| f.p0.is_empty() && f.p1.is_empty())
    }

    fn needs_bianchi(&self) -> bool {
        self.terms.keys().any(|k| k.atoms.iter().any(|a| a.kind == FieldKind::B23 && a.deriv[0] > 0))
    }

    // div B = 0: ∂₁B₂₃ = ∂₂B₁₃ − ∂₃B₁₂, applied until no B₂₃ carries an x₁ derivative.
    fn bianchi(&self) -> Self {
        let mut out = Self::zero();
        let mut work: Vec<(Monomial, Rat)> = self.terms.iter().map(|(k, c)| (k.clone(), c.clone())).collect();
        while let Some((mono, c)) = work.pop() {
            let hit = mono.atoms.iter().position(|a| a.kind == FieldKind::B23 && a.deriv[0] > 0);
            let Some(idx) = hit else {
                out.push(mono, c);
                continue;
            };
            let atom = mono.atoms[idx].clone();
            let mut rest = mono.clone();
            rest.atoms[idx].pow -= 1;
            rest.atoms.retain(|a| a.pow > 0);
            let mut base = atom.deriv;
            base[0] -= 1;
            for (kind, axis, sign) in [(FieldKind::B13, 1, 1), (FieldKind::B12, 2, -1)] {
                let mut d = base;
                d[axis] += 1;
                let mut m2 = rest.clone();
                push_atom(&mut m2.atoms, kind, d, 1);
                work.push((m2, if sign > 0 { c.clone() } else { -c.clone() }));
            }
        }
        out
    }

    fn is_fast_canonical(&self) -> bool {
        self.terms.keys().all(|k| k.e_pow >= 0 && k.em_pow == 0)
    }

    fn groups(&self) -> Vec<(GroupKey, Frac)> {
        let mut map: BTreeMap<GroupKey, Vec<Frac>> = BTreeMap::new();
        for (mono, c) in &self.terms {
            let key = GroupKey { i_pow: mono.i_pow, eps_pow: mono.eps_pow, atoms: mono.atoms.clone(), r_pow: mono.r_pow };
            map.entry(key).or_default().push(Frac::from_term(mono, c));
        }
        map.into_iter()
            .map(|(k, fs)| {
                let b = fs.iter().map(|f| f.b).max().unwrap_or(0);
                let cc = fs.iter().map(|f| f.c).max().unwrap_or(0);
                let mut acc = Frac { b, c: cc, p0: Poly::new(), p1: Poly::new() };
                for f in fs {
                    let f = f.lift(b, cc);
                    poly_add_into(&mut acc.p0, &f.p0);
                    poly_add_into(&mut acc.p1, &f.p1);
                }
                (k, acc)
            })
            .collect()
    }

    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms
            .iter()
            .map(|(k, c)| TermRecord {
                coeff: c.to_string(),
                i_pow: k.i_pow,
                eps_pow: k.eps_pow,
                m_pow: k.m_pow,
                xi_pows: k.xi,
                e_pow: k.e_pow,
                em_pow: k.em_pow,
                r_pow: k.r_pow,
                fields: k.atoms.clone(),
            })
            .collect()
    }

    pub fn from_records(recs: &[TermRecord]) -> Result<Self, String> {
        let mut out = Self::zero();
        for r in recs {
            let c: Rat = r.coeff.parse().map_err(|_| format!("bad rational {:?}", r.coeff))?;
            let mut atoms = Vec::new();
            for a in &r.fields {
                push_atom(&mut atoms, a.kind, a.deriv, a.pow);
            }
            let mono = Monomial {
                xi: r.xi_pows,
                e_pow: r.e_pow,
                em_pow: r.em_pow,
                r_pow: r.r_pow,
                atoms,
                eps_pow: r.eps_pow,
                m_pow: r.m_pow,
                i_pow: r.i_pow,
            };
            out.push(mono, c);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord {
    pub coeff: String,
    #[serde(rename = "i")]
    pub i_pow: u32,
    #[serde(rename = "eps")]
    pub eps_pow: u32,
    #[serde(rename = "m")]
    pub m_pow: i32,
    #[serde(rename = "xi")]
    pub xi_pows: [u32; 3],
    #[serde(rename = "E")]
    pub e_pow: i32,
    #[serde(rename = "Em")]
    pub em_pow: i32,
    #[serde(rename = "R")]
    pub r_pow: u32,
    pub fields: Vec<FieldAtom>,
}

impl Serialize for ScalarExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_records().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ScalarExpr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let recs = Vec::<TermRecord>::deserialize(d)?;
        ScalarExpr::from_records(&recs).map_err(serde::de::Error::custom)
    }
}

// ---- rational normal form ----------------------------------------------

type Poly = BTreeMap<(i32, [u32; 3]), Rat>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct GroupKey {
    i_pow: u32,
    eps_pow: u32,
    atoms: Vec<FieldAtom>,
    r_pow: u32,
}

/// (p0 + E p1) / (s^b q^c) with s = ξ², q = m² + ξ².
#[derive(Clone, Debug)]
struct Frac {
    b: u32,
    c: u32,
    p0: Poly,
    p1: Poly,
}

fn poly_add_into(a: &mut Poly, b: &Poly) {
    for (k, v) in b {
        let e = a.entry(*k).or_insert_with(Rat::zero);
        *e += v;
        if e.is_zero() {
            a.remove(k);
        }
    }
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ka, va) in a {
        for (kb, vb) in b {
            let k = (ka.0 + kb.0, [ka.1[0] + kb.1[0], ka.1[1] + kb.1[1], ka.1[2] + kb.1[2]]);
            let e = out.entry(k).or_insert_with(Rat::zero);
            *e += va * vb;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

fn poly_s() -> Poly {
    let mut p = Poly::new();
    p.insert((0, [2, 0, 0]), Rat::one());
    p.insert((0, [0, 2, 0]), Rat::one());
    p.insert((0, [0, 0, 2]), Rat::one());
    p
}

fn poly_q() -> Poly {
    let mut p = poly_s();
    p.insert((2, [0, 0, 0]), Rat::one());
    p
}

fn poly_m(sign: i64) -> Poly {
    let mut p = Poly::new();
    p.insert((1, [0, 0, 0]), rat(sign, 1));
    p
}

/// Exact division by ξ₁² + r where r is free of ξ₁; None if not divisible.
fn poly_div(p: &Poly, tail: &Poly) -> Option<Poly> {
    let mut rem = p.clone();
    let mut quo = Poly::new();
    loop {
        let key = rem.keys().filter(|k| k.1[0] >= 2).max_by_key(|k| k.1[0]).copied();
        let Some(k) = key else { break };
        let c = rem.remove(&k).unwrap();
        let k2 = (k.0, [k.1[0] - 2, k.1[1], k.1[2]]);
        *quo.entry(k2).or_insert_with(Rat::zero) += &c;
        for (rk, rc) in tail {
            let kk = (k2.0 + rk.0, [k2.1[0] + rk.1[0], k2.1[1] + rk.1[1], k2.1[2] + rk.1[2]]);
            let e = rem.entry(kk).or_insert_with(Rat::zero);
            *e -= &c * rc;
            if e.is_zero() {
                rem.remove(&kk);
            }
        }
    }
    quo.retain(|_, v| !v.is_zero());
    if rem.is_empty() {
        Some(quo)
    } else {
        None
    }
}

fn tail_of(p: &Poly) -> Poly {
    p.iter().filter(|(k, _)| k.1[0] == 0).map(|(k, v)| (*k, v.clone())).collect()
}

impl Frac {
    fn from_term(mono: &Monomial, c: &Rat) -> Frac {
        let mut p0 = Poly::new();
        p0.insert((mono.m_pow, mono.xi), c.clone());
        let mut f = Frac { b: 0, c: 0, p0, p1: Poly::new() };
        let p = mono.e_pow;
        if p > 0 {
            for _ in 0..p {
                f = f.times_e();
            }
        } else if p < 0 {
            let n = (-p) as u32;
            if n.is_multiple_of(2) {
                f.c += n / 2;
            } else {
                f.c += n.div_ceil(2);
                f = f.times_e();
            }
        }
        let q = mono.em_pow;
        if q > 0 {
            for _ in 0..q {
                f = f.times_e_plus(1);
            }
        } else if q < 0 {
            for _ in 0..(-q) {
                f = f.times_e_plus(-1);
            }
            f.b += (-q) as u32;
        }
        f
    }

    fn times_e(self) -> Frac {
        Frac { b: self.b, c: self.c, p0: poly_mul(&self.p1, &poly_q()), p1: self.p0 }
    }

    /// multiply by (E + sign·m)
    fn times_e_plus(self, sign: i64) -> Frac {
        let m = poly_m(sign);
        let mut p0 = poly_mul(&self.p0, &m);
        poly_add_into(&mut p0, &poly_mul(&self.p1, &poly_q()));
        let mut p1 = poly_mul(&self.p1, &m);
        poly_add_into(&mut p1, &self.p0);
        Frac { b: self.b, c: self.c, p0, p1 }
    }

    fn lift(&self, b: u32, c: u32) -> Frac {
        let mut f = self.clone();
        for _ in f.b..b {
            f.p0 = poly_mul(&f.p0, &poly_s());
            f.p1 = poly_mul(&f.p1, &poly_s());
        }
        for _ in f.c..c {
            f.p0 = poly_mul(&f.p0, &poly_q());
            f.p1 = poly_mul(&f.p1, &poly_q());
        }
        f.b = b;
        f.c = c;
        f
    }

    fn reduce(mut self) -> Frac {
        if self.p0.is_empty() && self.p1.is_empty() {
            self.b = 0;
            self.c = 0;
            return self;
        }
        let ts = tail_of(&poly_s());
        let tq = tail_of(&poly_q());
        while self.b > 0 {
            match (poly_div(&self.p0, &ts), poly_div(&self.p1, &ts)) {
                (Some(a), Some(b)) => {
                    self.p0 = a;
                    self.p1 = b;
                    self.b -= 1;
                }
                _ => break,
            }
        }
        while self.c > 0 {
            match (poly_div(&self.p0, &tq), poly_div(&self.p1, &tq)) {
                (Some(a), Some(b)) => {
                    self.p0 = a;
                    self.p1 = b;
                    self.c -= 1;
                }
                _ => break,
            }
        }
        self
    }

    fn emit(&self, key: &GroupKey, out: &mut ScalarExpr) {
        // (p0 + E p1)/s^b = (p0 + E p1)(E+m)^b / s^b · (E+m)^(-b), and the
        // first factor is a polynomial because the value lies in the ring.
        let mut f = Frac { b: 0, c: 0, p0: self.p0.clone(), p1: self.p1.clone() };
        for _ in 0..self.b {
            f = f.times_e_plus(1);
        }
        let ts = tail_of(&poly_s());
        for _ in 0..self.b {
            f.p0 = poly_div(&f.p0, &ts).expect("value outside the localized ring");
            f.p1 = poly_div(&f.p1, &ts).expect("value outside the localized ring");
        }
        let base_e = -2 * self.c as i32;
        for (parity, p) in [(0, &f.p0), (1, &f.p1)] {
            for ((mp, xi), c) in p {
                let mono = Monomial {
                    xi: *xi,
                    e_pow: base_e + parity,
                    em_pow: -(self.b as i32),
                    r_pow: key.r_pow,
                    atoms: key.atoms.clone(),
                    eps_pow: key.eps_pow,
                    m_pow: *mp,
                    i_pow: key.i_pow,
                };
                out.push(mono, c.clone());
            }
        }
    }
}

// ---- operators ----------------------------------------------------------

impl PartialEq for ScalarExpr {
    fn eq(&self, other: &Self) -> bool {
        if self.terms == other.terms {
            return true;
        }
        (self - other).is_zero()
    }
}

impl Eq for ScalarExpr {}

impl<'a> Add<&'a ScalarExpr> for &'a ScalarExpr {
    type Output = ScalarExpr;
    fn add(self, o: &ScalarExpr) -> ScalarExpr {
        let mut out = self.clone();
        out += o;
        out
    }
}

impl Add for ScalarExpr {
    type Output = ScalarExpr;
    fn add(mut self, o: ScalarExpr) -> ScalarExpr {
        self += &o;
        self
    }
}

impl AddAssign<&ScalarExpr> for ScalarExpr {
    fn add_assign(&mut self, o: &ScalarExpr) {
        for (k, v) in &o.terms {
            self.push(k.clone(), v.clone());
        }
    }
}

impl AddAssign for ScalarExpr {
    fn add_assign(&mut self, o: ScalarExpr) {
        for (k, v) in o.terms {
            self.push(k, v);
        }
    }
}

impl SubAssign<&ScalarExpr> for ScalarExpr {
    fn sub_assign(&mut self, o: &ScalarExpr) {
        for (k, v) in &o.terms {
            self.push(k.clone(), -v.clone());
        }
    }
}

impl<'a> Sub<&'a ScalarExpr> for &'a ScalarExpr {
    type Output = ScalarExpr;
    fn sub(self, o: &ScalarExpr) -> ScalarExpr {
        let mut out = self.clone();
        out -= o;
        out
    }
}

impl Sub for ScalarExpr {
    type Output = ScalarExpr;
    fn sub(mut self, o: ScalarExpr) -> ScalarExpr {
        self -= &o;
        self
    }
}

impl Neg for &ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        ScalarExpr { terms: self.terms.iter().map(|(k, v)| (k.clone(), -v.clone())).collect() }
    }
}

impl Neg for ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        -&self
    }
}

impl<'a> Mul<&'a ScalarExpr> for &'a ScalarExpr {
    type Output = ScalarExpr;
    fn mul(self, o: &ScalarExpr) -> ScalarExpr {
        let mut out = ScalarExpr::zero();
        for (ka, va) in &self.terms {
            for (kb, vb) in &o.terms {
                out.push(ka.times(kb), va * vb);
            }
        }
        out
    }
}

impl Mul for ScalarExpr {
    type Output = ScalarExpr;
    fn mul(self, o: ScalarExpr) -> ScalarExpr {
        &self * &o
    }
}

impl std::iter::Sum for ScalarExpr {
    fn sum<I: Iterator<Item = ScalarExpr>>(iter: I) -> Self {
        let mut out = ScalarExpr::zero();
        for x in iter {
            out += x;
        }
        out
    }
}

// ---- display ------------------------------------------------------------

fn sup(p: i64) -> String {
    if p == 1 {
        String::new()
    } else {
        format!("^{p}")
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if self.i_pow == 1 {
            parts.push("i".into());
        }
        if self.eps_pow > 0 {
            parts.push(format!("eps{}", sup(self.eps_pow as i64)));
        }
        if self.m_pow != 0 {
            parts.push(format!("m{}", sup(self.m_pow as i64)));
        }
        for j in 0..3 {
            if self.xi[j] > 0 {
                parts.push(format!("xi{}{}", j + 1, sup(self.xi[j] as i64)));
            }
        }
        if self.e_pow != 0 {
            parts.push(format!("E{}", sup(self.e_pow as i64)));
        }
        if self.em_pow != 0 {
            parts.push(format!("(E+m){}", sup(self.em_pow as i64)));
        }
        if self.r_pow != 0 {
            parts.push(format!("N{}", sup(self.r_pow as i64)));
        }
        for a in &self.atoms {
            let mut s = String::new();
            for (j, &d) in a.deriv.iter().enumerate() {
                for _ in 0..d {
                    s.push_str(&format!("d{}", j + 1));
                }
            }
            if !s.is_empty() {
                s.push(' ');
            }
            s.push_str(a.kind.name());
            parts.push(format!("{s}{}", sup(a.pow as i64)));
        }
        write!(f, "{}", parts.join(" "))
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (mono, c) in &self.terms {
            let neg = c.is_negative();
            let a = c.abs();
            let body = mono.to_string();
            let coeff = if a.is_one() && !body.is_empty() { String::new() } else { a.to_string() };
            let sep = if body.is_empty() || coeff.is_empty() { "" } else { " " };
            match (first, neg) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            write!(f, "{coeff}{sep}{body}")?;
            first = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xi(j: usize) -> ScalarExpr {
        ScalarExpr::xi(j)
    }

    #[test]
    fn additive_identity_and_merge() {
        assert_eq!(&xi(0) + &ScalarExpr::zero(), xi(0));
        let half = xi(0).scale(&rat(1, 2));
        let s = &half + &half;
        assert_eq!(s.len(), 1);
        assert_eq!(s, xi(0));
    }

    #[test]
    fn energy_square_rewrites() {
        let e = ScalarExpr::energy();
        let sq = &e * &e;
        let want = &ScalarExpr::m_pow(2) + &ScalarExpr::xi_sq();
        assert_eq!(sq.len(), 4);
        assert_eq!(sq, want);
        let diff = &sq - &ScalarExpr::m_pow(2);
        assert_eq!(diff.len(), 3);
        assert!(diff.terms().all(|(k, _)| k.e_pow == 0));
    }

    #[test]
    fn n_square_and_i_square() {
        let n = ScalarExpr::n_factor();
        let want = (&ScalarExpr::energy_pow(-1) * &ScalarExpr::e_plus_m_pow(-1)).scale(&rat(1, 2));
        assert_eq!(&n * &n, want);
        assert_eq!(&ScalarExpr::i() * &ScalarExpr::i(), ScalarExpr::int(-1));
    }

    #[test]
    fn derivative_rules() {
        let e = ScalarExpr::energy();
        assert_eq!(e.d_xi(0), &xi(0) * &ScalarExpr::energy_pow(-1));
        assert!(ScalarExpr::v().d_xi(0).is_zero());
        assert_eq!((&xi(0) * &xi(0)).d_xi(0), xi(0).scale(&rat(2, 1)));
        let em = ScalarExpr::e_plus_m_pow(-1);
        let want = -(&(&xi(1) * &ScalarExpr::energy_pow(-1)) * &ScalarExpr::e_plus_m_pow(-2));
        assert_eq!(em.d_xi(1), want);
    }

    #[test]
    fn n_derivative_matches_square() {
        // ∂(N²) = 2N ∂N must agree with ∂(½E⁻¹(E+m)⁻¹)
        let n = ScalarExpr::n_factor();
        let lhs = (&n * &n.d_xi(2)).scale(&rat(2, 1));
        let rhs = (&ScalarExpr::energy_pow(-1) * &ScalarExpr::e_plus_m_pow(-1)).scale(&rat(1, 2)).d_xi(2);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn x_derivatives() {
        let v = ScalarExpr::v();
        assert_eq!(v.d_x(0), ScalarExpr::field(FieldKind::V, [1, 0, 0]));
        assert!(xi(0).d_x(0).is_zero());
        let b = ScalarExpr::field(FieldKind::B12, [0, 0, 0]);
        let prod = &v * &b;
        let want = &(&v.d_x(1) * &b) + &(&v * &b.d_x(1));
        assert_eq!(prod.d_x(1), want);
        let v2 = &v * &v;
        assert_eq!(v2.d_x(0), (&v * &v.d_x(0)).scale(&rat(2, 1)));
    }

    #[test]
    fn conj_flips_i_only() {
        let a = &ScalarExpr::i() * &xi(0);
        assert_eq!(a.conj(), -&a);
        let ei = ScalarExpr::energy_pow(-1);
        assert_eq!(ei.conj(), ei);
        assert_eq!(a.conj().conj(), a);
    }

    #[test]
    fn b_antisymmetry() {
        assert_eq!(ScalarExpr::b(1, 0), -&ScalarExpr::b(0, 1));
        assert!(ScalarExpr::b(2, 2).is_zero());
    }

    #[test]
    fn localized_relations_are_zero() {
        // ξ²(E+m)⁻¹ = E − m
        let lhs = &ScalarExpr::xi_sq() * &ScalarExpr::e_plus_m_pow(-1);
        let rhs = &ScalarExpr::energy() - &ScalarExpr::m();
        assert_ne!(lhs.to_records(), rhs.to_records());
        assert_eq!(lhs, rhs);
        assert_eq!(lhs.normal_form().to_records(), rhs.normal_form().to_records());
        // E⁻¹ (m² + ξ²) = E
        let lhs = &ScalarExpr::energy_pow(-1) * &(&ScalarExpr::m_pow(2) + &ScalarExpr::xi_sq());
        assert_eq!(lhs, ScalarExpr::energy());
        // (E+m)(E+m)⁻¹ stays 1 structurally
        let one = &ScalarExpr::e_plus_m_pow(1) * &ScalarExpr::e_plus_m_pow(-1);
        assert_eq!(one.to_records(), ScalarExpr::one().to_records());
        // E⁻¹ is not E
        assert_ne!(ScalarExpr::energy_pow(-1), ScalarExpr::energy());
    }

    #[test]
    fn normal_form_is_idempotent() {
        let x = &(&ScalarExpr::xi_sq() * &ScalarExpr::e_plus_m_pow(-2)) + &(&ScalarExpr::n_factor() * &ScalarExpr::energy_pow(-3));
        let n1 = x.normal_form();
        let n2 = n1.normal_form();
        assert_eq!(n1.to_records(), n2.to_records());
        assert_eq!(n1, x);
    }

    #[test]
    fn json_round_trip() {
        let x = &(&ScalarExpr::xi_sq() * &ScalarExpr::e_plus_m_pow(-2)).scale(&rat(-3, 7))
            + &(&ScalarExpr::i() * &ScalarExpr::field(FieldKind::B13, [0, 2, 1]));
        let s = serde_json::to_string(&x).unwrap();
        let y: ScalarExpr = serde_json::from_str(&s).unwrap();
        assert_eq!(x.to_records(), y.to_records());
        assert_eq!(serde_json::to_string(&y).unwrap(), s);
        assert!(s.contains("\"-3/7\""));
    }

    #[test]
    fn display_is_readable() {
        let x = &xi(0).scale(&rat(-1, 2)) + &ScalarExpr::m_pow(-1);
        let s = x.to_string();
        assert!(s.contains("xi1"));
        assert!(s.contains("m^-1"));
    }
}
