//! Exact symbols with numbers bound to m, ε and c, compiled for fast sampling.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::ToPrimitive;

use super::geometry::Geometry;
use crate::matrix::{MatrixSymbol, PowerSeries};
use crate::scalar::FieldKind;

/// Linear combination Σ wᵢ·symᵢ with real weights, typically wᵢ = c⁻ⁿ.
#[derive(Clone, Debug, Default)]
pub struct NumericSymbol {
    pub parts: Vec<(f64, MatrixSymbol)>,
}

impl NumericSymbol {
    pub fn new(sym: MatrixSymbol) -> Self {
        NumericSymbol { parts: vec![(1.0, sym)] }
    }

    pub fn weighted(w: f64, sym: MatrixSymbol) -> Self {
        NumericSymbol { parts: vec![(w, sym)] }
    }

    /// Σₙ c⁻ⁿ sₙ
    pub fn from_series(s: &PowerSeries, c: f64) -> Self {
        NumericSymbol { parts: s.orders().map(|(n, m)| (c.powi(-(n as i32)), m.clone())).collect() }
    }

    pub fn plus(mut self, o: NumericSymbol) -> Self {
        self.parts.extend(o.parts);
        self
    }

    pub fn map(&self, f: impl Fn(&MatrixSymbol) -> MatrixSymbol) -> Self {
        NumericSymbol { parts: self.parts.iter().map(|(w, s)| (*w, f(s))).collect() }
    }

    pub fn dagger(&self) -> Self {
        self.map(MatrixSymbol::dagger)
    }

    pub fn has_energy_atoms(&self) -> bool {
        self.parts.iter().any(|(_, s)| s.has_energy_atoms())
    }

    pub fn has_fields(&self) -> bool {
        self.parts.iter().any(|(_, s)| s.has_fields())
    }

    pub fn xi_degree(&self, axis: usize) -> Option<u32> {
        let mut best = 0;
        for (_, s) in &self.parts {
            if s.has_energy_atoms() {
                return None;
            }
            for e in s.entries() {
                for (mono, _) in e.terms() {
                    best = best.max(mono.xi[axis]);
                }
            }
        }
        Some(best)
    }

    /// whether any entry depends on ξ₂ or ξ₃
    pub fn depends_on_perp(&self) -> bool {
        self.parts.iter().any(|(_, s)| {
            s.entries().any(|e| e.terms().any(|(m, _)| m.xi[1] > 0 || m.xi[2] > 0 || m.e_pow != 0 || m.em_pow != 0 || m.r_pow != 0))
        })
    }
}

#[derive(Clone, Debug)]
pub(crate) struct NumTerm {
    pub coeff: Complex64,
    pub xi: [u32; 3],
    pub e_pow: i32,
    pub em_pow: i32,
    pub r_pow: u32,
    /// (index into the atom table, power)
    pub atoms: Vec<(usize, u32)>,
}

/// All sixteen entries flattened to numeric terms, with a shared table of the
/// distinct field atoms they use.
#[derive(Clone, Debug)]
pub(crate) struct Compiled {
    pub entries: Vec<Vec<NumTerm>>,
    pub atoms: Vec<(FieldKind, [u32; 3])>,
}

impl Compiled {
    pub fn new(sym: &NumericSymbol, mass: f64, eps: f64) -> Self {
        let mut atom_ix: BTreeMap<(FieldKind, [u32; 3]), usize> = BTreeMap::new();
        let mut atoms = Vec::new();
        let mut entries: Vec<Vec<NumTerm>> = vec![Vec::new(); 16];
        for (w, s) in &sym.parts {
            for r in 0..4 {
                for c in 0..4 {
                    for (mono, q) in s.get(r, c).terms() {
                        let mut z = Complex64::new(w * q.to_f64().unwrap_or(f64::NAN), 0.0);
                        z *= eps.powi(mono.eps_pow as i32) * mass.powi(mono.m_pow);
                        if mono.i_pow % 2 == 1 {
                            z *= Complex64::i();
                        }
                        let ts = mono
                            .atoms
                            .iter()
                            .map(|a| {
                                let key = (a.kind, a.deriv);
                                let ix = *atom_ix.entry(key).or_insert_with(|| {
                                    atoms.push(key);
                                    atoms.len() - 1
                                });
                                (ix, a.pow)
                            })
                            .collect();
                        entries[4 * r + c].push(NumTerm {
                            coeff: z,
                            xi: mono.xi,
                            e_pow: mono.e_pow,
                            em_pow: mono.em_pow,
                            r_pow: mono.r_pow,
                            atoms: ts,
                        });
                    }
                }
            }
        }
        Compiled { entries, atoms }
    }

    pub fn atom_values(&self, geo: &Geometry, x: f64) -> Vec<f64> {
        self.atoms.iter().map(|(k, d)| geo.fields.atom(*k, *d, x, geo.len())).collect()
    }
}

/// Momentum-independent data at one position.
pub(crate) struct Point<'a> {
    pub xi2: f64,
    pub xi3: f64,
    pub atoms: &'a [f64],
}

impl NumTerm {
    /// the term without its ξ₁ power, at a position
    pub fn x_part(&self, pt: &Point) -> Complex64 {
        let mut z = self.coeff * pt.xi2.powi(self.xi[1] as i32) * pt.xi3.powi(self.xi[2] as i32);
        for (ix, p) in &self.atoms {
            z *= pt.atoms[*ix].powi(*p as i32);
        }
        z
    }

    pub fn eval(&self, pt: &Point, xi1: f64, mass: f64) -> Complex64 {
        let mut z = self.x_part(pt) * xi1.powi(self.xi[0] as i32);
        if self.e_pow != 0 || self.em_pow != 0 || self.r_pow != 0 {
            z *= Energy::new(mass, xi1, pt).factor(self);
        }
        z
    }
}

/// E, E + m and N = (2E(E+m))^{−½} at one phase-space point.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Energy {
    e: f64,
    em: f64,
    n: f64,
}

impl Energy {
    pub fn new(mass: f64, xi1: f64, pt: &Point) -> Self {
        let e = (mass * mass + xi1 * xi1 + pt.xi2 * pt.xi2 + pt.xi3 * pt.xi3).sqrt();
        Energy { e, em: e + mass, n: (2.0 * e * (e + mass)).sqrt().recip() }
    }

    pub fn factor(&self, t: &NumTerm) -> f64 {
        self.e.powi(t.e_pow) * self.em.powi(t.em_pow) * self.n.powi(t.r_pow as i32)
    }
}

impl NumTerm {
    /// eval with the energy atoms precomputed
    pub fn eval_with(&self, pt: &Point, xi1: f64, en: &Energy) -> Complex64 {
        let mut z = self.x_part(pt) * xi1.powi(self.xi[0] as i32);
        if self.e_pow != 0 || self.em_pow != 0 || self.r_pow != 0 {
            z *= en.factor(self);
        }
        z
    }
}
