//! Magnetic Weyl quantization on the reduced geometry, assembled directly in
//! the discrete momentum basis.
//!
//! ⟨κ'|Op|κ⟩ is the Fourier coefficient at κ' − κ of X ↦ σ_eff(X, p) with
//! p = ħ(κ + κ')/2 − λĀ₁. Midpoints live on the doubled grid X_j = jL/2N.
//! The transverse momenta see the average of A₂, A₃ over the segment [y, x],
//! which is expanded around the midpoint in powers of z = x − y; each z²ⁿ
//! turns into (−ħ²)ⁿ∂²ⁿ_ξ₁ under the kernel integral. The periodic part of A₁
//! is exactly a position-space phase conjugation.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{s, Array2};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::geometry::Geometry;
use super::linalg::{dft_matrix, GridOperator};
use super::numeric::{Compiled, Energy, NumericSymbol, Point};
use crate::error::{Result, SaptError};
use crate::matrix::MatrixSymbol;

/// A symbol derivative with an X-dependent weight sampled on the doubled grid.
struct Piece {
    weight: Option<Vec<f64>>,
    sym: Compiled,
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Truncated power series in t = z².
fn series_mul(a: &[f64], b: &[f64], deg: usize) -> Vec<f64> {
    let mut out = vec![0.0; deg + 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            if i + j <= deg {
                out[i + j] += x * y;
            }
        }
    }
    out
}

fn series_pow(a: &[f64], p: u32, deg: usize) -> Vec<f64> {
    let mut out = vec![0.0; deg + 1];
    out[0] = 1.0;
    for _ in 0..p {
        out = series_mul(&out, a, deg);
    }
    out
}

fn derivative(sym: &MatrixSymbol, counts: [u32; 3]) -> MatrixSymbol {
    let mut d = sym.clone();
    for (axis, &k) in counts.iter().enumerate() {
        for _ in 0..k {
            d = d.d_xi(axis);
        }
    }
    d
}

/// Mixing field atoms with E, E+m or N in one term has no kernel construction here.
fn check_quantizable(sym: &NumericSymbol) -> Result<()> {
    for (_, s) in &sym.parts {
        for e in s.entries() {
            for (mono, _) in e.terms() {
                let energy = mono.e_pow != 0 || mono.em_pow != 0 || mono.r_pow != 0;
                if energy && !mono.atoms.is_empty() {
                    return Err(SaptError::NonPolynomialSymbol("a term multiplies field atoms by energy atoms".into()));
                }
            }
        }
    }
    Ok(())
}

fn build_pieces(sym: &NumericSymbol, geo: &Geometry) -> Vec<Piece> {
    let spec = &geo.spec;
    let compile = |s: &NumericSymbol| Compiled::new(s, spec.mass, spec.eps);
    let mut pieces = vec![Piece { weight: None, sym: compile(sym) }];
    let perp = [!geo.fields.a[1].is_constant(), !geo.fields.a[2].is_constant()];
    if !(perp[0] || perp[1]) || !sym.depends_on_perp() {
        return pieces;
    }
    // exact for polynomials; otherwise the first correction only
    let n_max = sym.xi_degree(0).map(|d| d / 2).unwrap_or(1) as usize;
    if n_max == 0 {
        return pieces;
    }
    let (len, m2) = (geo.len(), 2 * geo.n());
    // δ_j(X, t) = Σ_k d_{j,k}(X) t^k per sample
    let deltas: Vec<[Vec<f64>; 2]> = (0..m2)
        .map(|j| {
            let x = j as f64 * len / m2 as f64;
            std::array::from_fn(|a| {
                let mut d = vec![0.0; n_max + 1];
                if perp[a] {
                    for (k, dk) in d.iter_mut().enumerate().skip(1) {
                        let a2k = geo.fields.a[a + 1].eval(x, 2 * k as u32, len);
                        *dk = -geo.lambda * a2k / (4f64.powi(k as i32) * factorial(2 * k as u32 + 1));
                    }
                }
                d
            })
        })
        .collect();
    for n in 1..=n_max {
        for a in 0..=n as u32 {
            for b in 0..=(n as u32 - a) {
                if a + b == 0 || (a > 0 && !perp[0]) || (b > 0 && !perp[1]) {
                    continue;
                }
                let dsym = sym.map(|s| derivative(s, [2 * n as u32, a, b]));
                if dsym.parts.iter().all(|(_, s)| s.is_structurally_zero()) {
                    continue;
                }
                let scale = (-geo.hbar * geo.hbar).powi(n as i32) / (factorial(a) * factorial(b));
                let weight = deltas
                    .iter()
                    .map(|[d2, d3]| {
                        let p = series_mul(&series_pow(d2, a, n_max), &series_pow(d3, b, n_max), n_max);
                        scale * p[n]
                    })
                    .collect();
                pieces.push(Piece { weight: Some(weight), sym: compile(&dsym) });
            }
        }
    }
    pieces
}

struct Sampler<'a> {
    geo: &'a Geometry,
    xs: Vec<f64>,
    xi_perp: Vec<[f64; 2]>,
    fft: Arc<dyn Fft<f64>>,
}

impl<'a> Sampler<'a> {
    fn new(geo: &'a Geometry) -> Self {
        let m2 = 2 * geo.n();
        let xs: Vec<f64> = (0..m2).map(|j| j as f64 * geo.len() / m2 as f64).collect();
        let k = geo.spec.k_perp;
        let xi_perp = xs.iter().map(|&x| std::array::from_fn(|a| k[a] - geo.lambda * geo.fields.a[a + 1].eval(x, 0, geo.len()))).collect();
        let fft = FftPlanner::new().plan_fft_forward(m2);
        Sampler { geo, xs, xi_perp, fft }
    }

    /// (1/2N) Σ_j a_j e^{−2πiΔj/2N}, indexed by Δ mod 2N
    fn coefficients(&self, mut a: Vec<Complex64>) -> Vec<Complex64> {
        self.fft.process(&mut a);
        let inv = 1.0 / a.len() as f64;
        a.iter_mut().for_each(|z| *z *= inv);
        a
    }

    fn atoms(&self, c: &Compiled) -> Vec<Vec<f64>> {
        self.xs.iter().map(|&x| c.atom_values(self.geo, x)).collect()
    }

    fn weight(p: &Piece, j: usize) -> f64 {
        p.weight.as_ref().map_or(1.0, |w| w[j])
    }
}

/// ξ₁ at the momentum midpoint with index sum s = i + i'
fn midpoint_momentum(geo: &Geometry, s: usize) -> f64 {
    let n = geo.n() as f64;
    geo.hbar * PI * (s as f64 - n) / geo.len() - geo.lambda * geo.fields.a[0].constant
}

fn assemble(geo: &Geometry, element: impl Fn(usize, usize, usize) -> Complex64) -> Array2<Complex64> {
    let n = geo.n();
    let mut out = Array2::zeros((4 * n, 4 * n));
    for e in 0..16 {
        let (r, c) = (e / 4, e % 4);
        for ip in 0..n {
            for i in 0..n {
                out[[r * n + ip, c * n + i]] = element(e, ip, i);
            }
        }
    }
    out
}

/// Polynomial in ξ₁: one FFT per entry and ξ₁ power.
fn quantize_polynomial(geo: &Geometry, pieces: &[Piece], deg: usize) -> Array2<Complex64> {
    let sampler = Sampler::new(geo);
    let m2 = 2 * geo.n();
    let atoms: Vec<Vec<Vec<f64>>> = pieces.iter().map(|p| sampler.atoms(&p.sym)).collect();
    // coeff[entry][q][Δ]
    let coeff: Vec<Vec<Vec<Complex64>>> = (0..16)
        .into_par_iter()
        .map(|e| {
            (0..=deg)
                .map(|q| {
                    let mut a = vec![Complex64::new(0.0, 0.0); m2];
                    let mut any = false;
                    for (p, at) in pieces.iter().zip(&atoms) {
                        for t in p.sym.entries[e].iter().filter(|t| t.xi[0] as usize == q) {
                            any = true;
                            for (j, aj) in a.iter_mut().enumerate() {
                                let [xi2, xi3] = sampler.xi_perp[j];
                                let pt = Point { xi2, xi3, atoms: &at[j] };
                                *aj += Sampler::weight(p, j) * t.x_part(&pt);
                            }
                        }
                    }
                    if any {
                        sampler.coefficients(a)
                    } else {
                        a
                    }
                })
                .collect()
        })
        .collect();
    let momenta: Vec<f64> = (0..m2).map(|s| midpoint_momentum(geo, s)).collect();
    assemble(geo, |e, ip, i| {
        let d = (ip + m2 - i) % m2;
        let p = momenta[ip + i];
        coeff[e].iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * p + c[d])
    })
}

/// Any symbol: one FFT per entry and midpoint momentum.
fn quantize_general(geo: &Geometry, pieces: &[Piece]) -> Array2<Complex64> {
    let sampler = Sampler::new(geo);
    let m2 = 2 * geo.n();
    let mass = geo.spec.mass;
    let atoms: Vec<Vec<Vec<f64>>> = pieces.iter().map(|p| sampler.atoms(&p.sym)).collect();
    let live: Vec<usize> = (0..16).filter(|&e| pieces.iter().any(|p| !p.sym.entries[e].is_empty())).collect();
    // table[s][entry][Δ]
    let table: Vec<Vec<Vec<Complex64>>> = (0..m2 - 1)
        .into_par_iter()
        .map(|s| {
            let p1 = midpoint_momentum(geo, s);
            let mut samples = vec![vec![Complex64::new(0.0, 0.0); m2]; 16];
            for j in 0..m2 {
                let [xi2, xi3] = sampler.xi_perp[j];
                let en = Energy::new(mass, p1, &Point { xi2, xi3, atoms: &[] });
                for (p, at) in pieces.iter().zip(&atoms) {
                    let pt = Point { xi2, xi3, atoms: &at[j] };
                    let w = Sampler::weight(p, j);
                    for &e in &live {
                        let z: Complex64 = p.sym.entries[e].iter().map(|t| t.eval_with(&pt, p1, &en)).sum();
                        samples[e][j] += w * z;
                    }
                }
            }
            samples.into_iter().enumerate().map(|(e, a)| if live.contains(&e) { sampler.coefficients(a) } else { vec![] }).collect()
        })
        .collect();
    assemble(geo, |e, ip, i| {
        let row = &table[ip + i][e];
        if row.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        row[(ip + m2 - i) % m2]
    })
}

/// X-independent symbol: a Fourier multiplier.
fn quantize_diagonal(geo: &Geometry, piece: &Piece) -> Array2<Complex64> {
    let n = geo.n();
    let k = geo.spec.k_perp;
    let xi2 = k[0] - geo.lambda * geo.fields.a[1].constant;
    let xi3 = k[1] - geo.lambda * geo.fields.a[2].constant;
    let none: Vec<f64> = vec![];
    let pt = Point { xi2, xi3, atoms: &none };
    let mut out = Array2::zeros((4 * n, 4 * n));
    for i in 0..n {
        let p1 = midpoint_momentum(geo, 2 * i);
        for e in 0..16 {
            let z: Complex64 = piece.sym.entries[e].iter().map(|t| t.eval(&pt, p1, geo.spec.mass)).sum();
            out[[(e / 4) * n + i, (e % 4) * n + i]] = z;
        }
    }
    out
}

/// Unitary W = F·diag(e^{iθ(x_j)})·F† in the momentum basis.
pub fn phase_in_momentum_basis(geo: &Geometry, theta: impl Fn(f64) -> f64) -> Array2<Complex64> {
    let n = geo.n();
    let f = dft_matrix(geo);
    let mut fd = f.clone();
    for j in 0..n {
        let ph = Complex64::from_polar(1.0, theta(geo.x(j)));
        fd.column_mut(j).mapv_inplace(|z| z * ph);
    }
    fd.dot(&f.t().mapv(|z| z.conj()))
}

/// Applies W to every 4×4 block: M ↦ (1⊗W) M (1⊗W†).
pub fn conjugate_blocks(m: &Array2<Complex64>, w: &Array2<Complex64>) -> Array2<Complex64> {
    let n = w.nrows();
    let wd = w.t().mapv(|z| z.conj());
    let mut out = Array2::zeros(m.raw_dim());
    for r in 0..4 {
        for c in 0..4 {
            let blk = m.slice(s![r * n..(r + 1) * n, c * n..(c + 1) * n]);
            let v = w.dot(&blk).dot(&wd);
            out.slice_mut(s![r * n..(r + 1) * n, c * n..(c + 1) * n]).assign(&v);
        }
    }
    out
}

/// Op(sym) on the grid. A₁ contributes its mean as a momentum shift and its
/// periodic part through the line-integral phase.
pub fn quantize(sym: &NumericSymbol, geo: &Geometry) -> Result<GridOperator> {
    check_quantizable(sym)?;
    let pieces = build_pieces(sym, geo);
    let x_dependent = sym.has_fields() || (geo.fields.has_magnetic() && sym.depends_on_perp());
    let mut m = if !x_dependent {
        quantize_diagonal(geo, &pieces[0])
    } else if let Some(deg) = sym.xi_degree(0) {
        quantize_polynomial(geo, &pieces, deg as usize)
    } else {
        quantize_general(geo, &pieces)
    };
    if !geo.fields.a[0].is_constant() {
        let w = phase_in_momentum_basis(geo, |x| geo.gauge_phase(x));
        m = conjugate_blocks(&m, &w);
    }
    Ok(GridOperator::new(m, geo.n()))
}

pub fn quantize_matrix(sym: &MatrixSymbol, geo: &Geometry) -> Result<GridOperator> {
    quantize(&NumericSymbol::new(sym.clone()), geo)
}
