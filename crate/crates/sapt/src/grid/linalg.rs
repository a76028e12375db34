//! Dense 4N×4N operators and spinor states, component-major (index s·N + i).

use ndarray::{s, Array1, Array2, Axis, ShapeBuilder};
use ndarray_linalg::{Eigh, SVD, UPLO};
use num_complex::Complex64;

use super::geometry::Geometry;
use crate::error::{Result, SaptError};

fn numeric<E: std::fmt::Display>(e: E) -> SaptError {
    SaptError::Numeric(e.to_string())
}

pub fn adjoint(m: &Array2<Complex64>) -> Array2<Complex64> {
    m.t().mapv(|z| z.conj())
}

/// Unitary DFT F[i, j] = e^{−iκᵢxⱼ}/√N from positions to grid momenta.
pub fn dft_matrix(geo: &Geometry) -> Array2<Complex64> {
    let n = geo.n();
    let norm = (n as f64).sqrt();
    Array2::from_shape_fn((n, n), |(i, j)| Complex64::from_polar(1.0 / norm, -geo.kappa(i) * geo.x(j)))
}

#[derive(Clone, Debug)]
pub struct GridOperator {
    pub matrix: Array2<Complex64>,
    pub n: usize,
}

impl GridOperator {
    pub fn new(matrix: Array2<Complex64>, n: usize) -> Self {
        GridOperator { matrix, n }
    }

    pub fn identity(n: usize) -> Self {
        GridOperator { matrix: Array2::eye(4 * n), n }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        GridOperator { matrix: adjoint(&self.matrix), n: self.n }
    }

    pub fn add(&self, o: &Self) -> Self {
        GridOperator { matrix: &self.matrix + &o.matrix, n: self.n }
    }

    pub fn sub(&self, o: &Self) -> Self {
        GridOperator { matrix: &self.matrix - &o.matrix, n: self.n }
    }

    pub fn dot(&self, o: &Self) -> Self {
        GridOperator { matrix: self.matrix.dot(&o.matrix), n: self.n }
    }

    pub fn apply(&self, psi: &GridState) -> GridState {
        GridState { data: self.matrix.dot(&psi.data), n: psi.n }
    }

    /// max |H − H†| relative to max |H|
    pub fn hermiticity_defect(&self) -> f64 {
        let scale = self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let d = (&self.matrix - &adjoint(&self.matrix)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        d / scale
    }

    /// Groups of spinor components connected by nonzero N×N blocks.
    pub fn coupled_components(&self) -> Vec<Vec<usize>> {
        let n = self.n;
        let mut group: [usize; 4] = [0, 1, 2, 3];
        for r in 0..4 {
            for c in 0..4 {
                let blk = self.matrix.slice(s![r * n..(r + 1) * n, c * n..(c + 1) * n]);
                if r != c && blk.iter().any(|z| z.norm() != 0.0) {
                    let (a, b) = (group[r], group[c]);
                    group.iter_mut().filter(|g| **g == b).for_each(|g| *g = a);
                }
            }
        }
        let mut out: Vec<Vec<usize>> = vec![];
        for k in 0..4 {
            match out.iter_mut().find(|g| group[g[0]] == group[k]) {
                Some(g) => g.push(k),
                None => out.push(vec![k]),
            }
        }
        out
    }

    /// Eigendecomposition, one dense solve per group of coupled components.
    pub fn eigh(&self) -> Result<Spectrum> {
        let n = self.n;
        let dim = self.dim();
        let mut pairs: Vec<(f64, Array1<Complex64>)> = Vec::with_capacity(dim);
        for comps in self.coupled_components() {
            let idx: Vec<usize> = comps.iter().flat_map(|&c| c * n..(c + 1) * n).collect();
            let sub = self.matrix.select(Axis(0), &idx).select(Axis(1), &idx);
            let (values, vectors) = dense_eigh(&sub)?;
            for (k, &w) in values.iter().enumerate() {
                let mut v = Array1::zeros(dim);
                for (a, &i) in idx.iter().enumerate() {
                    v[i] = vectors[[a, k]];
                }
                pairs.push((w, v));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let values = pairs.iter().map(|p| p.0).collect();
        let mut vectors = Array2::zeros((dim, dim));
        for (k, (_, v)) in pairs.iter().enumerate() {
            vectors.column_mut(k).assign(v);
        }
        Ok(Spectrum { values, vectors, n })
    }

    pub fn eigenvalues(&self) -> Result<Array1<f64>> {
        Ok(self.eigh()?.values)
    }

    pub fn propagate(&self, t: f64, psi: &GridState) -> Result<GridState> {
        Ok(self.eigh()?.propagate(t, psi))
    }

    /// Largest singular value.
    pub fn op_norm(&self) -> Result<f64> {
        op_norm(&self.matrix)
    }

    /// The upper or lower two spinor components as a 2N×2N operator.
    pub fn block(&self, upper: bool) -> Array2<Complex64> {
        let n = self.n;
        let r = if upper { 0..2 * n } else { 2 * n..4 * n };
        self.matrix.slice(s![r.clone(), r]).to_owned()
    }
}

fn dense_eigh(m: &Array2<Complex64>) -> Result<(Array1<f64>, Array2<Complex64>)> {
    // row-major input comes back with conjugated eigenvectors
    let mut a = Array2::zeros(m.raw_dim().f());
    a.assign(m);
    a.eigh(UPLO::Lower).map_err(numeric)
}

pub fn op_norm(m: &Array2<Complex64>) -> Result<f64> {
    if m.is_empty() {
        return Ok(0.0);
    }
    let (_, sv, _) = m.svd(false, false).map_err(numeric)?;
    Ok(sv.iter().cloned().fold(0.0, f64::max))
}

/// Eigendecomposition of a Hermitian operator, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Array1<f64>,
    pub vectors: Array2<Complex64>,
    pub n: usize,
}

impl Spectrum {
    /// e^{−itH}ψ
    pub fn propagate(&self, t: f64, psi: &GridState) -> GridState {
        self.apply_fn(psi, |w| Complex64::from_polar(1.0, -t * w))
    }

    /// 1_{[lo, hi]}(H)ψ
    pub fn project(&self, lo: f64, hi: f64, psi: &GridState) -> GridState {
        self.apply_fn(psi, |w| Complex64::new(if (lo..=hi).contains(&w) { 1.0 } else { 0.0 }, 0.0))
    }

    pub fn apply_fn(&self, psi: &GridState, f: impl Fn(f64) -> Complex64) -> GridState {
        let mut coeff = adjoint(&self.vectors).dot(&psi.data);
        for (c, &w) in coeff.iter_mut().zip(self.values.iter()) {
            *c *= f(w);
        }
        GridState { data: self.vectors.dot(&coeff), n: psi.n }
    }

    pub fn eigenvector(&self, k: usize) -> GridState {
        GridState { data: self.vectors.column(k).to_owned(), n: self.n }
    }

    pub fn propagator(&self, t: f64) -> GridOperator {
        let mut v = self.vectors.clone();
        for (mut col, &w) in v.axis_iter_mut(Axis(1)).zip(self.values.iter()) {
            let ph = Complex64::from_polar(1.0, -t * w);
            col.mapv_inplace(|z| z * ph);
        }
        GridOperator { matrix: v.dot(&adjoint(&self.vectors)), n: self.n }
    }
}

/// Spinor wave function in the momentum basis.
#[derive(Clone, Debug, PartialEq)]
pub struct GridState {
    pub data: Array1<Complex64>,
    pub n: usize,
}

impl GridState {
    pub fn zeros(n: usize) -> Self {
        GridState { data: Array1::zeros(4 * n), n }
    }

    /// Normalized Gaussian e^{−(x−x₀)²/2w²} in one spinor component.
    pub fn gaussian(geo: &Geometry, center: f64, width: f64, component: usize) -> Self {
        let n = geo.n();
        let len = geo.len();
        let pos = Array1::from_shape_fn(n, |j| {
            // nearest periodic image
            let d = (geo.x(j) - center + len / 2.0).rem_euclid(len) - len / 2.0;
            Complex64::new((-d * d / (2.0 * width * width)).exp(), 0.0)
        });
        let mom = dft_matrix(geo).dot(&pos);
        let mut out = Self::zeros(n);
        out.data.slice_mut(s![component * n..(component + 1) * n]).assign(&mom);
        out.normalized()
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let nrm = self.norm();
        if nrm > 0.0 {
            self.data.mapv_inplace(|z| z / nrm);
        }
        self
    }

    pub fn sub(&self, o: &Self) -> Self {
        GridState { data: &self.data - &o.data, n: self.n }
    }

    pub fn inner(&self, o: &Self) -> Complex64 {
        self.data.iter().zip(o.data.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    /// Position-space amplitudes per component.
    pub fn to_position(&self, geo: &Geometry) -> Array2<Complex64> {
        let n = self.n;
        let fd = adjoint(&dft_matrix(geo));
        let mut out = Array2::zeros((4, n));
        for c in 0..4 {
            let v = fd.dot(&self.data.slice(s![c * n..(c + 1) * n]));
            out.row_mut(c).assign(&v);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::fields::Preset;
    use crate::grid::geometry::GridSpec;
    use crate::matrix::Scaling;

    #[test]
    fn dft_is_unitary() {
        let g = Geometry::new(&GridSpec { n: 16, ..Default::default() }, Scaling::Nr, 2.0).unwrap();
        let f = dft_matrix(&g);
        let id = f.dot(&adjoint(&f));
        for ((i, j), z) in id.indexed_iter() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((z - want).norm() < 1e-12);
        }
    }

    #[test]
    fn propagation_is_unitary_and_trivial_at_zero() {
        let g = Geometry::new(&GridSpec { n: 16, ..GridSpec::with_preset(Preset::Mixed) }, Scaling::Nr, 2.0).unwrap();
        let mut h = Array2::<Complex64>::zeros((64, 64));
        for ((i, j), z) in h.indexed_iter_mut() {
            *z = Complex64::new(((i * 7 + j * 3) % 11) as f64 + ((j * 7 + i * 3) % 11) as f64, (i as f64) - (j as f64));
        }
        let op = GridOperator::new(h, 16);
        assert!(op.hermiticity_defect() < 1e-15);
        let sp = op.eigh().unwrap();
        let psi = GridState::gaussian(&g, 16.0, 2.0, 1);
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        assert!(sp.propagate(0.0, &psi).sub(&psi).norm() < 1e-12);
        assert!((sp.propagate(3.7, &psi).norm() - 1.0).abs() < 1e-10);
        for k in [0, 17, 63] {
            let v = sp.eigenvector(k);
            let mut r = op.apply(&v);
            r.data.zip_mut_with(&v.data, |a, b| *a -= sp.values[k] * b);
            assert!(r.norm() < 1e-10 * sp.values[k].abs().max(1.0));
        }
        let u = sp.propagator(0.9);
        let uu = u.dot(&u.adjoint());
        assert!(op_norm(&(&uu.matrix - &Array2::<Complex64>::eye(64))).unwrap() < 1e-10);
    }
}
