//! Error-scaling, spectral-residual, gauge and composition experiments.

use std::fmt::Write as _;

use ndarray::{s, Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fields::Trig;
use super::geometry::{Geometry, GridSpec};
use super::linalg::{op_norm, GridOperator, GridState, Spectrum};
use super::numeric::NumericSymbol;
use super::quantize::{conjugate_blocks, phase_in_momentum_basis, quantize};
use crate::error::{Result, SaptError};
use crate::matrix::{MatrixSymbol, PowerSeries, Scaling};
use crate::moyal::scaled_term;
use crate::recursion::{expand, Expansion, ScalingConfig};

pub const DEFAULT_C_LIST: [f64; 4] = [4.0, 8.0, 16.0, 32.0];

/// Initial wave packet: a Gaussian in one spinor component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WavePacket {
    /// defaults to the middle of the box
    pub center: Option<f64>,
    pub width: f64,
    pub component: usize,
}

impl Default for WavePacket {
    fn default() -> Self {
        WavePacket { center: None, width: 2.0, component: 0 }
    }
}

impl WavePacket {
    pub fn state(&self, geo: &Geometry) -> GridState {
        GridState::gaussian(geo, self.center.unwrap_or(geo.len() / 2.0), self.width, self.component)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub c: f64,
    pub t: f64,
    pub order: usize,
    pub scaling: Scaling,
    pub error: f64,
}

/// Rows plus a least-squares fit of log error = intercept − slope·log c.
/// The fit skips rows whose error is not positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub rows: Vec<ReportRow>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
    pub geometry_hash: String,
    pub seed: u64,
}

impl ExperimentReport {
    pub fn new(experiment: &str, rows: Vec<ReportRow>, spec: &GridSpec, scaling: Scaling) -> Self {
        let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.error > 0.0).map(|r| (r.c.ln(), r.error.ln())).collect();
        let fit = fit_line(&pts);
        ExperimentReport {
            experiment: experiment.into(),
            rows,
            slope: fit.map(|f| -f.0),
            intercept: fit.map(|f| f.1),
            r_squared: fit.map(|f| f.2),
            geometry_hash: spec.hash(scaling),
            seed: spec.seed,
        }
    }

    pub fn max_error(&self) -> f64 {
        self.rows.iter().map(|r| r.error).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("c,t,order,scaling,error\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{:.17e}", r.c, r.t, r.order, r.scaling.name(), r.error);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// (slope, intercept, r²) of y against x
pub fn fit_line(pts: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some((slope, my - slope * mx, r2))
}

/// H = Σ c⁻ⁿ Op(Hₙ).
pub fn dirac_hamiltonian(geo: &Geometry) -> Result<GridOperator> {
    let cfg = ScalingConfig::new(geo.scaling, 2)?;
    quantize(&NumericSymbol::from_series(&cfg.h, geo.c), geo)
}

/// Closed-form spectrum of the field-free operator, ascending.
pub fn free_dispersion(geo: &Geometry) -> Vec<f64> {
    let m = geo.spec.mass;
    let [k2, k3] = geo.spec.k_perp;
    let scale = match geo.scaling {
        Scaling::Sr => 1.0,
        Scaling::Nr => 1.0 / geo.c,
    };
    let mut out: Vec<f64> = (0..geo.n())
        .flat_map(|i| {
            let p2 = (geo.hbar * geo.kappa(i)).powi(2) + k2 * k2 + k3 * k3;
            let e = (m * m + scale * scale * p2).sqrt();
            [e, e, -e, -e]
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

pub fn propagate(h: &GridOperator, t: f64, psi: &GridState) -> Result<GridState> {
    h.propagate(t, psi)
}

/// Π, U and H_eff of a symbolic expansion quantized at one c.
pub struct QuantizedExpansion {
    pub pi: GridOperator,
    pub u: GridOperator,
    pub h_eff: GridOperator,
}

impl QuantizedExpansion {
    pub fn new(exp: &Expansion, geo: &Geometry) -> Result<Self> {
        let q = |s: &PowerSeries| quantize(&NumericSymbol::from_series(s, geo.c), geo);
        Ok(QuantizedExpansion { pi: q(&exp.pi)?, u: q(&exp.u)?, h_eff: q(&exp.h_eff)? })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scaling: Scaling,
    pub order: usize,
    pub c_list: Vec<f64>,
    pub t: f64,
    pub grid: GridSpec,
    pub packet: WavePacket,
}

impl ExperimentConfig {
    pub fn new(scaling: Scaling, order: usize) -> Self {
        ExperimentConfig {
            scaling,
            order,
            c_list: DEFAULT_C_LIST.to_vec(),
            t: 1.0,
            grid: GridSpec::default(),
            packet: WavePacket::default(),
        }
    }

    fn check(&self) -> Result<()> {
        self.grid.validate()?;
        if self.c_list.is_empty() {
            return Err(SaptError::Config("c_list is empty".into()));
        }
        Ok(())
    }
}

/// Smallest E_max with ‖Π·1_[0,E_max](H)ψ‖² ≥ 0.99‖Πψ‖².
fn energy_cutoff(sp: &Spectrum, pi: &GridOperator, psi: &GridState) -> GridState {
    let target = 0.99 * pi.apply(psi).norm().powi(2);
    let pos: Vec<f64> = sp.values.iter().cloned().filter(|&w| w >= 0.0).collect();
    let kept = |k: usize| sp.project(0.0, pos[k], psi);
    let (mut lo, mut hi) = (0, pos.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if pi.apply(&kept(mid)).norm().powi(2) >= target {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    kept(lo)
}

/// err(c) = ‖(e^{−itH} − U*e^{−itH_eff}U)Πψ₀‖; in the non-relativistic scaling
/// ψ₀ is first restricted to a bounded energy window of H.
pub fn error_scaling_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.check()?;
    let exp = expand(cfg.scaling, cfg.order)?;
    let rows = cfg
        .c_list
        .par_iter()
        .map(|&c| {
            let geo = Geometry::new(&cfg.grid, cfg.scaling, c)?;
            let h = dirac_hamiltonian(&geo)?.eigh()?;
            let q = QuantizedExpansion::new(&exp, &geo)?;
            let mut psi = cfg.packet.state(&geo);
            if cfg.scaling == Scaling::Nr {
                psi = energy_cutoff(&h, &q.pi, &psi);
            }
            let phi = q.pi.apply(&psi);
            let full = h.propagate(cfg.t, &phi);
            let eff = q.h_eff.propagate(cfg.t, &q.u.apply(&phi))?;
            let back = q.u.adjoint().apply(&eff);
            Ok(ReportRow { c, t: cfg.t, order: cfg.order, scaling: cfg.scaling, error: full.sub(&back).norm() })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport::new("error_scaling", rows, &cfg.grid, cfg.scaling))
}

/// Electronic eigenpair (E₀, Ψ) of H with the smallest positive eigenvalue.
pub fn electronic_ground_state(h: &Spectrum) -> Result<(f64, GridState)> {
    let k = h.values.iter().position(|&w| w > 0.0).ok_or_else(|| SaptError::Numeric("no positive eigenvalue".into()))?;
    Ok((h.values[k], h.eigenvector(k)))
}

/// ‖(H_eff − E₀)UΠΨ‖ for the electronic ground state of H.
pub fn spectral_residual_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.check()?;
    if cfg.grid.n > 512 {
        return Err(SaptError::Config("spectral residuals need N ≤ 512".into()));
    }
    let exp = expand(cfg.scaling, cfg.order)?;
    let rows = cfg
        .c_list
        .par_iter()
        .map(|&c| {
            let geo = Geometry::new(&cfg.grid, cfg.scaling, c)?;
            let h = dirac_hamiltonian(&geo)?.eigh()?;
            let (e0, psi) = electronic_ground_state(&h)?;
            let q = QuantizedExpansion::new(&exp, &geo)?;
            let v = q.u.apply(&q.pi.apply(&psi));
            let mut r = q.h_eff.apply(&v);
            r.data.zip_mut_with(&v.data, |a, b| *a -= e0 * b);
            Ok(ReportRow { c, t: 0.0, order: cfg.order, scaling: cfg.scaling, error: r.norm() })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport::new("spectral_residual", rows, &cfg.grid, cfg.scaling))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeReport {
    pub deviation: f64,
    pub relative: f64,
}

/// ‖Op^{A+ε∇χ}(σ) − e^{iφ}Op^A(σ)e^{−iφ}‖ with φ = (λε/ħ)χ, which is χ/c in
/// both scalings.
pub fn gauge_covariance_check(geo: &Geometry, chi: &Trig, sym: &NumericSymbol) -> Result<GaugeReport> {
    let op = quantize(sym, geo)?;
    let shifted = geo.clone().with_fields(geo.fields.gauge_shifted(chi, geo.spec.eps, geo.len()));
    let op2 = quantize(sym, &shifted)?;
    let rotated = if chi.is_constant() {
        op.matrix.clone()
    } else {
        let k = geo.lambda * geo.spec.eps / geo.hbar;
        let w = phase_in_momentum_basis(geo, |x| k * chi.eval(x, 0, geo.len()));
        conjugate_blocks(&op.matrix, &w)
    };
    let deviation = op_norm(&(&op2.matrix - &rotated))?;
    let scale = op.op_norm()?;
    Ok(GaugeReport { deviation, relative: if scale > 0.0 { deviation / scale } else { deviation } })
}

/// Columns whose grid momentum lies in the central half of the window, per component.
fn central_columns(m: &Array2<Complex64>, n: usize) -> Array2<Complex64> {
    let blocks: Vec<_> = (0..4).map(|c| m.slice(s![.., c * n + n / 4..c * n + 3 * n / 4])).collect();
    ndarray::concatenate(Axis(1), &blocks).expect("equal row counts")
}

/// ‖Op(f)Op(g) − Op(Σ_{j≤N} c⁻ʲ (f♯g)_j)‖ per c, measured on states whose
/// momenta sit in the central half of the grid window so that band
/// truncation at the edges does not enter.
pub fn composition_oracle(
    f: &MatrixSymbol,
    g: &MatrixSymbol,
    n_order: usize,
    scaling: Scaling,
    c_list: &[f64],
    spec: &GridSpec,
) -> Result<ExperimentReport> {
    spec.validate()?;
    let mut terms = PowerSeries::new(scaling, n_order);
    for j in 0..=n_order {
        terms.set(j, scaled_term(scaling, f, g, j)?);
    }
    let rows = c_list
        .par_iter()
        .map(|&c| {
            let geo = Geometry::new(spec, scaling, c)?;
            let of = quantize(&NumericSymbol::new(f.clone()), &geo)?;
            let og = quantize(&NumericSymbol::new(g.clone()), &geo)?;
            let ofg = quantize(&NumericSymbol::from_series(&terms, c), &geo)?;
            let diff = &of.matrix.dot(&og.matrix) - &ofg.matrix;
            let error = op_norm(&central_columns(&diff, geo.n()))?;
            Ok(ReportRow { c, t: 0.0, order: n_order, scaling, error })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport::new("composition", rows, spec, scaling))
}
