use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::fields::{Fields, Preset};
use crate::error::{Result, SaptError};
use crate::matrix::Scaling;

/// Physical setup independent of c.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub n: usize,
    pub length: f64,
    pub mass: f64,
    pub eps: f64,
    /// transverse momenta (k₂, k₃) in symbol units
    pub k_perp: [f64; 2],
    pub preset: Preset,
    /// inline fields, overriding the preset
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fields: Option<Fields>,
    pub seed: u64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { n: 256, length: 32.0, mass: 1.0, eps: 1.0, k_perp: [0.0, 0.0], preset: Preset::Mixed, fields: None, seed: 0 }
    }
}

impl GridSpec {
    pub fn with_preset(preset: Preset) -> Self {
        GridSpec { preset, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.n.is_power_of_two() || self.n < 4 {
            return Err(SaptError::Config(format!("grid size must be a power of two ≥ 4, got {}", self.n)));
        }
        if !(self.length > 0.0 && self.mass > 0.0 && self.eps > 0.0) {
            return Err(SaptError::Config("length, mass and eps must be positive".into()));
        }
        Ok(())
    }

    pub fn fields(&self) -> Fields {
        self.fields.clone().unwrap_or_else(|| self.preset.fields(self.seed))
    }

    pub fn hash(&self, scaling: Scaling) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&(self, scaling, self.fields())).expect("spec serializes"));
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// A spec bound to a scaling and a value of c.
#[derive(Clone, Debug)]
pub struct Geometry {
    pub spec: GridSpec,
    pub scaling: Scaling,
    pub c: f64,
    pub hbar: f64,
    pub lambda: f64,
    pub fields: Fields,
}

impl Geometry {
    pub fn new(spec: &GridSpec, scaling: Scaling, c: f64) -> Result<Self> {
        spec.validate()?;
        if c.is_nan() || c <= 0.0 {
            return Err(SaptError::Config(format!("c must be positive, got {c}")));
        }
        let (hbar, lambda) = match scaling {
            Scaling::Sr => (spec.eps / c, 1.0 / (c * c)),
            Scaling::Nr => (spec.eps, 1.0 / c),
        };
        Ok(Geometry { spec: spec.clone(), scaling, c, hbar, lambda, fields: spec.fields() })
    }

    pub fn with_fields(mut self, fields: Fields) -> Self {
        self.fields = fields;
        self
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn len(&self) -> f64 {
        self.spec.length
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.spec.length / self.spec.n as f64
    }

    /// wavenumber of momentum index i (0..N), i.e. 2π(i − N/2)/L
    pub fn kappa(&self, i: usize) -> f64 {
        2.0 * PI * (i as f64 - (self.spec.n / 2) as f64) / self.spec.length
    }

    /// A₁ enters as a constant shift of ξ₁ plus a gauge phase θ with
    /// ħθ' = λ(A₁ − Ā₁).
    pub fn gauge_phase(&self, x: f64) -> f64 {
        (self.lambda / self.hbar) * self.fields.a[0].antiderivative(self.len()).eval(x, 0, self.len())
    }
}
