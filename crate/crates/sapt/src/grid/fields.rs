//! Periodic potentials on [0, L) that depend on x₁ only, stored as finite
//! trigonometric series so every derivative is available in closed form.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::SaptError;
use crate::scalar::FieldKind;

/// One harmonic: cos_amp·cos(2πkx/L) + sin_amp·sin(2πkx/L).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub k: u32,
    pub cos_amp: f64,
    pub sin_amp: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trig {
    pub constant: f64,
    pub modes: Vec<Mode>,
}

impl Trig {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Trig { constant: c, modes: vec![] }
    }

    pub fn cos(k: u32, amp: f64) -> Self {
        Trig { constant: 0.0, modes: vec![Mode { k, cos_amp: amp, sin_amp: 0.0 }] }
    }

    pub fn sin(k: u32, amp: f64) -> Self {
        Trig { constant: 0.0, modes: vec![Mode { k, cos_amp: 0.0, sin_amp: amp }] }
    }

    /// Random smooth series with harmonics 1..=kmax and amplitudes decaying as 1/k².
    pub fn random(rng: &mut impl Rng, kmax: u32, amp: f64) -> Self {
        let modes = (1..=kmax)
            .map(|k| {
                let s = amp / (k * k) as f64;
                Mode { k, cos_amp: s * rng.gen_range(-1.0..1.0), sin_amp: s * rng.gen_range(-1.0..1.0) }
            })
            .collect();
        Trig { constant: 0.0, modes }
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.is_constant()
    }

    pub fn is_constant(&self) -> bool {
        self.modes.iter().all(|m| m.cos_amp == 0.0 && m.sin_amp == 0.0)
    }

    /// d-th derivative at x
    pub fn eval(&self, x: f64, d: u32, len: f64) -> f64 {
        let mut out = if d == 0 { self.constant } else { 0.0 };
        for m in &self.modes {
            let q = 2.0 * PI * m.k as f64 / len;
            let ph = q * x + d as f64 * PI / 2.0;
            out += q.powi(d as i32) * (m.cos_amp * ph.cos() + m.sin_amp * ph.sin());
        }
        out
    }

    /// Periodic antiderivative of the non-constant part.
    pub fn antiderivative(&self, len: f64) -> Trig {
        let modes = self
            .modes
            .iter()
            .map(|m| {
                let q = 2.0 * PI * m.k as f64 / len;
                Mode { k: m.k, cos_amp: -m.sin_amp / q, sin_amp: m.cos_amp / q }
            })
            .collect();
        Trig { constant: 0.0, modes }
    }

    pub fn derivative(&self, len: f64) -> Trig {
        let modes = self
            .modes
            .iter()
            .map(|m| {
                let q = 2.0 * PI * m.k as f64 / len;
                Mode { k: m.k, cos_amp: q * m.sin_amp, sin_amp: -q * m.cos_amp }
            })
            .collect();
        Trig { constant: 0.0, modes }
    }

    pub fn plus(&self, o: &Trig, scale: f64) -> Trig {
        let mut out = self.clone();
        out.constant += scale * o.constant;
        for m in &o.modes {
            out.modes.push(Mode { k: m.k, cos_amp: scale * m.cos_amp, sin_amp: scale * m.sin_amp });
        }
        out
    }

    pub fn sample(&self, n: usize, len: f64) -> Vec<f64> {
        (0..n).map(|j| self.eval(j as f64 * len / n as f64, 0, len)).collect()
    }
}

/// V and A = (A₁, A₂, A₃), all functions of x₁.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Fields {
    pub v: Trig,
    pub a: [Trig; 3],
}

impl Fields {
    pub fn has_magnetic(&self) -> bool {
        !(self.a[1].is_constant() && self.a[2].is_constant())
    }

    /// Value of ∂^deriv of a field atom at x₁. Derivatives along x₂, x₃ vanish,
    /// B₁₂ = ∂₁A₂, B₁₃ = ∂₁A₃ and B₂₃ = 0.
    pub fn atom(&self, kind: FieldKind, deriv: [u32; 3], x: f64, len: f64) -> f64 {
        if deriv[1] > 0 || deriv[2] > 0 {
            return 0.0;
        }
        let d = deriv[0];
        match kind {
            FieldKind::V => self.v.eval(x, d, len),
            FieldKind::B12 => self.a[1].eval(x, d + 1, len),
            FieldKind::B13 => self.a[2].eval(x, d + 1, len),
            FieldKind::B23 => 0.0,
        }
    }

    /// Same fields in the gauge A + ε∇χ.
    pub fn gauge_shifted(&self, chi: &Trig, eps: f64, len: f64) -> Fields {
        let mut out = self.clone();
        out.a[0] = out.a[0].plus(&chi.derivative(len), eps);
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Free,
    Electric,
    Magnetic,
    Mixed,
    /// seeded random V and A with a few harmonics
    Generic,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::Free, Preset::Electric, Preset::Magnetic, Preset::Mixed, Preset::Generic];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Free => "free",
            Preset::Electric => "electric",
            Preset::Magnetic => "magnetic",
            Preset::Mixed => "mixed",
            Preset::Generic => "generic",
        }
    }

    pub fn fields(self, seed: u64) -> Fields {
        let mut f = Fields::default();
        match self {
            Preset::Free => {}
            Preset::Electric => f.v = Trig::sin(1, 1.0),
            Preset::Magnetic => f.a[1] = Trig::cos(1, 1.0),
            Preset::Mixed => {
                f.v = Trig::sin(1, 1.0);
                f.a[1] = Trig::cos(1, 1.0);
            }
            Preset::Generic => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                f.v = Trig::random(&mut rng, 3, 1.0);
                for a in f.a.iter_mut() {
                    *a = Trig::random(&mut rng, 3, 1.0);
                }
            }
        }
        f
    }
}

impl FromStr for Preset {
    type Err = SaptError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| SaptError::Config(format!("unknown field preset `{s}`")))
    }
}

/// Seeded periodic gauge function for covariance checks.
pub fn generic_chi(seed: u64) -> Trig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    Trig::random(&mut rng, 4, 2.0)
}
