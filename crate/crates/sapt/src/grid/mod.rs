//! Numerical validation on a one-dimensional reduction: fields depend on x₁
//! only, with plane waves in x₂ and x₃.

pub mod experiments;
pub mod fields;
pub mod geometry;
pub mod linalg;
pub mod numeric;
pub mod quantize;

pub use experiments::*;
pub use fields::{generic_chi, Fields, Preset, Trig};
pub use geometry::{Geometry, GridSpec};
pub use linalg::{GridOperator, GridState, Spectrum};
pub use numeric::NumericSymbol;
pub use quantize::{quantize, quantize_matrix};
