pub mod cli;
pub mod error;
pub mod fixtures;
pub mod grid;
pub mod matrix;
pub mod moyal;
pub mod recursion;
pub mod scalar;
pub mod taylor;
