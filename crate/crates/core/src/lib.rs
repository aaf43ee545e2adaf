//! Autonomous quantum thermal machines driven by a quantum battery.
//!
//! Units: hbar = k_B = 1. Joint operators act on S (x) R with the medium first.

pub mod analytics;
pub mod bath;
pub mod dynamics;
pub mod integrate;
pub mod par;
pub mod battery;
pub mod error;
pub mod machine;
pub mod operator;
pub mod oracle;
pub mod thermometry;
pub mod tol;

pub use error::{Error, ErrorClass, Result};
pub use operator::{ComplexMatrix, DensityMatrix, HermitianOperator, C64};
