pub mod error;
pub mod linalg;
pub mod objective;
pub mod quadrature;
pub mod discrete_gradient;
pub mod dg_solvers;
pub mod rates;
pub mod optimizer;
pub mod problems;
pub mod harness;

pub use error::{Error, Result};
