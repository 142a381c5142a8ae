//! Bayesian shape optimization in a PCA eigenshape basis.

pub mod acquisition;
pub mod bench;
pub mod bo;
pub mod error;
pub mod linalg;
pub mod eigenbasis;
pub mod gp;
pub mod optim;
pub mod reduction;
pub mod shapes;

pub use error::{Error, Result};
