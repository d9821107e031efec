pub mod cli;
pub mod error;
pub mod experiments;
pub mod hypothesis;
pub mod loss;
pub mod quadrature;
pub mod risk_oracle;
pub mod rng;
pub mod solver;
pub mod stable_noise;

pub use error::{Error, Result};
