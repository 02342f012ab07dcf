pub mod autodiff;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod embedding;
pub mod error;
pub mod interval;
pub mod lifted;
pub mod matrix;
pub mod neural;
pub mod policy;
pub mod scalar;
pub mod trainer;

pub use error::{Error, Result};
