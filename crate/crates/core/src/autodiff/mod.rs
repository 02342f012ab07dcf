//! Reverse-mode differentiation over the [`Scalar`](crate::scalar::Scalar)
//! contract, and the ADAM optimizer used by the trainer.

mod adam;
mod tape;

pub use adam::{Adam, AdamConfig};
pub use tape::{grad, record, Tape, Tracked};
