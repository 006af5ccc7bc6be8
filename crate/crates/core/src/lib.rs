//! Simulator and protocol compiler for Kitaev's D(S3) quantum double model.

pub mod demos;
pub mod dense;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod program;
pub mod protocols;
pub mod register;
pub mod ribbon;
pub mod s3;
pub mod verify;

pub use error::{Error, Result};
