//! Langevin Monte Carlo driven by completely uniformly distributed
//! sequences from linear feedback shift registers.
//!
//! The sampling code is generic over [`scalar::Real`] (`f32` or `f64`);
//! the aliases below fix the scalar for the common cases.

pub mod bench;
pub mod cud;
pub mod drive;
pub mod error;
pub mod models;
pub mod prng;
pub mod samplers;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type DriveMatrix64 = drive::DriveMatrix<f64>;
pub type DriveMatrix32 = drive::DriveMatrix<f32>;
pub type GaussianDrive64 = drive::GaussianDrive<f64>;
pub type Drive64 = samplers::Drive<f64>;
pub type ChainConfig64 = samplers::ChainConfig<f64>;
pub type ChainConfig32 = samplers::ChainConfig<f32>;
pub type ChainRun64 = samplers::ChainRun<f64>;
pub type ChainRun32 = samplers::ChainRun<f32>;
pub type StepSchedule64 = samplers::StepSchedule<f64>;
pub type PointSet64 = cud::PointSet<f64>;
