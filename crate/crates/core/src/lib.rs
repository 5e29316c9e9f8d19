//! Simulation of the wave/particle quantum Cheshire cat: exact and
//! closed-form weak values, imaginary-time-evolution readout through ND
//! attenuation, an 8-mode optical model of the interferometer, shot-noise
//! Monte Carlo, line fitting, and two-qubit state tomography.

pub mod duality;
pub mod error;
pub mod exec;
pub mod fit;
pub mod ite;
pub mod optics;
pub mod qstate;
pub mod shots;
pub mod tomography;

pub use error::{Error, Result};
