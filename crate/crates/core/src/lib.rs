//! Noisy variational-circuit simulation and zero-noise extrapolation.
//!
//! The crate is layered bottom-up:
//!
//! - [`qcore`]: dense complex states, gates and Kronecker products
//! - [`ansatz`]: the RY-RZ-CNOT circuit and angle grids
//! - [`noise`]: depolarizing Kraus channels and noisy density-matrix evolution
//! - [`observables`]: Z-string expectation values, shot sampling and estimators
//! - [`vqe`]: grid scans in ideal, exact-noisy and sampled modes
//! - [`extrapolator`]: a from-scratch MLP trained with Adam, plus classical baselines
//! - [`harness`]: configuration, the end-to-end pipeline and file outputs

pub mod ansatz;
pub mod error;
pub mod extrapolator;
pub mod harness;
pub mod noise;
pub mod observables;
pub mod qcore;
pub mod vqe;

pub use error::{Error, Result};
