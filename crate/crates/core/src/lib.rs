//! Homogeneous point-affine control systems with quadratic cost.

pub mod cli;
pub mod closedform;
pub mod coframing;
pub mod error;
pub mod integrate;
pub mod linode;
pub mod models;
pub mod pmp;
pub mod suite;
pub mod verify;

pub use error::{Error, Result};
pub use models::{CaseTag, ControlAffine, ModelSpec, Params, Polynomial, StateVec};
