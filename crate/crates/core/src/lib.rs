//! Exact computation and minimization of fractional routing capacity regions
//! for capacitated networks carrying multicast sessions.

pub mod elimination;
pub mod error;
pub mod feasibility;
pub mod japanese;
pub mod lp;
pub mod network;
pub mod numerics;
pub mod oracle;
pub mod ring_lab;

pub use error::{Error, Result};
pub use numerics::Rational;
