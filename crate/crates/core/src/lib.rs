pub mod acoustic;
pub mod boundary_scatter;
pub mod discretization;
pub mod error;
pub mod farfield;
pub mod geometry;
pub mod harness;
pub mod kernels;
pub mod linalg;
pub mod mie;
pub mod solver;
pub mod volume_scatter;

pub use error::{Error, Result};
