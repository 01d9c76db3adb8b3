//! A numerical laboratory for absolute parallelisms.
//!
//! Given a frame field `w` on a coordinate chart, `paralex` computes the
//! objects it induces: groupoid arrows, the canonical metric, the
//! integrability object, the two canonical connections, linear and primary
//! curvature with its Ricci, scalar and sectional contractions, the Killing
//! form of the induced Lie algebra, and the Levi-Civita curvature of the
//! canonical metric for comparison.

pub mod algebra;
pub mod cli;
pub mod connections;
pub mod curvature;
pub mod domain;
pub mod error;
pub mod frame;
pub mod parallel;
pub mod report;
pub mod tensor;

pub use error::{Error, Result};
