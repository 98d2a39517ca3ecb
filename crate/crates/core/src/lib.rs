//! Synthetic Ricci curvature on discretized metric measure spaces.
//!
//! The crate estimates contraction-rate curvature from Wasserstein distances
//! between heat-flowed Dirac masses, compares it with closed-form
//! Bakry–Émery quantities on weighted model manifolds, enumerates the
//! measure-preserving isometry groups of finite metric measure spaces, and
//! evaluates explicit finiteness constants.
//!
//! ```
//! use synthric::mms::{FourierSeries, ModelManifold};
//! use synthric::curvature::ricci_infty;
//!
//! let v = FourierSeries { cos: vec![(1, 0.5)], ..Default::default() };
//! let circle = ModelManifold::circle(1.0, v).unwrap();
//! let ric = ricci_infty(&circle, [std::f64::consts::PI, 0.0], [1.0, 0.0]).unwrap();
//! assert!((ric - 0.5).abs() < 1e-15);
//! ```

pub mod bochner;
pub mod cli;
pub mod curvature;
pub mod error;
pub mod heat;
pub mod io;
pub mod isometry;
pub mod mms;
pub mod numeric;
pub mod transport;

pub use error::{Error, Result};
pub use mms::{dirac, FiniteMMS, ModelManifold, ProbVector};
