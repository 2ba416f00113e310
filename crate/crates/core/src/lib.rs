//! Warped product metrics `S2 x_f S1` and `S1 x_h S2` on sampled warping
//! functions: curvature, circle and ball means, torus sweepout widths,
//! distributional scalar curvature, geodesics and sequence diagnostics.

pub mod distscal;
pub mod error;
pub mod geodesics;
pub mod harmonics;
pub mod means;
pub mod metrics;
pub mod mina;
pub mod report;
pub mod sequences;
pub mod spheregrid;

pub use error::{Error, Result};
pub use report::InequalityReport;
