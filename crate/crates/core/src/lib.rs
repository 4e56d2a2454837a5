//! Truncated arithmetic in rings of p-adic Laurent series with the standard
//! Frobenius lift u -> u^q, element Newton polygons, and slope invariants of
//! Frobenius modules.

pub mod cohomology;
pub mod context;
pub mod division;
pub mod element;
pub mod error;
pub mod instances;
pub mod inverse;
pub mod json;
pub mod matfactor;
pub mod matrix;
pub mod modarith;
pub mod normal_form;
pub mod polygon;
pub mod rational;
pub mod scalar;
pub mod semiunit;
pub mod sigma;
pub mod slopes;
pub mod suites;
pub mod valuation;

pub use context::{Ctx, RingContext};
pub use element::LaurentElement;
pub use error::{Error, Result};
pub use polygon::{Interval, NewtonPolygon};
pub use rational::Q;
pub use scalar::PAdicScalar;
