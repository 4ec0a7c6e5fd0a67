//! Integral Value Transformations (digit-wise base-p maps on the naturals),
//! the affine dynamical systems built from them, and a three-layer scheduling
//! topology derived from their attractors.

pub mod adds;
pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod ivt;
pub mod odpe;
pub mod report;

pub use error::{Error, Result};
pub use ivt::{Base, Ivt, IvtIndex, LocalRule, Value};
