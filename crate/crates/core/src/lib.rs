//! Symmetrization of regions in weighted warped products and circle
//! bundles, with independent perimeter estimators and property checks.

pub mod bundles;
pub mod error;
pub mod measure;
pub mod numeric;
pub mod par;
pub mod regions;
pub mod spaces;
pub mod symmetrize;
pub mod verify;

pub use error::{Error, Result};
