//! Weighted warped products and their fiber-ball profiles.

mod catalog;
mod fiber;
mod scheme;
mod warped;

pub use catalog::ScalarFn;
pub use fiber::{unit_sphere_area, FiberChart, FiberGeometry, FiberKind};
pub use scheme::{CellMeasure, GridScheme};
pub use warped::WarpedSpace;
