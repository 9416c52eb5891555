//! Grids, transforms, the dispersion symbol and the dyadic cutoff family.

mod cutoff;
mod grid;

pub use cutoff::{band_project, bump, Cutoff};
pub use grid::{lambda_symbol, SpectralGrid, OVERSAMPLING, PRODUCT_PADDING};
