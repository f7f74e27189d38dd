//! Numerical toolkit for soliton surfaces of the CP^{N-1} sigma model.

pub mod error;
pub mod field;
pub mod geometry;
pub mod grid;
pub mod immersion;
pub mod io;
pub mod jet;
pub mod matlie;
pub mod sigma;
pub mod spectral;
pub mod stencil;
pub mod symmetry;

pub use error::{Error, Result};
pub use field::{Field, RealField};
pub use grid::{Chart, Grid2};
pub use matlie::{CMatrix, C64};
