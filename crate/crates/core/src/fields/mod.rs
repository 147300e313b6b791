//! Spectral and grid representations of 𝔤-valued forms on the 3-torus and
//! the differential operators acting on them.

pub mod fft;
pub mod gauge;
pub mod grid;
pub mod io;
pub(crate) mod jet;
pub mod modes;
pub mod ops;
pub mod rhs;
pub mod spectral;

pub use gauge::{gauge_transform, GaugeTransform};
pub use grid::{dealiased_resolution, to_grid, to_spectral, CurvatureField, Grid0Form, Grid2Form, GridConnection};
pub use ops::{
    coulomb_project_u1, curvature, d_star_1form, d_star_2form, exterior_d, interior, wedge, ym_action,
    ym_action_u1_spectral,
};
pub use rhs::{ym_rhs, zdds_rhs, zdds_rhs_composed, Equation};
pub use spectral::{Spectral0Form, Spectral2Form, SpectralConnection};
