//! Pseudospectral Yang-Mills and ZDDS heat flows on the unit 3-torus,
//! Gaussian free field initial data and regularized Wilson loops.
//!
//! Fields are band-limited: a connection with cutoff `N` carries the Fourier
//! modes `|n|_∞ ≤ N` of `A_j(x) = Σ_a A^a_j(x) Xᵃ` in the basis `e_n(x) =
//! exp(i2πn·x)`. Nonlinear terms are evaluated on a `(4N+2)³` grid, which
//! makes every cubic product and the Yang-Mills action exact.

pub mod algebra;
pub mod ensemble;
pub mod error;
pub mod fields;
pub mod flow;
pub mod gff;
pub mod verify;
pub mod wilson;

pub use error::{Error, Result};
