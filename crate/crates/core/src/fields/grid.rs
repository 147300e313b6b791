//! Real-space samples of 𝔤-valued forms on the uniform grid
//! `x = (x1, x2, x3)/M`, stored as `[a][component][x1][x2][x3]` in the
//! standard basis coordinates.

use num_complex::Complex64;

use super::fft;
use super::spectral::{Spectral0Form, Spectral2Form, SpectralConnection, PAIRS};
use crate::algebra::GroupSpec;
use crate::error::{Error, Result};

macro_rules! grid_form {
    ($name:ident, $spectral:ident, $components:expr) => {
        #[derive(Clone, Debug, PartialEq)]
        pub struct $name {
            group: GroupSpec,
            resolution: usize,
            values: Vec<f64>,
        }

        impl $name {
            pub const COMPONENTS: usize = $components;

            pub fn zeros(group: GroupSpec, resolution: usize) -> Self {
                let len = group.algebra_dim() * $components * resolution.pow(3);
                Self {
                    group,
                    resolution,
                    values: vec![0.0; len],
                }
            }

            pub fn from_values(group: GroupSpec, resolution: usize, values: Vec<f64>) -> Result<Self> {
                let len = group.algebra_dim() * $components * resolution.pow(3);
                if values.len() != len {
                    return Err(Error::DimensionMismatch(format!(
                        "expected {len} grid values for {group} at resolution {resolution}, got {}",
                        values.len()
                    )));
                }
                Ok(Self {
                    group,
                    resolution,
                    values,
                })
            }

            pub fn group(&self) -> GroupSpec {
                self.group
            }

            pub fn resolution(&self) -> usize {
                self.resolution
            }

            pub fn points(&self) -> usize {
                self.resolution.pow(3)
            }

            pub fn values(&self) -> &[f64] {
                &self.values
            }

            pub fn values_mut(&mut self) -> &mut [f64] {
                &mut self.values
            }

            pub fn component_count(&self) -> usize {
                self.group.algebra_dim() * $components
            }

            pub fn component(&self, c: usize) -> &[f64] {
                let p = self.points();
                &self.values[c * p..(c + 1) * p]
            }

            pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
                let p = self.points();
                &mut self.values[c * p..(c + 1) * p]
            }

            /// Samples a band-limited spectral form; requires `M ≥ 2N+1`.
            pub fn from_spectral(s: &$spectral, resolution: usize) -> Result<Self> {
                check_resolution(resolution, s.cutoff())?;
                let comps: Vec<&[Complex64]> = (0..s.component_count()).map(|c| s.component(c)).collect();
                let values = fft::synthesize(s.cutoff(), &comps, resolution).concat();
                Ok(Self {
                    group: s.group(),
                    resolution,
                    values,
                })
            }

            /// Discrete Fourier analysis truncated to `cutoff`; requires `M ≥ 2N+1`.
            pub fn to_spectral(&self, cutoff: usize) -> Result<$spectral> {
                check_resolution(self.resolution, cutoff)?;
                let comps: Vec<&[f64]> = (0..self.component_count()).map(|c| self.component(c)).collect();
                let coeffs = fft::analyze(&comps, self.resolution, cutoff).concat();
                $spectral::from_coeffs(self.group, cutoff, coeffs)
            }

            /// `(∫ Σ |f|²)^{1/2}` by grid averaging.
            pub fn l2_norm(&self) -> f64 {
                (self.values.iter().map(|v| v * v).sum::<f64>() / self.points() as f64).sqrt()
            }

            /// Largest pointwise Euclidean norm of the coordinate vector.
            pub fn linf_norm(&self) -> f64 {
                let p = self.points();
                let comps = self.component_count();
                let mut worst: f64 = 0.0;
                for x in 0..p {
                    let s: f64 = (0..comps).map(|c| self.values[c * p + x].powi(2)).sum();
                    worst = worst.max(s);
                }
                worst.sqrt()
            }

            pub fn max_abs_diff(&self, other: &Self) -> f64 {
                self.values
                    .iter()
                    .zip(&other.values)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            }

            pub fn scale(&self, s: f64) -> Self {
                let mut out = self.clone();
                out.values.iter_mut().for_each(|v| *v *= s);
                out
            }

            pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
                if self.group != other.group || self.resolution != other.resolution {
                    return Err(Error::DimensionMismatch(format!(
                        "{} at resolution {} vs {} at resolution {}",
                        self.group, self.resolution, other.group, other.resolution
                    )));
                }
                let mut out = self.clone();
                for (v, w) in out.values.iter_mut().zip(&other.values) {
                    *v += s * w;
                }
                Ok(out)
            }

            pub fn sub(&self, other: &Self) -> Result<Self> {
                self.axpy(-1.0, other)
            }

            pub fn is_finite(&self) -> bool {
                self.values.iter().all(|v| v.is_finite())
            }
        }
    };
}

grid_form!(GridConnection, SpectralConnection, 3);
grid_form!(Grid0Form, Spectral0Form, 1);
grid_form!(Grid2Form, Spectral2Form, 3);

/// Curvature 2-form on the grid; only `i < j` is stored.
pub type CurvatureField = Grid2Form;

impl GridConnection {
    pub fn index(&self, a: usize, j: usize, x: usize) -> usize {
        (a * 3 + j) * self.points() + x
    }

    pub fn get(&self, a: usize, j: usize, x: usize) -> f64 {
        self.values[self.index(a, j, x)]
    }
}

impl Grid2Form {
    /// `F^a_{ij}` at grid point `x`, with antisymmetry applied.
    pub fn get(&self, a: usize, i: usize, j: usize, x: usize) -> f64 {
        match super::spectral::pair_slot(i, j) {
            Some((p, sign)) => sign * self.values[(a * 3 + p) * self.points() + x],
            None => 0.0,
        }
    }

    pub fn pairs() -> [(usize, usize); 3] {
        PAIRS
    }
}

pub fn check_resolution(resolution: usize, cutoff: usize) -> Result<()> {
    let required = 2 * cutoff + 1;
    if resolution < required {
        return Err(Error::ResolutionTooSmall {
            resolution,
            cutoff,
            required,
        });
    }
    Ok(())
}

/// Grid size on which cubic products of cutoff-`N` fields are exact.
pub fn dealiased_resolution(cutoff: usize) -> usize {
    4 * cutoff + 2
}

/// Largest cutoff a grid of size `m` resolves without the Nyquist mode.
pub fn resolved_cutoff(m: usize) -> usize {
    (m - 1) / 2
}

/// Coordinates of the grid point with flat index `x`.
pub fn grid_point(resolution: usize, x: usize) -> [f64; 3] {
    let m = resolution;
    [
        (x / (m * m)) as f64 / m as f64,
        ((x / m) % m) as f64 / m as f64,
        (x % m) as f64 / m as f64,
    ]
}

pub fn to_grid(a: &SpectralConnection, resolution: usize) -> Result<GridConnection> {
    GridConnection::from_spectral(a, resolution)
}

pub fn to_spectral(a: &GridConnection, cutoff: usize) -> Result<SpectralConnection> {
    a.to_spectral(cutoff)
}
