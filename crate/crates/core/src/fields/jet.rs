//! Grid values of a connection together with all first derivatives,
//! computed spectrally.

use num_complex::Complex64;

use super::fft;
use super::grid::{check_resolution, resolved_cutoff, GridConnection};
use super::modes;
use super::spectral::SpectralConnection;
use crate::algebra::GroupSpec;
use crate::error::Result;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

pub struct Jet {
    pub group: GroupSpec,
    pub m: usize,
    pub points: usize,
    /// `A^a_i` at `[(a*3 + i)*points + x]`.
    pub a: Vec<f64>,
    /// `∂_k A^a_i` at `[((a*3 + k)*3 + i)*points + x]`.
    pub da: Vec<f64>,
}

/// Coefficients of `∂_k f` for one scalar component.
pub fn derivative(cutoff: usize, coeffs: &[Complex64], k: usize) -> Vec<Complex64> {
    modes::modes(cutoff)
        .map(|(i, n)| coeffs[i] * Complex64::new(0.0, TWO_PI * n[k] as f64))
        .collect()
}

impl Jet {
    pub fn from_spectral(a: &SpectralConnection, m: usize) -> Result<Self> {
        check_resolution(m, a.cutoff())?;
        let d = a.group().algebra_dim();
        let cutoff = a.cutoff();
        let mut inputs: Vec<Vec<Complex64>> = Vec::with_capacity(d * 12);
        for c in 0..d * 3 {
            inputs.push(a.component(c).to_vec());
        }
        for ai in 0..d {
            for k in 0..3 {
                for i in 0..3 {
                    inputs.push(derivative(cutoff, a.component(ai * 3 + i), k));
                }
            }
        }
        let refs: Vec<&[Complex64]> = inputs.iter().map(|v| v.as_slice()).collect();
        let grids = fft::synthesize(cutoff, &refs, m);
        let (values, derivs) = grids.split_at(d * 3);
        Ok(Self {
            group: a.group(),
            m,
            points: m * m * m,
            a: values.concat(),
            da: derivs.concat(),
        })
    }

    /// Derivatives of grid data, exact when the field's band is below `M/2`.
    pub fn from_grid(a: &GridConnection) -> Result<Self> {
        let spec = a.to_spectral(resolved_cutoff(a.resolution()))?;
        let mut jet = Self::from_spectral(&spec, a.resolution())?;
        // keep the caller's samples bit-for-bit
        jet.a.copy_from_slice(a.values());
        Ok(jet)
    }

    #[inline]
    pub fn deriv(&self, a: usize, k: usize, i: usize, x: usize) -> f64 {
        self.da[((a * 3 + k) * 3 + i) * self.points + x]
    }
}
