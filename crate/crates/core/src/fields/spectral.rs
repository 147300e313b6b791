//! Truncated Fourier representations of 𝔤-valued 0-, 1- and 2-forms.
//!
//! Coefficients are stored with the basis index outermost: a connection
//! uses `[a][j][mode]`, a 2-form `[a][pair][mode]` with pairs `(0,1)`,
//! `(0,2)`, `(1,2)`, and a 0-form `[a][mode]`. Modes follow
//! [`super::modes`] ordering.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::modes::{self, Mode};
use crate::algebra::GroupSpec;
use crate::error::{Error, Result};

/// Index pairs `i < j` of 2-form storage.
pub const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Storage slot and sign of the component `(i, j)`; `None` on the diagonal.
pub fn pair_slot(i: usize, j: usize) -> Option<(usize, f64)> {
    match (i, j) {
        (0, 1) => Some((0, 1.0)),
        (0, 2) => Some((1, 1.0)),
        (1, 2) => Some((2, 1.0)),
        (1, 0) => Some((0, -1.0)),
        (2, 0) => Some((1, -1.0)),
        (2, 1) => Some((2, -1.0)),
        _ => None,
    }
}

macro_rules! spectral_form {
    ($name:ident, $components:expr) => {
        #[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
        pub struct $name {
            group: GroupSpec,
            cutoff: usize,
            coeffs: Vec<Complex64>,
        }

        impl $name {
            pub const COMPONENTS: usize = $components;

            pub fn zeros(group: GroupSpec, cutoff: usize) -> Self {
                let len = group.algebra_dim() * $components * modes::mode_count(cutoff);
                Self {
                    group,
                    cutoff,
                    coeffs: vec![Complex64::default(); len],
                }
            }

            pub fn from_coeffs(group: GroupSpec, cutoff: usize, coeffs: Vec<Complex64>) -> Result<Self> {
                let len = group.algebra_dim() * $components * modes::mode_count(cutoff);
                if coeffs.len() != len {
                    return Err(Error::DimensionMismatch(format!(
                        "expected {len} coefficients for {group} at cutoff {cutoff}, got {}",
                        coeffs.len()
                    )));
                }
                Ok(Self { group, cutoff, coeffs })
            }

            pub fn group(&self) -> GroupSpec {
                self.group
            }

            pub fn cutoff(&self) -> usize {
                self.cutoff
            }

            pub fn coeffs(&self) -> &[Complex64] {
                &self.coeffs
            }

            pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
                &mut self.coeffs
            }

            pub fn into_coeffs(self) -> Vec<Complex64> {
                self.coeffs
            }

            /// Number of scalar component functions (`d_𝔤 × components`).
            pub fn component_count(&self) -> usize {
                self.group.algebra_dim() * $components
            }

            /// Coefficients of one scalar component function.
            pub fn component(&self, c: usize) -> &[Complex64] {
                let count = modes::mode_count(self.cutoff);
                &self.coeffs[c * count..(c + 1) * count]
            }

            pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
                let count = modes::mode_count(self.cutoff);
                &mut self.coeffs[c * count..(c + 1) * count]
            }

            /// Largest violation of `c(-n) = conj(c(n))`.
            pub fn reality_defect(&self) -> f64 {
                let count = modes::mode_count(self.cutoff);
                let mut worst: f64 = 0.0;
                for comp in self.coeffs.chunks(count) {
                    for i in 0..count {
                        let j = modes::neg_index(self.cutoff, i);
                        worst = worst.max((comp[j] - comp[i].conj()).norm());
                    }
                }
                worst
            }

            /// Projects onto real fields: `c(n) ← (c(n) + conj c(-n))/2`.
            pub fn symmetrize(&mut self) {
                let count = modes::mode_count(self.cutoff);
                for comp in self.coeffs.chunks_mut(count) {
                    for i in 0..=count / 2 {
                        let j = modes::neg_index(self.cutoff, i);
                        let v = (comp[i] + comp[j].conj()) * 0.5;
                        comp[i] = v;
                        comp[j] = v.conj();
                    }
                }
            }

            /// Zero-padded (larger cutoff) or truncated (smaller cutoff) copy.
            pub fn with_cutoff(&self, cutoff: usize) -> Self {
                let mut out = Self::zeros(self.group, cutoff);
                let keep = cutoff.min(self.cutoff);
                let (src, dst) = (modes::mode_count(self.cutoff), modes::mode_count(cutoff));
                for c in 0..self.component_count() {
                    for (i, n) in modes::modes(self.cutoff) {
                        if modes::norm_inf(n) <= keep {
                            out.coeffs[c * dst + modes::mode_index(cutoff, n)] = self.coeffs[c * src + i];
                        }
                    }
                }
                out
            }

            /// `sqrt(Σ |c|²)`, which equals the L² norm `(∫ Σ |f|²)^{1/2}`.
            pub fn l2_norm(&self) -> f64 {
                self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
            }

            /// Discrete H¹ norm `(Σ (1 + 4π²|n|²)|c(n)|²)^{1/2}`.
            pub fn h1_norm(&self) -> f64 {
                let count = modes::mode_count(self.cutoff);
                let four_pi2 = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
                let mut acc = 0.0;
                for comp in self.coeffs.chunks(count) {
                    for (i, n) in modes::modes(self.cutoff) {
                        acc += (1.0 + four_pi2 * modes::norm_sq(n)) * comp[i].norm_sqr();
                    }
                }
                acc.sqrt()
            }

            pub fn scale(&self, s: f64) -> Self {
                let mut out = self.clone();
                out.coeffs.iter_mut().for_each(|z| *z *= s);
                out
            }

            fn check_same(&self, other: &Self) -> Result<()> {
                if self.group != other.group || self.cutoff != other.cutoff {
                    return Err(Error::DimensionMismatch(format!(
                        "{} at cutoff {} vs {} at cutoff {}",
                        self.group, self.cutoff, other.group, other.cutoff
                    )));
                }
                Ok(())
            }

            /// `self + s·other`.
            pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
                self.check_same(other)?;
                let mut out = self.clone();
                for (z, w) in out.coeffs.iter_mut().zip(&other.coeffs) {
                    *z += w * s;
                }
                Ok(out)
            }

            pub fn sub(&self, other: &Self) -> Result<Self> {
                self.axpy(-1.0, other)
            }

            pub fn add(&self, other: &Self) -> Result<Self> {
                self.axpy(1.0, other)
            }

            pub fn max_abs(&self) -> f64 {
                self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max)
            }

            pub fn is_finite(&self) -> bool {
                self.coeffs.iter().all(|z| z.re.is_finite() && z.im.is_finite())
            }
        }
    };
}

spectral_form!(SpectralConnection, 3);
spectral_form!(Spectral0Form, 1);
spectral_form!(Spectral2Form, 3);

impl SpectralConnection {
    pub fn index(&self, a: usize, j: usize, mode: usize) -> usize {
        (a * 3 + j) * modes::mode_count(self.cutoff) + mode
    }

    pub fn get(&self, a: usize, j: usize, n: Mode) -> Complex64 {
        self.coeffs[self.index(a, j, modes::mode_index(self.cutoff, n))]
    }

    pub fn set(&mut self, a: usize, j: usize, n: Mode, v: Complex64) {
        let k = self.index(a, j, modes::mode_index(self.cutoff, n));
        self.coeffs[k] = v;
    }

    /// Sets `c(n) = v` and `c(-n) = conj(v)`.
    pub fn set_pair(&mut self, a: usize, j: usize, n: Mode, v: Complex64) {
        self.set(a, j, n, v);
        self.set(a, j, [-n[0], -n[1], -n[2]], v.conj());
    }

    /// The vector `Â^a(n) ∈ ℂ³`.
    pub fn vector(&self, a: usize, mode: usize) -> [Complex64; 3] {
        let count = modes::mode_count(self.cutoff);
        std::array::from_fn(|j| self.coeffs[(a * 3 + j) * count + mode])
    }

    pub fn set_vector(&mut self, a: usize, mode: usize, v: [Complex64; 3]) {
        let count = modes::mode_count(self.cutoff);
        for (j, z) in v.into_iter().enumerate() {
            self.coeffs[(a * 3 + j) * count + mode] = z;
        }
    }
}

impl Spectral0Form {
    pub fn get(&self, a: usize, n: Mode) -> Complex64 {
        self.coeffs[a * modes::mode_count(self.cutoff) + modes::mode_index(self.cutoff, n)]
    }

    pub fn set_pair(&mut self, a: usize, n: Mode, v: Complex64) {
        let count = modes::mode_count(self.cutoff);
        self.coeffs[a * count + modes::mode_index(self.cutoff, n)] = v;
        self.coeffs[a * count + modes::mode_index(self.cutoff, [-n[0], -n[1], -n[2]])] = v.conj();
    }
}

impl Spectral2Form {
    /// Component `F̂^a_{ij}(n)` with antisymmetry applied.
    pub fn get(&self, a: usize, i: usize, j: usize, n: Mode) -> Complex64 {
        match pair_slot(i, j) {
            Some((p, sign)) => {
                self.coeffs[(a * 3 + p) * modes::mode_count(self.cutoff) + modes::mode_index(self.cutoff, n)] * sign
            }
            None => Complex64::default(),
        }
    }
}
