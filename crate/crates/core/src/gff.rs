//! Random initial data: the 𝔤³-valued Gaussian free field and the U(1)
//! Coulomb-gauge Gaussian ensemble.
//!
//! Randomness is keyed by `(seed, stream, mode)`: every mode `n` of the
//! half-space `I` draws its Gaussians from a ChaCha stream selected by `n`
//! alone, so a field at cutoff `N` is exactly the restriction of the field
//! at any larger cutoff with the same seed and stream.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::algebra::GroupSpec;
use crate::error::{Error, Result};
use crate::fields::modes::{self, Mode};
use crate::fields::SpectralConnection;

const PI: f64 = std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplerKind {
    /// `Â^a_j(n) = Z^a_j(n)/|n|` with standard complex Gaussians `Z`.
    Gff,
    /// Coulomb-gauge U(1) field with `E|Z_n|² = g²/(8π²|n|²)`.
    U1Coulomb,
}

/// Optional rescaling applied after sampling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Normalization {
    None,
    /// Multiply every coefficient by a constant.
    Scale(f64),
    /// Rescale to a prescribed discrete H¹ norm.
    H1Norm(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub kind: SamplerKind,
    pub group: GroupSpec,
    pub cutoff: usize,
    /// Coupling `g > 0`; used by the Coulomb sampler.
    pub coupling: f64,
    pub seed: u64,
    pub stream: u64,
    pub normalization: Normalization,
}

impl SamplerConfig {
    pub fn gff(group: GroupSpec, cutoff: usize, seed: u64, stream: u64) -> Self {
        Self {
            kind: SamplerKind::Gff,
            group,
            cutoff,
            coupling: 1.0,
            seed,
            stream,
            normalization: Normalization::None,
        }
    }

    pub fn u1_coulomb(cutoff: usize, coupling: f64, seed: u64, stream: u64) -> Self {
        Self {
            kind: SamplerKind::U1Coulomb,
            group: GroupSpec::u1(),
            cutoff,
            coupling,
            seed,
            stream,
            normalization: Normalization::None,
        }
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.cutoff < 1 {
            return Err(Error::InvalidArgument("cutoff must be at least 1".into()));
        }
        if !(self.coupling > 0.0 && self.coupling.is_finite()) {
            return Err(Error::InvalidArgument(format!("coupling must be positive, got {}", self.coupling)));
        }
        if self.kind == SamplerKind::U1Coulomb && !self.group.is_u1() {
            return Err(Error::NotAbelian(self.group));
        }
        match self.normalization {
            Normalization::Scale(s) if !s.is_finite() => {
                Err(Error::InvalidArgument("scale must be finite".into()))
            }
            Normalization::H1Norm(h) if !(h >= 0.0 && h.is_finite()) => {
                Err(Error::InvalidArgument("H1 target must be nonnegative".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Packs a mode into a 63-bit stream selector (21 bits per coordinate).
fn mode_code(n: Mode) -> u64 {
    const OFFSET: i64 = 1 << 20;
    n.iter()
        .fold(0u64, |acc, &k| (acc << 21) | ((k + OFFSET) as u64 & ((1 << 21) - 1)))
}

/// Deterministic Gaussian source for one mode.
pub struct ModeRng {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl ModeRng {
    pub fn new(seed: u64, stream: u64, tag: u64, n: Mode) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&stream.to_le_bytes());
        key[16..24].copy_from_slice(&tag.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(mode_code(n));
        Self { rng, spare: None }
    }

    /// Uniform in `(0, 1]`.
    fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal by the Box–Muller transform.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let r = (-2.0 * self.uniform().ln()).sqrt();
        let theta = 2.0 * PI * self.uniform();
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Standard complex Gaussian, `E|Z|² = 1`.
    pub fn complex_normal(&mut self) -> Complex64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(self.normal() * s, self.normal() * s)
    }
}

const TAG_GFF: u64 = 0x6766_6600;
const TAG_COULOMB: u64 = 0x636f_756c;

/// Orthonormal frame `(u¹, u²)` of the plane orthogonal to `n`, chosen
/// deterministically from the half-space representative of `±n`.
pub fn transverse_frame(n: Mode) -> Result<[[f64; 3]; 2]> {
    if n == [0, 0, 0] {
        return Err(Error::InvalidArgument("transverse frame of the zero mode".into()));
    }
    let rep = if modes::in_half_space(n) { n } else { [-n[0], -n[1], -n[2]] };
    let v = rep.map(|k| k as f64);
    // axis with the smallest |n_k|, lowest index on ties
    let mut e = 0;
    for k in 1..3 {
        if v[k].abs() < v[e].abs() {
            e = k;
        }
    }
    let mut axis = [0.0; 3];
    axis[e] = 1.0;
    let normalize = |w: [f64; 3]| {
        let l = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
        w.map(|c| c / l)
    };
    let u1 = normalize(cross(v, axis));
    let u2 = normalize(cross(normalize(v), u1));
    Ok([u1, u2])
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn half_space_modes(cutoff: usize) -> impl Iterator<Item = (usize, Mode)> {
    modes::modes(cutoff).filter(|(_, n)| modes::in_half_space(*n))
}

/// Plain 𝔤³-valued GFF: `Â^a_j(n) = Z^a_j(n)/|n|` on `I_N`, conjugate on `−I_N`.
pub fn sample_gff(config: &SamplerConfig) -> Result<SpectralConnection> {
    config.validate()?;
    let group = config.group;
    let d = group.algebra_dim();
    let mut a = SpectralConnection::zeros(group, config.cutoff);
    for (_, n) in half_space_modes(config.cutoff) {
        let mut rng = ModeRng::new(config.seed, config.stream, TAG_GFF, n);
        let inv = 1.0 / modes::norm_sq(n).sqrt();
        for ai in 0..d {
            for j in 0..3 {
                a.set_pair(ai, j, n, rng.complex_normal() * inv);
            }
        }
    }
    Ok(normalize(a, config.normalization))
}

/// Coulomb-gauge U(1) ensemble. With `Z_n = Z¹u¹ + Z²u²` and the four real
/// parts of `Z¹, Z²` i.i.d. `N(0, g²/(32π²|n|²))`, the basis coefficient is
/// `−i Z_n` so that the matrix-valued coefficient `i·(−iZ_n) = Z_n` and
/// `Z_{−n} = −conj(Z_n)`.
pub fn sample_u1_coulomb(config: &SamplerConfig) -> Result<SpectralConnection> {
    if !config.group.is_u1() {
        return Err(Error::NotAbelian(config.group));
    }
    config.validate()?;
    let mut a = SpectralConnection::zeros(config.group, config.cutoff);
    for (k, n) in half_space_modes(config.cutoff) {
        let mut rng = ModeRng::new(config.seed, config.stream, TAG_COULOMB, n);
        let s = coulomb_std(config.coupling, n);
        let z1 = Complex64::new(rng.normal() * s, rng.normal() * s);
        let z2 = Complex64::new(rng.normal() * s, rng.normal() * s);
        let [u1, u2] = transverse_frame(n)?;
        let z: [Complex64; 3] = std::array::from_fn(|j| z1 * u1[j] + z2 * u2[j]);
        let coeff = z.map(|c| c * Complex64::new(0.0, -1.0));
        a.set_vector(0, k, coeff);
        a.set_vector(0, modes::neg_index(config.cutoff, k), coeff.map(|c| c.conj()));
    }
    Ok(normalize(a, config.normalization))
}

/// Standard deviation `g/(√32·π|n|)` of each real Coulomb component.
pub fn coulomb_std(coupling: f64, n: Mode) -> f64 {
    coupling / (32f64.sqrt() * PI * modes::norm_sq(n).sqrt())
}

/// `E|Z_n|` for the Coulomb law: a χ₄ variable scaled by [`coulomb_std`].
pub fn coulomb_mean_abs(coupling: f64, n: Mode) -> f64 {
    // E χ₄ = √2 Γ(5/2)/Γ(2) = 3√(2π)/4
    3.0 * (2.0 * PI).sqrt() / 4.0 * coulomb_std(coupling, n)
}

pub fn sample(config: &SamplerConfig) -> Result<SpectralConnection> {
    match config.kind {
        SamplerKind::Gff => sample_gff(config),
        SamplerKind::U1Coulomb => sample_u1_coulomb(config),
    }
}

fn normalize(a: SpectralConnection, normalization: Normalization) -> SpectralConnection {
    match normalization {
        Normalization::None => a,
        Normalization::Scale(s) => a.scale(s),
        Normalization::H1Norm(target) => {
            let h = a.h1_norm();
            if h > 0.0 {
                a.scale(target / h)
            } else {
                a
            }
        }
    }
}

/// Which covariance the diagnostic compares against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CovarianceModel {
    /// `δ_ab δ_jk Σ_{0<|n|_∞≤N} cos(2πn·(x−y))/|n|²`.
    Gff,
    /// `Σ_{0<|n|_∞≤N} g²/(16π²|n|²) (δ_jk − n_jn_k/|n|²) cos(2πn·(x−y))`.
    U1Coulomb { coupling: f64 },
}

impl CovarianceModel {
    pub fn theory(&self, cutoff: usize, a: usize, j: usize, b: usize, k: usize, r: [f64; 3]) -> f64 {
        if a != b {
            return 0.0;
        }
        let mut acc = 0.0;
        for (_, n) in modes::modes(cutoff) {
            let nn = modes::norm_sq(n);
            if nn == 0.0 {
                continue;
            }
            let c = (2.0 * PI * (0..3).map(|i| n[i] as f64 * r[i]).sum::<f64>()).cos();
            acc += match self {
                Self::Gff => {
                    if j == k {
                        c / nn
                    } else {
                        0.0
                    }
                }
                Self::U1Coulomb { coupling } => {
                    let delta = if j == k { 1.0 } else { 0.0 };
                    coupling * coupling / (16.0 * PI * PI * nn) * (delta - n[j] as f64 * n[k] as f64 / nn) * c
                }
            };
        }
        acc
    }
}

/// One compared covariance entry.
#[derive(Clone, Debug, Serialize)]
pub struct CovarianceEntry {
    pub pair: usize,
    pub a: usize,
    pub j: usize,
    pub b: usize,
    pub k: usize,
    pub empirical: f64,
    pub standard_error: f64,
    pub theory: f64,
    pub z_score: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CovarianceReport {
    pub samples: usize,
    pub entries: Vec<CovarianceEntry>,
    /// Largest `|empirical − theory|/SE` over all entries.
    pub max_z: f64,
}

/// Evaluates the basis coordinates `A^a_j(x)` by direct Fourier summation.
pub fn evaluate_point(a: &SpectralConnection, x: [f64; 3]) -> Vec<f64> {
    let d = a.group().algebra_dim();
    let mut out = vec![0.0; d * 3];
    let phases: Vec<Complex64> = modes::modes(a.cutoff())
        .map(|(_, n)| Complex64::from_polar(1.0, 2.0 * PI * (0..3).map(|i| n[i] as f64 * x[i]).sum::<f64>()))
        .collect();
    for (c, o) in out.iter_mut().enumerate() {
        *o = a
            .component(c)
            .iter()
            .zip(&phases)
            .map(|(z, e)| (z * e).re)
            .sum();
    }
    out
}

/// Compares empirical two-point functions `E[A^a_j(x) A^b_k(y)]` with the
/// truncated Green's function of `model`.
pub fn covariance_diagnostic(
    samples: &[SpectralConnection],
    pairs: &[([f64; 3], [f64; 3])],
    model: CovarianceModel,
) -> Result<CovarianceReport> {
    const MIN_SAMPLES: usize = 1000;
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_SAMPLES,
            got: samples.len(),
        });
    }
    let cutoff = samples[0].cutoff();
    let d = samples[0].group().algebra_dim();
    let count = samples.len() as f64;
    let mut entries = Vec::new();
    for (p, (x, y)) in pairs.iter().enumerate() {
        let values: Vec<(Vec<f64>, Vec<f64>)> =
            samples.iter().map(|s| (evaluate_point(s, *x), evaluate_point(s, *y))).collect();
        let r = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
        for a in 0..d {
            for j in 0..3 {
                for b in 0..d {
                    for k in 0..3 {
                        let prods: Vec<f64> = values.iter().map(|(u, v)| u[a * 3 + j] * v[b * 3 + k]).collect();
                        let mean = prods.iter().sum::<f64>() / count;
                        let var = prods.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
                        let se = (var / count).sqrt();
                        let theory = model.theory(cutoff, a, j, b, k, r);
                        let z = if se > 0.0 { (mean - theory).abs() / se } else { 0.0 };
                        entries.push(CovarianceEntry {
                            pair: p,
                            a,
                            j,
                            b,
                            k,
                            empirical: mean,
                            standard_error: se,
                            theory,
                            z_score: z,
                        });
                    }
                }
            }
        }
    }
    let max_z = entries.iter().map(|e| e.z_score).fold(0.0, f64::max);
    Ok(CovarianceReport {
        samples: samples.len(),
        entries,
        max_z,
    })
}
