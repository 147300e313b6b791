//! Three-dimensional FFTs on `M³` grids and the band-limited transforms
//! between truncated Fourier coefficients and real grid samples.
//!
//! Real fields are transformed two at a time by packing them into the real
//! and imaginary parts of one complex array.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::modes::{self, Mode};

pub struct Fft3 {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft3 {
    /// Cached plan for an `m³` grid.
    pub fn plan(m: usize) -> Arc<Fft3> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry(m)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                Arc::new(Fft3 {
                    m,
                    forward: planner.plan_fft_forward(m),
                    inverse: planner.plan_fft_inverse(m),
                })
            })
            .clone()
    }

    pub fn size(&self) -> usize {
        self.m
    }

    /// Unnormalized transform in place; `inverse` uses the `exp(+i…)` kernel.
    pub fn process(&self, buf: &mut [Complex64], inverse: bool) {
        let m = self.m;
        let m2 = m * m;
        assert_eq!(buf.len(), m2 * m);
        let fft = if inverse { &self.inverse } else { &self.forward };
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        // contiguous axis
        fft.process_with_scratch(buf, &mut scratch);
        let mut lines = vec![Complex64::default(); m2];
        // middle axis
        for x1 in 0..m {
            let slab = &mut buf[x1 * m2..(x1 + 1) * m2];
            for x2 in 0..m {
                for x3 in 0..m {
                    lines[x3 * m + x2] = slab[x2 * m + x3];
                }
            }
            fft.process_with_scratch(&mut lines, &mut scratch);
            for x2 in 0..m {
                for x3 in 0..m {
                    slab[x2 * m + x3] = lines[x3 * m + x2];
                }
            }
        }
        // outer axis
        for x2 in 0..m {
            for x1 in 0..m {
                for x3 in 0..m {
                    lines[x3 * m + x1] = buf[x1 * m2 + x2 * m + x3];
                }
            }
            fft.process_with_scratch(&mut lines, &mut scratch);
            for x1 in 0..m {
                for x3 in 0..m {
                    buf[x1 * m2 + x2 * m + x3] = lines[x3 * m + x1];
                }
            }
        }
    }
}

fn scatter(cutoff: usize, coeffs: &[Complex64], m: usize, buf: &mut [Complex64], factor: Complex64) {
    for (i, n) in modes::modes(cutoff) {
        let c = coeffs[i];
        if c.re != 0.0 || c.im != 0.0 {
            let k = (modes::wrap(n[0], m) * m + modes::wrap(n[1], m)) * m + modes::wrap(n[2], m);
            buf[k] += c * factor;
        }
    }
}

/// Evaluates real band-limited fields on an `m³` grid.
///
/// Each input slice holds Hermitian-symmetric coefficients for the modes
/// `|n|_∞ ≤ cutoff` in storage order; `m ≥ 2·cutoff + 1` is assumed.
pub fn synthesize(cutoff: usize, inputs: &[&[Complex64]], m: usize) -> Vec<Vec<f64>> {
    let plan = Fft3::plan(m);
    let len = m * m * m;
    let mut out = Vec::with_capacity(inputs.len());
    let mut buf = vec![Complex64::default(); len];
    for pair in inputs.chunks(2) {
        buf.iter_mut().for_each(|z| *z = Complex64::default());
        scatter(cutoff, pair[0], m, &mut buf, Complex64::new(1.0, 0.0));
        if let Some(second) = pair.get(1) {
            scatter(cutoff, second, m, &mut buf, Complex64::new(0.0, 1.0));
        }
        plan.process(&mut buf, true);
        out.push(buf.iter().map(|z| z.re).collect());
        if pair.len() == 2 {
            out.push(buf.iter().map(|z| z.im).collect());
        }
    }
    out
}

/// Fourier analysis of real grid fields, truncated to `|n|_∞ ≤ cutoff` and
/// normalized so a constant field maps to its value at `n = 0`. The output
/// is exactly Hermitian-symmetric.
pub fn analyze(inputs: &[&[f64]], m: usize, cutoff: usize) -> Vec<Vec<Complex64>> {
    let plan = Fft3::plan(m);
    let len = m * m * m;
    let scale = 1.0 / len as f64;
    let count = modes::mode_count(cutoff);
    let index = |n: Mode| (modes::wrap(n[0], m) * m + modes::wrap(n[1], m)) * m + modes::wrap(n[2], m);
    let mut out = Vec::with_capacity(inputs.len());
    let mut buf = vec![Complex64::default(); len];
    for pair in inputs.chunks(2) {
        let second = pair.get(1);
        for (k, z) in buf.iter_mut().enumerate() {
            *z = Complex64::new(pair[0][k], second.map_or(0.0, |s| s[k]));
        }
        plan.process(&mut buf, false);
        let mut first = vec![Complex64::default(); count];
        let mut other = vec![Complex64::default(); if second.is_some() { count } else { 0 }];
        for (i, n) in modes::modes(cutoff) {
            let z = buf[index(n)];
            let zc = buf[index([-n[0], -n[1], -n[2]])].conj();
            first[i] = (z + zc) * (0.5 * scale);
            if second.is_some() {
                other[i] = (z - zc) * Complex64::new(0.0, -0.5 * scale);
            }
        }
        out.push(first);
        if second.is_some() {
            out.push(other);
        }
    }
    out
}
