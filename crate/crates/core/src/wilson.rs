//! Loops on the torus, holonomies and Wilson loop observables.
//!
//! A loop is a closed polyline in lift coordinates. Its holonomy solves
//! `h′ = h·A(ℓ)·ℓ′`, `h(0) = id`, integrated segment by segment with a
//! third-order Runge-Kutta-Munthe-Kaas scheme so that every iterate is a
//! product of exponentials and stays on the group.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{basis_for, expm, AlgebraBasis, CMatrix, GroupElement, GroupSpec};
use crate::error::{Error, Result};
use crate::fields::grid::resolved_cutoff;
use crate::fields::modes::{self, Mode};
use crate::fields::{GaugeTransform, GridConnection, SpectralConnection};
use crate::gff::coulomb_mean_abs;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const CLOSURE_TOLERANCE: f64 = 1e-9;
const MIN_SEGMENT_STEPS: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Loop {
    pub id: String,
    vertices: Vec<[f64; 3]>,
    winding: [i64; 3],
}

/// Validates a closed polyline: the last vertex must equal the first plus
/// the winding vector, and no segment may be degenerate.
pub fn make_loop(vertices: Vec<[f64; 3]>, winding: [i64; 3]) -> Result<Loop> {
    if vertices.len() < 2 {
        return Err(Error::InvalidLoop(format!("need at least 2 vertices, got {}", vertices.len())));
    }
    if vertices.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidLoop("non-finite vertex".into()));
    }
    let first = vertices[0];
    let last = vertices[vertices.len() - 1];
    for k in 0..3 {
        let gap = last[k] - first[k] - winding[k] as f64;
        if gap.abs() > CLOSURE_TOLERANCE {
            return Err(Error::InvalidLoop(format!(
                "path is not closed: last - first = ({}, {}, {}) but winding is ({}, {}, {})",
                last[0] - first[0],
                last[1] - first[1],
                last[2] - first[2],
                winding[0],
                winding[1],
                winding[2]
            )));
        }
    }
    for (s, w) in vertices.windows(2).enumerate() {
        if dist(w[0], w[1]) == 0.0 {
            return Err(Error::InvalidLoop(format!("segment {s} has zero length")));
        }
    }
    Ok(Loop {
        id: String::new(),
        vertices,
        winding,
    })
}

fn dist(p: [f64; 3], q: [f64; 3]) -> f64 {
    (0..3).map(|k| (q[k] - p[k]).powi(2)).sum::<f64>().sqrt()
}

impl Loop {
    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn winding(&self) -> [i64; 3] {
        self.winding
    }

    pub fn segments(&self) -> impl Iterator<Item = ([f64; 3], [f64; 3])> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn segment_count(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(p, q)| dist(p, q)).sum()
    }

    /// `ℓ(s)` under the arc-proportional parametrization of `[0, 1]`.
    pub fn point(&self, s: f64) -> [f64; 3] {
        let total = self.length();
        let mut target = s.clamp(0.0, 1.0) * total;
        let count = self.segment_count();
        for (k, (p, q)) in self.segments().enumerate() {
            let len = dist(p, q);
            if target <= len || k + 1 == count {
                let u = (target / len).min(1.0);
                return std::array::from_fn(|i| p[i] + u * (q[i] - p[i]));
            }
            target -= len;
        }
        unreachable!("a loop has at least one segment")
    }

    /// Same image traversed backwards.
    pub fn reversed(&self) -> Loop {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        Loop {
            id: self.id.clone(),
            vertices,
            winding: self.winding.map(|m| -m),
        }
    }
}

/// Splits every segment into `pieces` equal parts; the image is unchanged.
pub fn reparametrize(l: &Loop, pieces: usize) -> Result<Loop> {
    if pieces == 0 {
        return Err(Error::InvalidArgument("subdivision needs at least one piece per segment".into()));
    }
    let mut vertices = vec![l.vertices[0]];
    for (p, q) in l.segments() {
        for k in 1..=pieces {
            let u = k as f64 / pieces as f64;
            vertices.push(if k == pieces {
                q
            } else {
                std::array::from_fn(|i| p[i] + u * (q[i] - p[i]))
            });
        }
    }
    Ok(Loop {
        id: l.id.clone(),
        vertices,
        winding: l.winding,
    })
}

/// Parses loop definitions:
///
/// ```text
/// # comment
/// loop plaquette
/// winding 0 0 0
/// 0 0 0
/// 0.25 0 0
/// ```
///
/// Each `loop` line opens a new loop; its vertex lines follow the optional
/// `winding` line (default `0 0 0`).
pub fn parse_loops(text: &str) -> Result<Vec<Loop>> {
    struct Pending {
        id: String,
        line: usize,
        winding: Option<[i64; 3]>,
        vertices: Vec<[f64; 3]>,
    }
    fn finish(p: Pending, out: &mut Vec<Loop>) -> Result<()> {
        let l = make_loop(p.vertices, p.winding.unwrap_or([0; 3])).map_err(|e| Error::Parse {
            line: p.line,
            message: format!("loop '{}': {e}", p.id),
        })?;
        out.push(l.with_id(p.id));
        Ok(())
    }
    let mut out = Vec::new();
    let mut current: Option<Pending> = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let words: Vec<&str> = content.split_whitespace().collect();
        let err = |message: String| Error::Parse { line, message };
        match words[0] {
            "loop" => {
                if words.len() != 2 {
                    return Err(err("expected 'loop <id>'".into()));
                }
                if let Some(p) = current.take() {
                    finish(p, &mut out)?;
                }
                if out.iter().any(|l| l.id == words[1]) {
                    return Err(err(format!("duplicate loop id '{}'", words[1])));
                }
                current = Some(Pending {
                    id: words[1].to_string(),
                    line,
                    winding: None,
                    vertices: Vec::new(),
                });
            }
            "winding" => {
                let p = current.as_mut().ok_or_else(|| err("'winding' before any 'loop' line".into()))?;
                if p.winding.is_some() || !p.vertices.is_empty() {
                    return Err(err("'winding' must come once, before the vertices".into()));
                }
                if words.len() != 4 {
                    return Err(err("expected 'winding m1 m2 m3'".into()));
                }
                let mut m = [0i64; 3];
                for (slot, w) in m.iter_mut().zip(&words[1..]) {
                    *slot = w.parse().map_err(|_| err(format!("winding entry '{w}' is not an integer")))?;
                }
                p.winding = Some(m);
            }
            _ => {
                let p = current.as_mut().ok_or_else(|| err("vertex before any 'loop' line".into()))?;
                if words.len() != 3 {
                    return Err(err(format!("expected 3 coordinates, got {}", words.len())));
                }
                let mut v = [0.0; 3];
                for (slot, w) in v.iter_mut().zip(&words) {
                    *slot = w
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| err(format!("coordinate '{w}' is not a finite number")))?;
                }
                p.vertices.push(v);
            }
        }
    }
    if let Some(p) = current.take() {
        finish(p, &mut out)?;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CharacterKind {
    Fundamental,
    Conjugate,
    U1Power(i64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Character {
    pub group: GroupSpec,
    pub kind: CharacterKind,
}

impl Character {
    pub fn new(group: GroupSpec, kind: CharacterKind) -> Result<Self> {
        if matches!(kind, CharacterKind::U1Power(_)) && !group.is_u1() {
            return Err(Error::NotAbelian(group));
        }
        Ok(Self { group, kind })
    }

    pub fn fundamental(group: GroupSpec) -> Self {
        Self {
            group,
            kind: CharacterKind::Fundamental,
        }
    }

    pub fn conjugate(group: GroupSpec) -> Self {
        Self {
            group,
            kind: CharacterKind::Conjugate,
        }
    }

    pub fn u1_power(k: i64) -> Self {
        Self {
            group: GroupSpec::u1(),
            kind: CharacterKind::U1Power(k),
        }
    }

    /// `χ(id)`, the dimension of the representation.
    pub fn dimension(&self) -> f64 {
        match self.kind {
            CharacterKind::U1Power(_) => 1.0,
            _ => self.group.n as f64,
        }
    }

    pub fn evaluate(&self, h: &GroupElement) -> Complex64 {
        match self.kind {
            CharacterKind::Fundamental => h.trace(),
            CharacterKind::Conjugate => h.trace().conj(),
            CharacterKind::U1Power(k) => h.matrix()[(0, 0)].powi(k as i32),
        }
    }

    /// `χ(exp(iθ))` for U(1).
    pub fn evaluate_phase(&self, theta: f64) -> Complex64 {
        let k = match self.kind {
            CharacterKind::Fundamental => 1,
            CharacterKind::Conjugate => -1,
            CharacterKind::U1Power(k) => k,
        };
        Complex64::from_polar(1.0, k as f64 * theta)
    }

    pub fn id(&self) -> String {
        self.kind.to_string()
    }
}

impl fmt::Display for CharacterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fundamental => write!(f, "fundamental"),
            Self::Conjugate => write!(f, "conjugate"),
            Self::U1Power(k) => write!(f, "u1_power({k})"),
        }
    }
}

impl FromStr for CharacterKind {
    type Err = Error;

    /// Accepts `fundamental`, `conjugate` and `u1_power(k)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "fundamental" => return Ok(Self::Fundamental),
            "conjugate" => return Ok(Self::Conjugate),
            _ => {}
        }
        s.strip_prefix("u1_power(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|k| k.trim().parse().ok())
            .map(Self::U1Power)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown character '{s}'")))
    }
}

/// A connection that can be evaluated at arbitrary points.
pub trait ConnectionEval: Sync {
    fn group(&self) -> GroupSpec;

    /// `Σ_j A_j(x) v_j` as a skew-Hermitian matrix.
    fn contract(&self, x: [f64; 3], v: [f64; 3]) -> CMatrix;
}

/// Direct truncated Fourier summation of a band-limited connection.
pub struct FourierEval {
    group: GroupSpec,
    cutoff: usize,
    basis: Arc<AlgebraBasis>,
    /// Half-space modes with their coefficients `[a][j]`; the conjugate
    /// partner is folded in through `2 Re`.
    terms: Vec<(Mode, f64, Vec<Complex64>)>,
}

impl FourierEval {
    pub fn new(a: &SpectralConnection) -> Self {
        let group = a.group();
        let d = group.algebra_dim();
        let cutoff = a.cutoff();
        let terms = modes::modes(cutoff)
            .filter(|&(_, n)| n == [0, 0, 0] || modes::in_half_space(n))
            .map(|(i, n)| {
                let weight = if n == [0, 0, 0] { 1.0 } else { 2.0 };
                let c = (0..d * 3).map(|c| a.component(c)[i]).collect();
                (n, weight, c)
            })
            .filter(|(_, _, c): &(Mode, f64, Vec<Complex64>)| c.iter().any(|z| *z != Complex64::new(0.0, 0.0)))
            .collect();
        Self {
            group,
            cutoff,
            basis: basis_for(group),
            terms,
        }
    }

    /// Evaluator for grid samples, exact when the data is resolved by the grid.
    pub fn from_grid(a: &GridConnection) -> Result<Self> {
        Ok(Self::new(&a.to_spectral(resolved_cutoff(a.resolution()))?))
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Basis coordinates of `Σ_j A_j(x) v_j`.
    pub fn contract_coords(&self, x: [f64; 3], v: [f64; 3]) -> Vec<f64> {
        let n = self.cutoff as i64;
        let tables: [Vec<Complex64>; 3] = std::array::from_fn(|k| {
            (-n..=n)
                .map(|m| Complex64::from_polar(1.0, TWO_PI * m as f64 * x[k]))
                .collect()
        });
        let d = self.group.algebra_dim();
        let mut out = vec![0.0; d];
        for (mode, weight, c) in &self.terms {
            let e = tables[0][(mode[0] + n) as usize]
                * tables[1][(mode[1] + n) as usize]
                * tables[2][(mode[2] + n) as usize];
            for (a, o) in out.iter_mut().enumerate() {
                let z = c[a * 3] * v[0] + c[a * 3 + 1] * v[1] + c[a * 3 + 2] * v[2];
                *o += weight * (z * e).re;
            }
        }
        out
    }
}

impl ConnectionEval for FourierEval {
    fn group(&self) -> GroupSpec {
        self.group
    }

    fn contract(&self, x: [f64; 3], v: [f64; 3]) -> CMatrix {
        self.basis.element(&self.contract_coords(x, v)).into_matrix()
    }
}

/// `A^σ = σ⁻¹Aσ + σ⁻¹dσ` evaluated pointwise from an evaluator for `A`.
pub struct GaugedEval<'a, E: ConnectionEval> {
    pub inner: &'a E,
    pub sigma: &'a GaugeTransform,
}

impl<E: ConnectionEval> ConnectionEval for GaugedEval<'_, E> {
    fn group(&self) -> GroupSpec {
        self.inner.group()
    }

    fn contract(&self, x: [f64; 3], v: [f64; 3]) -> CMatrix {
        let (s, ds) = self.sigma.evaluate(self.group(), x);
        let s = s.matrix();
        let mut out = s.adjoint() * self.inner.contract(x, v) * s;
        for (dj, vj) in ds.iter().zip(v) {
            out += dj.matrix() * Complex64::new(vj, 0.0);
        }
        out
    }
}

fn commutator(x: &CMatrix, y: &CMatrix) -> CMatrix {
    x * y - y * x
}

/// Substeps per segment: proportional to arc length, at least eight.
pub fn segment_steps(l: &Loop, steps: usize) -> Vec<usize> {
    let total = l.length();
    l.segments()
        .map(|(p, q)| ((steps as f64 * dist(p, q) / total).ceil() as usize).max(MIN_SEGMENT_STEPS))
        .collect()
}

/// Holonomy `h(1)` of `h′ = h·A(ℓ)·ℓ′` with about `steps` substeps in total.
pub fn holonomy<E: ConnectionEval + ?Sized>(a: &E, l: &Loop, steps: usize) -> Result<GroupElement> {
    if steps == 0 {
        return Err(Error::InvalidArgument("holonomy needs at least one step".into()));
    }
    let group = a.group();
    let mut h = GroupElement::identity(group.n);
    for ((p, q), k) in l.segments().zip(segment_steps(l, steps)) {
        let v: [f64; 3] = std::array::from_fn(|i| q[i] - p[i]);
        let at = |s: f64| a.contract(std::array::from_fn(|i| p[i] + s * v[i]), v);
        let dt = 1.0 / k as f64;
        let mut a1 = at(0.0);
        for step in 0..k {
            let t0 = step as f64 * dt;
            let a2 = at(t0 + 0.5 * dt);
            let a3 = at(if step + 1 == k { 1.0 } else { t0 + dt });
            let k1 = &a1 * Complex64::new(dt, 0.0);
            let o2 = &k1 * Complex64::new(0.5, 0.0);
            let k2 = (&a2 + commutator(&o2, &a2) * Complex64::new(0.5, 0.0)) * Complex64::new(dt, 0.0);
            let o3 = &k2 * Complex64::new(2.0, 0.0) - &k1;
            let k3 = (&a3 + commutator(&o3, &a3) * Complex64::new(0.5, 0.0)) * Complex64::new(dt, 0.0);
            let omega = (&k1 + &k3) * Complex64::new(1.0 / 6.0, 0.0) + &k2 * Complex64::new(2.0 / 3.0, 0.0);
            h = h.mul(&GroupElement::from_matrix_unchecked(expm(&omega))).repair_drift(&group);
            a1 = a3;
        }
    }
    Ok(h)
}

/// `W_{ℓ,χ}(A) = χ(h(1))`.
pub fn wilson_loop<E: ConnectionEval + ?Sized>(a: &E, l: &Loop, chi: &Character, steps: usize) -> Result<Complex64> {
    if chi.group != a.group() {
        return Err(Error::DimensionMismatch(format!(
            "character of {} applied to a {} connection",
            chi.group,
            a.group()
        )));
    }
    Ok(chi.evaluate(&holonomy(a, l, steps)?))
}

/// `c_n(ℓ) = ∫₀¹ e_n(ℓ(s)) ℓ′(s) ds` for `|n|_∞ ≤ cutoff`, exact per segment.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopFourierCoefficients {
    pub cutoff: usize,
    pub coeffs: Vec<[Complex64; 3]>,
}

impl LoopFourierCoefficients {
    pub fn get(&self, n: Mode) -> [Complex64; 3] {
        self.coeffs[modes::mode_index(self.cutoff, n)]
    }
}

pub fn loop_fourier_coefficients(l: &Loop, cutoff: usize) -> LoopFourierCoefficients {
    let mut coeffs = vec![[Complex64::new(0.0, 0.0); 3]; modes::mode_count(cutoff)];
    for (i, n) in modes::modes(cutoff) {
        let nf = n.map(|k| k as f64);
        for (p, q) in l.segments() {
            let v: [f64; 3] = std::array::from_fn(|k| q[k] - p[k]);
            let phase_p = TWO_PI * (0..3).map(|k| nf[k] * p[k]).sum::<f64>();
            let theta = TWO_PI * (0..3).map(|k| nf[k] * v[k]).sum::<f64>();
            // (e^{iθ} − 1)/(iθ) = e^{iθ/2} sinc(θ/2)
            let half = 0.5 * theta;
            let sinc = if half == 0.0 { 1.0 } else { half.sin() / half };
            let factor = Complex64::from_polar(sinc, phase_p + half);
            for k in 0..3 {
                coeffs[i][k] += factor * v[k];
            }
        }
    }
    LoopFourierCoefficients { cutoff, coeffs }
}

/// `Σ e^{−4π²|n|²t} Â(n)·c_n` over the modes selected by `keep`; the matrix
/// coefficient of a U(1) field is `i` times its basis coefficient.
fn u1_line_integral(
    a: &SpectralConnection,
    c: &LoopFourierCoefficients,
    t: f64,
    keep: impl Fn(Mode) -> bool,
) -> Result<Complex64> {
    if !a.group().is_u1() {
        return Err(Error::NotAbelian(a.group()));
    }
    if c.cutoff < a.cutoff() {
        return Err(Error::InvalidArgument(format!(
            "loop coefficients to cutoff {} cannot pair with a cutoff-{} field",
            c.cutoff,
            a.cutoff()
        )));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for (i, n) in modes::modes(a.cutoff()) {
        if !keep(n) {
            continue;
        }
        let damp = (-2.0 * TWO_PI * std::f64::consts::PI * modes::norm_sq(n) * t).exp();
        let cn = c.get(n);
        let z: Complex64 = (0..3).map(|j| a.component(j)[i] * cn[j]).sum();
        sum += z * damp;
    }
    // the paired terms are conjugate, so the sum is real up to rounding
    Ok(Complex64::new(0.0, sum.re))
}

/// Exact regularized U(1) Wilson loop `χ(exp(Σ_n e^{−4π²|n|²t} Â(n)·c_n(ℓ)))`.
pub fn u1_wilson_exact(a: &SpectralConnection, l: &Loop, chi: &Character, t: f64) -> Result<Complex64> {
    let c = loop_fourier_coefficients(l, a.cutoff());
    u1_wilson_exact_with(a, &c, chi, t)
}

/// As [`u1_wilson_exact`] with precomputed loop coefficients.
pub fn u1_wilson_exact_with(
    a: &SpectralConnection,
    c: &LoopFourierCoefficients,
    chi: &Character,
    t: f64,
) -> Result<Complex64> {
    if !chi.group.is_u1() {
        return Err(Error::NotAbelian(chi.group));
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be nonnegative, got {t}")));
    }
    let h = u1_line_integral(a, c, t, |_| true)?;
    Ok(chi.evaluate_phase(h.im))
}

/// Truncated series `H = Σ_{0<|n|_∞≤M} e^{−4π²|n|²t} Z_n·c_n(ℓ)`, purely imaginary.
pub fn h_series(z: &SpectralConnection, l: &Loop, t: f64, cutoff: usize) -> Result<Complex64> {
    h_series_with(z, &loop_fourier_coefficients(l, z.cutoff()), t, cutoff)
}

/// As [`h_series`] with precomputed loop coefficients.
pub fn h_series_with(z: &SpectralConnection, c: &LoopFourierCoefficients, t: f64, cutoff: usize) -> Result<Complex64> {
    if cutoff > z.cutoff() {
        return Err(Error::InvalidArgument(format!(
            "series cutoff {cutoff} exceeds the draw's cutoff {}",
            z.cutoff()
        )));
    }
    u1_line_integral(z, c, t, |n| n != [0, 0, 0] && modes::norm_inf(n) <= cutoff)
}

/// `Σ_{lo<|n|_∞≤hi} e^{−4π²|n|²t} E|Z_n| |c_n(ℓ)|` for the Coulomb law with coupling `g`.
pub fn h_series_tail_bound(l: &Loop, g: f64, t: f64, lo: usize, hi: usize) -> f64 {
    let c = loop_fourier_coefficients(l, hi);
    modes::modes(hi)
        .filter(|&(_, n)| modes::norm_inf(n) > lo)
        .map(|(i, n)| {
            let norm = c.coeffs[i].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            (-2.0 * TWO_PI * std::f64::consts::PI * modes::norm_sq(n) * t).exp() * coulomb_mean_abs(g, n) * norm
        })
        .sum()
}
