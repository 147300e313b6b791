//! Compact matrix groups U(1), SU(N), U(N) and their Lie algebras.
//!
//! Algebra elements are skew-Hermitian `N×N` matrices with the Frobenius
//! inner product `<X, Y> = Re Tr(X* Y)`. The standard basis is ordered as
//! follows (all elements have unit Frobenius norm):
//!
//! 1. for each pair `j < k` in lexicographic order, first the imaginary
//!    symmetric element `i(E_jk + E_kj)/√2`, then the real antisymmetric
//!    element `(E_jk - E_kj)/√2`;
//! 2. the diagonal elements `i·diag(1, …, 1, -l, 0, …, 0)/√(l(l+1))` for
//!    `l = 1 … N-1`;
//! 3. for U(N) only, the central element `i·id/√N` last.
//!
//! For SU(2) this is `iσ₁/√2, iσ₂/√2, iσ₃/√2`; for U(1) it is the single
//! element `[i]`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Unitarity defect above which composed group elements are re-unitarized.
pub const DRIFT_REPAIR_THRESHOLD: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    U1,
    SU,
    U,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupSpec {
    pub kind: GroupKind,
    /// Matrix dimension.
    pub n: usize,
}

impl GroupSpec {
    pub fn new(kind: GroupKind, n: usize) -> Result<Self> {
        match kind {
            GroupKind::U1 if n != 1 => Err(Error::InvalidArgument(format!(
                "U(1) has matrix dimension 1, got {n}"
            ))),
            GroupKind::SU if n < 2 => Err(Error::InvalidArgument(format!(
                "SU(N) requires N >= 2, got {n}"
            ))),
            GroupKind::U if n < 1 => Err(Error::InvalidArgument("U(0) is empty".into())),
            _ => Ok(Self { kind, n }),
        }
    }

    pub fn u1() -> Self {
        Self {
            kind: GroupKind::U1,
            n: 1,
        }
    }

    pub fn su(n: usize) -> Self {
        Self::new(GroupKind::SU, n).expect("SU(N) requires N >= 2")
    }

    pub fn u(n: usize) -> Self {
        Self::new(GroupKind::U, n).expect("U(N) requires N >= 1")
    }

    pub fn matrix_dim(&self) -> usize {
        self.n
    }

    pub fn algebra_dim(&self) -> usize {
        match self.kind {
            GroupKind::U1 => 1,
            GroupKind::SU => self.n * self.n - 1,
            GroupKind::U => self.n * self.n,
        }
    }

    pub fn is_abelian(&self) -> bool {
        self.n == 1
    }

    pub fn is_u1(&self) -> bool {
        self.kind == GroupKind::U1 || (self.kind == GroupKind::U && self.n == 1)
    }

    /// Numeric tag used by the field checkpoint header.
    pub fn kind_tag(&self) -> u8 {
        match self.kind {
            GroupKind::U1 => 0,
            GroupKind::SU => 1,
            GroupKind::U => 2,
        }
    }

    pub fn from_tag(tag: u8, n: usize) -> Result<Self> {
        let kind = match tag {
            0 => GroupKind::U1,
            1 => GroupKind::SU,
            2 => GroupKind::U,
            _ => return Err(Error::Format(format!("unknown group kind tag {tag}"))),
        };
        Self::new(kind, n)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GroupKind::U1 => write!(f, "U(1)"),
            GroupKind::SU => write!(f, "SU({})", self.n),
            GroupKind::U => write!(f, "U({})", self.n),
        }
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    /// Accepts `u1`, `U(1)`, `su2`, `SU(3)`, `u2`, `U(4)`, …
    fn from_str(s: &str) -> Result<Self> {
        let cleaned: String = s
            .chars()
            .filter(|c| !matches!(c, '(' | ')' | ' '))
            .collect::<String>()
            .to_ascii_lowercase();
        let bad = || Error::InvalidArgument(format!("unrecognized group '{s}'"));
        if let Some(rest) = cleaned.strip_prefix("su") {
            let n: usize = rest.parse().map_err(|_| bad())?;
            Self::new(GroupKind::SU, n)
        } else if let Some(rest) = cleaned.strip_prefix('u') {
            let n: usize = rest.parse().map_err(|_| bad())?;
            if n == 1 {
                Ok(Self::u1())
            } else {
                Self::new(GroupKind::U, n)
            }
        } else {
            Err(bad())
        }
    }
}

/// Skew-Hermitian matrix in the Lie algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement(CMatrix);

/// Unitary matrix in the group.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement(CMatrix);

impl AlgebraElement {
    /// Wraps a matrix without checking the skew-Hermitian invariant.
    pub fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn zero(n: usize) -> Self {
        Self(CMatrix::zeros(n, n))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }

    pub fn norm(&self) -> f64 {
        frobenius_norm(&self.0)
    }

    /// Largest entrywise deviation from skew-Hermiticity.
    pub fn skew_defect(&self) -> f64 {
        let m = &self.0;
        let mut worst: f64 = 0.0;
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                worst = worst.max((m[(r, c)] + m[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }
}

impl GroupElement {
    pub fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn identity(n: usize) -> Self {
        Self(CMatrix::identity(n, n))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0)
    }

    /// Inverse of a unitary matrix (its adjoint).
    pub fn inverse(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn determinant(&self) -> Complex64 {
        self.0.clone().determinant()
    }

    /// Frobenius norm of `M*M - id`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        frobenius_norm(&(self.0.adjoint() * &self.0 - CMatrix::identity(n, n)))
    }

    /// Conjugation `g⁻¹ X g` of an algebra element.
    pub fn conjugate_algebra(&self, x: &AlgebraElement) -> AlgebraElement {
        AlgebraElement(self.0.adjoint() * &x.0 * &self.0)
    }

    /// Nearest unitary matrix (polar factor); for `special` the
    /// determinant is also restored to 1.
    pub fn reunitarize(&self, special: bool) -> Self {
        let n = self.dim();
        let svd = self.0.clone().svd(true, true);
        let (u, v_t) = match (svd.u, svd.v_t) {
            (Some(u), Some(v_t)) => (u, v_t),
            _ => return self.clone(),
        };
        let mut w = u * v_t;
        if special {
            let det = w.clone().determinant();
            let root = det.powf(1.0 / n as f64);
            if root.norm() > 0.0 {
                w /= root;
            }
        }
        Self(w)
    }

    /// Re-unitarizes only when the drift exceeds [`DRIFT_REPAIR_THRESHOLD`].
    pub fn repair_drift(self, group: &GroupSpec) -> Self {
        if self.unitarity_defect() > DRIFT_REPAIR_THRESHOLD {
            self.reunitarize(group.kind == GroupKind::SU)
        } else {
            self
        }
    }
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormal basis of the Lie algebra together with its real structure
/// constants `[Xᵃ, Xᵇ] = Σ_c f_abc Xᶜ`.
#[derive(Clone, Debug)]
pub struct AlgebraBasis {
    group: GroupSpec,
    elements: Vec<AlgebraElement>,
    structure: StructureConstants,
}

/// Sparse real structure constants of an orthonormal basis.
#[derive(Clone, Debug, Default)]
pub struct StructureConstants {
    dim: usize,
    entries: Vec<(usize, usize, usize, f64)>,
}

impl StructureConstants {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(usize, usize, usize, f64)] {
        &self.entries
    }

    /// `out += s · [x, y]` in basis coordinates.
    #[inline]
    pub fn bracket_acc(&self, x: &[f64], y: &[f64], s: f64, out: &mut [f64]) {
        for &(a, b, c, f) in &self.entries {
            out[c] += s * f * x[a] * y[b];
        }
    }
}

impl AlgebraBasis {
    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[AlgebraElement] {
        &self.elements
    }

    pub fn structure_constants(&self) -> &StructureConstants {
        &self.structure
    }

    /// Real coordinates `cₐ = <Xᵃ, X>`.
    pub fn coordinates(&self, x: &AlgebraElement) -> Vec<f64> {
        self.elements
            .iter()
            .map(|e| inner_unchecked(e.matrix(), x.matrix()))
            .collect()
    }

    pub fn element(&self, coords: &[f64]) -> AlgebraElement {
        let n = self.group.n;
        let mut m = CMatrix::zeros(n, n);
        for (c, e) in coords.iter().zip(&self.elements) {
            if *c != 0.0 {
                m += e.matrix() * Complex64::new(*c, 0.0);
            }
        }
        AlgebraElement(m)
    }

    /// Matrix of `X ↦ g⁻¹ X g` in basis coordinates: `R[c][b] = <Xᶜ, g⁻¹Xᵇg>`.
    pub fn adjoint_matrix(&self, g: &GroupElement) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut r = vec![vec![0.0; d]; d];
        for b in 0..d {
            let conj = g.conjugate_algebra(&self.elements[b]);
            for c in 0..d {
                r[c][b] = inner_unchecked(self.elements[c].matrix(), conj.matrix());
            }
        }
        r
    }
}

fn inner_unchecked(x: &CMatrix, y: &CMatrix) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

fn unit(n: usize, r: usize, c: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(r, c)] = Complex64::new(1.0, 0.0);
    m
}

pub fn standard_basis(spec: GroupSpec) -> AlgebraBasis {
    let n = spec.n;
    let mut elements = Vec::with_capacity(spec.algebra_dim());
    if spec.kind == GroupKind::U1 {
        elements.push(AlgebraElement(CMatrix::from_element(1, 1, I)));
    } else {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for j in 0..n {
            for k in (j + 1)..n {
                let sym = (unit(n, j, k) + unit(n, k, j)) * (I * s);
                let anti = (unit(n, j, k) - unit(n, k, j)) * Complex64::new(s, 0.0);
                elements.push(AlgebraElement(sym));
                elements.push(AlgebraElement(anti));
            }
        }
        for l in 1..n {
            let norm = ((l * (l + 1)) as f64).sqrt();
            let mut m = CMatrix::zeros(n, n);
            for r in 0..l {
                m[(r, r)] = I / norm;
            }
            m[(l, l)] = I * (-(l as f64) / norm);
            elements.push(AlgebraElement(m));
        }
        if spec.kind == GroupKind::U {
            let m = CMatrix::identity(n, n) * (I / (n as f64).sqrt());
            elements.push(AlgebraElement(m));
        }
    }
    let structure = compute_structure(&elements);
    AlgebraBasis {
        group: spec,
        elements,
        structure,
    }
}

/// Shared, lazily built standard basis for `spec`.
pub fn basis_for(spec: GroupSpec) -> Arc<AlgebraBasis> {
    static CACHE: OnceLock<Mutex<HashMap<GroupSpec, Arc<AlgebraBasis>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(spec)
        .or_insert_with(|| Arc::new(standard_basis(spec)))
        .clone()
}

fn compute_structure(elements: &[AlgebraElement]) -> StructureConstants {
    let d = elements.len();
    let mut entries = Vec::new();
    for a in 0..d {
        for b in 0..d {
            if a == b {
                continue;
            }
            let x = elements[a].matrix();
            let y = elements[b].matrix();
            let br = x * y - y * x;
            for (c, e) in elements.iter().enumerate() {
                let f = inner_unchecked(e.matrix(), &br);
                if f.abs() > 1e-14 {
                    entries.push((a, b, c, f));
                }
            }
        }
    }
    StructureConstants { dim: d, entries }
}

pub fn bracket(x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
    check_dims(x.dim(), y.dim())?;
    Ok(AlgebraElement(&x.0 * &y.0 - &y.0 * &x.0))
}

pub fn frobenius_inner(x: &AlgebraElement, y: &AlgebraElement) -> Result<f64> {
    check_dims(x.dim(), y.dim())?;
    Ok(inner_unchecked(&x.0, &y.0))
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!(
            "matrix dimensions {a} and {b}"
        )));
    }
    Ok(())
}

/// `(M - M*)/2`, with the trace removed for SU(N).
pub fn project_algebra(m: &CMatrix, spec: GroupSpec) -> AlgebraElement {
    let mut p = (m - m.adjoint()) * Complex64::new(0.5, 0.0);
    if spec.kind == GroupKind::SU {
        let n = p.nrows();
        let tr = p.trace() / n as f64;
        for k in 0..n {
            p[(k, k)] -= tr;
        }
    }
    AlgebraElement(p)
}

/// Diagonal Padé(8, 8) coefficients `c_k = (16-k)! 8! / (16! k! (8-k)!)`.
const PADE8: [f64; 9] = [
    1.0,
    0.5,
    0.116_666_666_666_666_67,
    0.016_666_666_666_666_666,
    1.602_564_102_564_102_6e-3,
    1.068_376_068_376_068_4e-4,
    4.856_254_856_254_856e-6,
    1.387_501_387_501_387_5e-7,
    1.927_085_260_418_593_8e-9,
];

/// Matrix exponential by scaling and squaring with a Padé(8, 8) approximant.
pub fn exp_map(x: &AlgebraElement) -> GroupElement {
    GroupElement(expm(&x.0))
}

pub fn expm(x: &CMatrix) -> CMatrix {
    let n = x.nrows();
    if n == 1 {
        return CMatrix::from_element(1, 1, x[(0, 0)].exp());
    }
    let norm1 = (0..n)
        .map(|c| (0..n).map(|r| x[(r, c)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm1 > 0.5 {
        (norm1 / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = x * Complex64::new(2f64.powi(-squarings), 0.0);
    let id = CMatrix::identity(n, n);
    let mut num = id.clone() * Complex64::new(PADE8[0], 0.0);
    let mut den = num.clone();
    let mut power = id;
    for (k, c) in PADE8.iter().enumerate().skip(1) {
        power = &power * &scaled;
        let term = &power * Complex64::new(*c, 0.0);
        num += &term;
        if k % 2 == 0 {
            den += &term;
        } else {
            den -= &term;
        }
    }
    let mut result = den
        .lu()
        .solve(&num)
        .expect("Padé denominator is invertible for scaled arguments");
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// `σ⁻¹ ∂σ` for `σ = exp(ξ)` and a derivative `∂ξ`, via the series
/// `Σ_k (-1)^k / (k+1)! ad_ξ^k (∂ξ)`.
pub fn dexp_left(xi: &CMatrix, dxi: &CMatrix) -> CMatrix {
    let mut term = dxi.clone();
    let mut sum = dxi.clone();
    let scale = frobenius_norm(dxi).max(f64::MIN_POSITIVE);
    for k in 1..200 {
        term = (xi * &term - &term * xi) * Complex64::new(-1.0 / (k as f64 + 1.0), 0.0);
        sum += &term;
        if frobenius_norm(&term) < 1e-18 * scale {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_element(basis: &AlgebraBasis, seed: u64, amp: f64) -> AlgebraElement {
        let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        let coords: Vec<f64> = (0..basis.dim())
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                amp * ((state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0)
            })
            .collect();
        basis.element(&coords)
    }

    #[test]
    fn group_dimensions() {
        assert_eq!(GroupSpec::u1().algebra_dim(), 1);
        assert_eq!(GroupSpec::su(2).algebra_dim(), 3);
        assert_eq!(GroupSpec::su(3).algebra_dim(), 8);
        assert_eq!(GroupSpec::u(2).algebra_dim(), 4);
        assert!(GroupSpec::new(GroupKind::SU, 1).is_err());
        assert!(GroupSpec::new(GroupKind::U1, 2).is_err());
    }

    #[test]
    fn parse_group_names() {
        assert_eq!("su2".parse::<GroupSpec>().unwrap(), GroupSpec::su(2));
        assert_eq!("SU(3)".parse::<GroupSpec>().unwrap(), GroupSpec::su(3));
        assert_eq!("U(1)".parse::<GroupSpec>().unwrap(), GroupSpec::u1());
        assert_eq!("u2".parse::<GroupSpec>().unwrap(), GroupSpec::u(2));
        assert!("so3".parse::<GroupSpec>().is_err());
    }

    #[test]
    fn u1_basis_is_i() {
        let b = standard_basis(GroupSpec::u1());
        assert_eq!(b.dim(), 1);
        assert_eq!(b.elements()[0].matrix()[(0, 0)], I);
        assert!((frobenius_inner(&b.elements()[0], &b.elements()[0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gram_matrices_are_identity() {
        for spec in [GroupSpec::u1(), GroupSpec::su(2), GroupSpec::su(3), GroupSpec::u(2), GroupSpec::u(3)] {
            let b = standard_basis(spec);
            assert_eq!(b.dim(), spec.algebra_dim());
            for (i, x) in b.elements().iter().enumerate() {
                assert!(x.skew_defect() < 1e-15);
                if spec.kind == GroupKind::SU {
                    assert!(x.trace().norm() < 1e-15);
                }
                for (j, y) in b.elements().iter().enumerate() {
                    let g = frobenius_inner(x, y).unwrap();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((g - want).abs() < 1e-12, "{spec} gram[{i}][{j}] = {g}");
                }
            }
        }
    }

    #[test]
    fn su2_basis_is_scaled_pauli() {
        let b = standard_basis(GroupSpec::su(2));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let e = b.elements();
        // iσ₁/√2
        assert!((e[0].matrix()[(0, 1)] - I * s).norm() < 1e-15);
        // iσ₂/√2 = [[0, 1], [-1, 0]]/√2
        assert!((e[1].matrix()[(0, 1)] - Complex64::new(s, 0.0)).norm() < 1e-15);
        assert!((e[1].matrix()[(1, 0)] + Complex64::new(s, 0.0)).norm() < 1e-15);
        // iσ₃/√2
        assert!((e[2].matrix()[(0, 0)] - I * s).norm() < 1e-15);
        assert!((e[2].matrix()[(1, 1)] + I * s).norm() < 1e-15);
    }

    #[test]
    fn u2_basis_spans_skew_hermitian() {
        // Vectorize the 4 elements as real 8-vectors and check rank 4 by
        // Gram determinant (orthonormal => determinant 1).
        let b = standard_basis(GroupSpec::u(2));
        let vecs: Vec<Vec<f64>> = b
            .elements()
            .iter()
            .map(|x| x.matrix().iter().flat_map(|z| [z.re, z.im]).collect())
            .collect();
        let gram = nalgebra::DMatrix::from_fn(4, 4, |i, j| {
            vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a * b).sum::<f64>()
        });
        assert!((gram.determinant() - 1.0).abs() < 1e-12);
        assert_eq!(gram.rank(1e-10), 4);
    }

    #[test]
    fn brackets() {
        let b = standard_basis(GroupSpec::su(2));
        let x = random_element(&b, 3, 1.0);
        assert!(bracket(&x, &x).unwrap().norm() < 1e-15);

        let u1 = standard_basis(GroupSpec::u1());
        let p = u1.element(&[0.7]);
        let q = u1.element(&[-2.3]);
        assert!(bracket(&p, &q).unwrap().norm() == 0.0);

        // [e0, e1] against an explicit 2×2 product: e0 e1 - e1 e0.
        let e = b.elements();
        let direct = e[0].matrix() * e[1].matrix() - e[1].matrix() * e[0].matrix();
        let br = bracket(&e[0], &e[1]).unwrap();
        assert!(frobenius_norm(&(br.matrix() - &direct)) < 1e-15);
        // the result is proportional to e2 with constant -√2
        let expected = e[2].scale(-std::f64::consts::SQRT_2);
        assert!(br.sub(&expected).norm() < 1e-14);
        assert!(br.skew_defect() < 1e-15);

        assert!(bracket(&x, &p).is_err());
    }

    #[test]
    fn exp_special_cases() {
        let b = standard_basis(GroupSpec::su(2));
        let id = exp_map(&AlgebraElement::zero(2));
        assert!(frobenius_norm(&(id.matrix() - CMatrix::identity(2, 2))) < 1e-15);

        let theta = std::f64::consts::PI / 3.0;
        let u = exp_map(&AlgebraElement::from_matrix_unchecked(CMatrix::from_element(
            1,
            1,
            I * theta,
        )));
        assert!((u.matrix()[(0, 0)] - Complex64::new(0.0, theta).exp()).norm() < 1e-15);

        // θ·diag(i, -i) = θ√2 · e2; the eigendecomposition oracle is diagonal.
        for theta in [0.1, 1.0, 2.5, 7.0] {
            let x = b.elements()[2].scale(theta * std::f64::consts::SQRT_2);
            let g = exp_map(&x);
            let want0 = Complex64::new(0.0, theta).exp();
            assert!((g.matrix()[(0, 0)] - want0).norm() < 1e-13);
            assert!((g.matrix()[(1, 1)] - want0.conj()).norm() < 1e-13);
            assert!(g.matrix()[(0, 1)].norm() < 1e-13);
        }
    }

    #[test]
    fn exp_lands_in_group() {
        for spec in [GroupSpec::su(2), GroupSpec::su(3), GroupSpec::u(2)] {
            let b = standard_basis(spec);
            for seed in 0..20 {
                let x = random_element(&b, seed, 4.0);
                let g = exp_map(&x);
                assert!(g.unitarity_defect() < 1e-10);
                if spec.kind == GroupKind::SU {
                    assert!((g.determinant() - 1.0).norm() < 1e-10);
                }
                let h = exp_map(&x.scale(-1.0));
                assert!(frobenius_norm(&(g.mul(&h).matrix() - CMatrix::identity(spec.n, spec.n))) < 1e-10);
            }
        }
    }

    #[test]
    fn exp_matches_taylor_series_on_small_input() {
        let b = standard_basis(GroupSpec::su(3));
        let x = random_element(&b, 11, 0.3);
        let mut term = CMatrix::identity(3, 3);
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * x.matrix() * Complex64::new(1.0 / k as f64, 0.0);
            sum += &term;
        }
        assert!(frobenius_norm(&(exp_map(&x).matrix() - sum)) < 1e-14);
    }

    #[test]
    fn projection() {
        let spec = GroupSpec::su(2);
        let b = standard_basis(spec);
        let x = random_element(&b, 5, 1.0);
        let p = project_algebra(x.matrix(), spec);
        assert!(p.sub(&x).norm() < 1e-15);

        let h = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.5, 0.2),
                Complex64::new(0.5, -0.2),
                Complex64::new(-3.0, 0.0),
            ],
        );
        assert!(project_algebra(&h, GroupSpec::u(2)).norm() < 1e-15);
    }

    #[test]
    fn projection_is_nearest_point() {
        // Random-search oracle: no skew-Hermitian perturbation of the
        // projection is closer to M.
        let spec = GroupSpec::u(2);
        let b = standard_basis(spec);
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.3, -1.2),
                Complex64::new(2.0, 0.7),
                Complex64::new(-0.4, 0.1),
                Complex64::new(1.1, 0.9),
            ],
        );
        let p = project_algebra(&m, spec);
        let best = frobenius_norm(&(&m - p.matrix()));
        for seed in 0..2000 {
            let delta = random_element(&b, seed + 100, 0.05);
            let candidate = p.add(&delta);
            assert!(frobenius_norm(&(&m - candidate.matrix())) >= best - 1e-15);
        }
    }

    #[test]
    fn inner_product_matches_entrywise_sum() {
        let b = standard_basis(GroupSpec::su(3));
        let x = random_element(&b, 1, 1.0);
        let y = random_element(&b, 2, 1.0);
        let oracle: f64 = x
            .matrix()
            .iter()
            .zip(y.matrix().iter())
            .map(|(a, c)| (a.conj() * c).re)
            .sum();
        assert!((frobenius_inner(&x, &y).unwrap() - oracle).abs() < 1e-15);
        assert!((frobenius_inner(&x, &y).unwrap() - frobenius_inner(&y, &x).unwrap()).abs() < 1e-15);
        assert!(frobenius_inner(&x, &x).unwrap() > 0.0);
    }

    #[test]
    fn structure_constants_reproduce_brackets() {
        for spec in [GroupSpec::su(2), GroupSpec::su(3), GroupSpec::u(2)] {
            let b = standard_basis(spec);
            let x = random_element(&b, 7, 1.0);
            let y = random_element(&b, 8, 1.0);
            let mut out = vec![0.0; b.dim()];
            b.structure_constants()
                .bracket_acc(&b.coordinates(&x), &b.coordinates(&y), 1.0, &mut out);
            let direct = bracket(&x, &y).unwrap();
            assert!(b.element(&out).sub(&direct).norm() < 1e-13);
        }
        assert!(standard_basis(GroupSpec::u1()).structure_constants().is_zero());
    }

    #[test]
    fn reunitarize_repairs_drift() {
        let spec = GroupSpec::su(2);
        let b = standard_basis(spec);
        let g = exp_map(&random_element(&b, 9, 2.0));
        let mut noisy = g.matrix().clone();
        noisy[(0, 1)] += Complex64::new(1e-6, -2e-6);
        let repaired = GroupElement::from_matrix_unchecked(noisy).repair_drift(&spec);
        assert!(repaired.unitarity_defect() < 1e-13);
        assert!((repaired.determinant() - 1.0).norm() < 1e-13);
        assert!(frobenius_norm(&(repaired.matrix() - g.matrix())) < 1e-5);
    }

    #[test]
    fn dexp_matches_finite_difference() {
        let b = standard_basis(GroupSpec::su(2));
        let xi = random_element(&b, 21, 1.5);
        let dxi = random_element(&b, 22, 1.0);
        let h = 1e-5;
        let plus = expm(&(xi.matrix() + dxi.matrix() * Complex64::new(h, 0.0)));
        let minus = expm(&(xi.matrix() - dxi.matrix() * Complex64::new(h, 0.0)));
        let fd = (plus - minus) * Complex64::new(0.5 / h, 0.0);
        let want = expm(xi.matrix()).adjoint() * fd;
        let got = dexp_left(xi.matrix(), dxi.matrix());
        assert!(frobenius_norm(&(got - want)) < 1e-8);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn coords(d: usize, amp: f64) -> impl Strategy<Value = Vec<f64>> {
            proptest::collection::vec(-amp..amp, d)
        }

        proptest! {
            #[test]
            fn antisymmetry(x in coords(8, 2.0), y in coords(8, 2.0)) {
                let b = standard_basis(GroupSpec::su(3));
                let (x, y) = (b.element(&x), b.element(&y));
                let s = bracket(&x, &y).unwrap().add(&bracket(&y, &x).unwrap());
                prop_assert!(s.norm() < 1e-13);
            }

            #[test]
            fn jacobi(x in coords(3, 2.0), y in coords(3, 2.0), z in coords(3, 2.0)) {
                let b = standard_basis(GroupSpec::su(2));
                let (x, y, z) = (b.element(&x), b.element(&y), b.element(&z));
                let t1 = bracket(&x, &bracket(&y, &z).unwrap()).unwrap();
                let t2 = bracket(&y, &bracket(&z, &x).unwrap()).unwrap();
                let t3 = bracket(&z, &bracket(&x, &y).unwrap()).unwrap();
                prop_assert!(t1.add(&t2).add(&t3).norm() < 1e-12);
            }

            #[test]
            fn exp_inverse(x in coords(4, 10.0 / 2.0)) {
                let b = standard_basis(GroupSpec::u(2));
                let x = b.element(&x);
                prop_assume!(x.norm() <= 10.0);
                let g = exp_map(&x).mul(&exp_map(&x.scale(-1.0)));
                prop_assert!(frobenius_norm(&(g.matrix() - CMatrix::identity(2, 2))) < 1e-10);
            }
        }
    }
}
