//! Differential operators, brackets, curvature and the Yang-Mills action.
//!
//! Conventions: `(dA)_ij = ∂_iA_j − ∂_jA_i`, `d*A = −Σ ∂_iA_i`,
//! `(d*F)_i = Σ_j ∂_jF_ij`, `[A∧B]_ij = [A_i,B_j] − [A_j,B_i]`,
//! `[A⌟F]_i = Σ_j [A_j, F_ij]`, and `S_YM = Σ_{i,j} ∫ ‖F_ij‖²`.

use num_complex::Complex64;

use super::grid::{resolved_cutoff, Grid0Form, Grid2Form, GridConnection};
use super::jet::Jet;
use super::modes;
use super::spectral::{pair_slot, Spectral0Form, Spectral2Form, SpectralConnection, PAIRS};
use crate::algebra::{basis_for, GroupSpec, StructureConstants};
use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

fn i2pi(k: i64) -> Complex64 {
    Complex64::new(0.0, TWO_PI * k as f64)
}

fn require_u1(group: GroupSpec) -> Result<()> {
    if !group.is_u1() {
        return Err(Error::NotAbelian(group));
    }
    Ok(())
}

/// `(dA)_ij(n) = i2π(n_i Â_j(n) − n_j Â_i(n))`.
pub fn exterior_d(a: &SpectralConnection) -> Spectral2Form {
    let group = a.group();
    let cutoff = a.cutoff();
    let count = modes::mode_count(cutoff);
    let mut out = Spectral2Form::zeros(group, cutoff);
    for ai in 0..group.algebra_dim() {
        for (i, n) in modes::modes(cutoff) {
            let v = a.vector(ai, i);
            for (p, (r, s)) in PAIRS.iter().enumerate() {
                out.coeffs_mut()[(ai * 3 + p) * count + i] = i2pi(n[*r]) * v[*s] - i2pi(n[*s]) * v[*r];
            }
        }
    }
    out
}

/// `(df)_i(n) = i2π n_i f̂(n)`.
pub fn exterior_d0(f: &Spectral0Form) -> SpectralConnection {
    let mut out = SpectralConnection::zeros(f.group(), f.cutoff());
    for ai in 0..f.group().algebra_dim() {
        let comp = f.component(ai);
        for (i, n) in modes::modes(f.cutoff()) {
            out.set_vector(ai, i, std::array::from_fn(|j| i2pi(n[j]) * comp[i]));
        }
    }
    out
}

/// `d*A(n) = −i2π n·Â(n)`.
pub fn d_star_1form(a: &SpectralConnection) -> Spectral0Form {
    let mut out = Spectral0Form::zeros(a.group(), a.cutoff());
    for ai in 0..a.group().algebra_dim() {
        for (i, n) in modes::modes(a.cutoff()) {
            let v = a.vector(ai, i);
            let dot: Complex64 = (0..3).map(|j| v[j] * n[j] as f64).sum();
            out.component_mut(ai)[i] = -dot * Complex64::new(0.0, TWO_PI);
        }
    }
    out
}

/// `(d*F)_i(n) = Σ_j i2π n_j F̂_ij(n)`.
pub fn d_star_2form(f: &Spectral2Form) -> SpectralConnection {
    let mut out = SpectralConnection::zeros(f.group(), f.cutoff());
    let count = modes::mode_count(f.cutoff());
    for ai in 0..f.group().algebra_dim() {
        for (k, n) in modes::modes(f.cutoff()) {
            let mut v = [Complex64::default(); 3];
            for (i, vi) in v.iter_mut().enumerate() {
                for j in 0..3 {
                    if let Some((p, sign)) = pair_slot(i, j) {
                        *vi += i2pi(n[j]) * f.coeffs()[(ai * 3 + p) * count + k] * sign;
                    }
                }
            }
            out.set_vector(ai, k, v);
        }
    }
    out
}

/// Componentwise Laplacian `−4π²|n|² Â(n)`.
pub fn laplacian(a: &SpectralConnection) -> SpectralConnection {
    let mut out = a.clone();
    let count = modes::mode_count(a.cutoff());
    let k = -TWO_PI * TWO_PI;
    for comp in out.coeffs_mut().chunks_mut(count) {
        for (i, n) in modes::modes(a.cutoff()) {
            comp[i] *= k * modes::norm_sq(n);
        }
    }
    out
}

/// Removes the zero mode and the longitudinal part `(Â·n)n/|n|²`.
pub fn coulomb_project_u1(a: &SpectralConnection) -> Result<SpectralConnection> {
    require_u1(a.group())?;
    let mut out = a.clone();
    for (i, n) in modes::modes(a.cutoff()) {
        let v = a.vector(0, i);
        let nn = modes::norm_sq(n);
        if nn == 0.0 {
            out.set_vector(0, i, [Complex64::default(); 3]);
            continue;
        }
        let dot: Complex64 = (0..3).map(|j| v[j] * n[j] as f64).sum();
        out.set_vector(0, i, std::array::from_fn(|j| v[j] - dot * (n[j] as f64 / nn)));
    }
    Ok(out)
}

/// `S_YM = 8π² Σ_n (|n|²|Â(n)|² − |n·Â(n)|²)` for U(1).
pub fn ym_action_u1_spectral(a: &SpectralConnection) -> Result<f64> {
    require_u1(a.group())?;
    let mut acc = 0.0;
    for (i, n) in modes::modes(a.cutoff()) {
        let v = a.vector(0, i);
        let sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let dot: Complex64 = (0..3).map(|j| v[j] * n[j] as f64).sum();
        acc += modes::norm_sq(n) * sq - dot.norm_sqr();
    }
    Ok(2.0 * TWO_PI * TWO_PI * acc)
}

/// `out^c += s Σ f_abc x^a y^b` pointwise, with `x`, `y` given per basis index.
pub(crate) fn bracket_acc(sc: &StructureConstants, x: &[&[f64]], y: &[&[f64]], s: f64, out: &mut [Vec<f64>]) {
    for &(a, b, c, f) in sc.entries() {
        let (xa, yb) = (x[a], y[b]);
        let w = s * f;
        for ((o, xv), yv) in out[c].iter_mut().zip(xa).zip(yb) {
            *o += w * xv * yv;
        }
    }
}

fn check_grids(group: GroupSpec, m: usize, other_group: GroupSpec, other_m: usize) -> Result<()> {
    if group != other_group || m != other_m {
        return Err(Error::DimensionMismatch(format!(
            "{group} at resolution {m} vs {other_group} at resolution {other_m}"
        )));
    }
    Ok(())
}

fn connection_slices(a: &GridConnection, i: usize) -> Vec<&[f64]> {
    (0..a.group().algebra_dim()).map(|ai| a.component(ai * 3 + i)).collect()
}

fn two_form_slices(f: &Grid2Form, p: usize) -> Vec<&[f64]> {
    (0..f.group().algebra_dim()).map(|ai| f.component(ai * 3 + p)).collect()
}

/// `[A∧B]_ij = [A_i, B_j] − [A_j, B_i]` pointwise.
pub fn wedge(a: &GridConnection, b: &GridConnection) -> Result<Grid2Form> {
    check_grids(a.group(), a.resolution(), b.group(), b.resolution())?;
    let group = a.group();
    let d = group.algebra_dim();
    let basis = basis_for(group);
    let sc = basis.structure_constants();
    let points = a.points();
    let mut out = Grid2Form::zeros(group, a.resolution());
    for (p, (i, j)) in PAIRS.iter().enumerate() {
        let mut acc = vec![vec![0.0; points]; d];
        bracket_acc(sc, &connection_slices(a, *i), &connection_slices(b, *j), 1.0, &mut acc);
        bracket_acc(sc, &connection_slices(a, *j), &connection_slices(b, *i), -1.0, &mut acc);
        for (c, v) in acc.into_iter().enumerate() {
            out.component_mut(c * 3 + p).copy_from_slice(&v);
        }
    }
    Ok(out)
}

/// `[A⌟F]_i = Σ_j [A_j, F_ij]` pointwise.
pub fn interior(a: &GridConnection, f: &Grid2Form) -> Result<GridConnection> {
    check_grids(a.group(), a.resolution(), f.group(), f.resolution())?;
    let group = a.group();
    let d = group.algebra_dim();
    let basis = basis_for(group);
    let sc = basis.structure_constants();
    let points = a.points();
    let mut out = GridConnection::zeros(group, a.resolution());
    for i in 0..3 {
        let mut acc = vec![vec![0.0; points]; d];
        for j in 0..3 {
            if let Some((p, sign)) = pair_slot(i, j) {
                bracket_acc(sc, &connection_slices(a, j), &two_form_slices(f, p), sign, &mut acc);
            }
        }
        for (c, v) in acc.into_iter().enumerate() {
            out.component_mut(c * 3 + i).copy_from_slice(&v);
        }
    }
    Ok(out)
}

pub(crate) fn curvature_from_jet(jet: &Jet) -> Grid2Form {
    let d = jet.group.algebra_dim();
    let basis = basis_for(jet.group);
    let sc = basis.structure_constants();
    let points = jet.points;
    let slices = |i: usize| -> Vec<&[f64]> {
        (0..d).map(|a| &jet.a[(a * 3 + i) * points..(a * 3 + i + 1) * points]).collect()
    };
    let mut out = Grid2Form::zeros(jet.group, jet.m);
    for (p, (i, j)) in PAIRS.iter().enumerate() {
        let mut acc: Vec<Vec<f64>> = (0..d)
            .map(|a| (0..points).map(|x| jet.deriv(a, *i, *j, x) - jet.deriv(a, *j, *i, x)).collect())
            .collect();
        if !sc.is_zero() {
            bracket_acc(sc, &slices(*i), &slices(*j), 1.0, &mut acc);
        }
        for (c, v) in acc.into_iter().enumerate() {
            out.component_mut(c * 3 + p).copy_from_slice(&v);
        }
    }
    out
}

/// `F_ij = ∂_iA_j − ∂_jA_i + [A_i, A_j]` with spectral derivatives.
pub fn curvature(a: &GridConnection) -> Result<Grid2Form> {
    Ok(curvature_from_jet(&Jet::from_grid(a)?))
}

/// `Σ_{i,j} ∫ ‖F_ij‖²` by grid averaging.
pub fn action_of_curvature(f: &Grid2Form) -> f64 {
    2.0 * f.values().iter().map(|v| v * v).sum::<f64>() / f.points() as f64
}

/// Yang-Mills action; exact when `M > 4N` for a cutoff-`N` field.
pub fn ym_action(a: &GridConnection) -> Result<f64> {
    Ok(action_of_curvature(&curvature(a)?))
}

/// `d*A` of grid data, via spectral derivatives.
pub fn grid_d_star_1form(a: &GridConnection) -> Result<Grid0Form> {
    let spec = a.to_spectral(resolved_cutoff(a.resolution()))?;
    Grid0Form::from_spectral(&d_star_1form(&spec), a.resolution())
}

/// `d*F` of grid data, via spectral derivatives.
pub fn grid_d_star_2form(f: &Grid2Form) -> Result<GridConnection> {
    let spec = f.to_spectral(resolved_cutoff(f.resolution()))?;
    GridConnection::from_spectral(&d_star_2form(&spec), f.resolution())
}

/// Covariant derivative of a 0-form, `(d_A f)_i = ∂_i f + [A_i, f]`.
pub fn covariant_d0(a: &GridConnection, f: &Grid0Form) -> Result<GridConnection> {
    check_grids(a.group(), a.resolution(), f.group(), f.resolution())?;
    let m = a.resolution();
    let spec = f.to_spectral(resolved_cutoff(m))?;
    let df = GridConnection::from_spectral(&exterior_d0(&spec), m)?;
    let group = a.group();
    let d = group.algebra_dim();
    let basis = basis_for(group);
    let sc = basis.structure_constants();
    let fs: Vec<&[f64]> = (0..d).map(|c| f.component(c)).collect();
    let mut out = df;
    for i in 0..3 {
        let mut acc = vec![vec![0.0; a.points()]; d];
        bracket_acc(sc, &connection_slices(a, i), &fs, 1.0, &mut acc);
        for (c, v) in acc.into_iter().enumerate() {
            for (o, w) in out.component_mut(c * 3 + i).iter_mut().zip(v) {
                *o += w;
            }
        }
    }
    Ok(out)
}
