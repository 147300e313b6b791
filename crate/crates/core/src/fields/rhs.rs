//! Right-hand sides of the Yang-Mills and ZDDS heat flows.
//!
//! * Yang-Mills: `∂_tA = −(d*F_A + [A⌟F_A])`.
//! * ZDDS, explicit form:
//!   `∂_tA_i = ΔA_i + Σ_j [A_j, 2∂_jA_i − ∂_iA_j + [A_j, A_i]]`.
//! * ZDDS, operator form: `−(d*_A F_A + d_A d*A)`.
//!
//! The flow integrator uses the nonlinear remainders after removing the
//! linear operator it treats exactly: for ZDDS that is `Δ`, for Yang-Mills
//! it is `−d*d`, whose symbol is `−4π²(|n|²Â − n(n·Â))`.

use num_complex::Complex64;

use super::fft;
use super::grid::{resolved_cutoff, GridConnection};
use super::jet::Jet;
use super::modes;
use super::ops::{self, bracket_acc};
use super::spectral::SpectralConnection;
use crate::algebra::basis_for;
use crate::error::Result;

const FOUR_PI2: f64 = 4.0 * std::f64::consts::PI * std::f64::consts::PI;

/// Which heat flow a right-hand side belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Equation {
    YangMills,
    Zdds,
}

/// Nonlinear remainder together with diagnostics of the state it was
/// evaluated at.
pub struct NonlinearEval {
    pub value: SpectralConnection,
    pub action: f64,
    pub linf: f64,
}

fn slices(v: &[f64], d: usize, points: usize, comp: impl Fn(usize) -> usize) -> Vec<&[f64]> {
    (0..d).map(|a| &v[comp(a) * points..(comp(a) + 1) * points]).collect()
}

/// Pointwise nonlinear remainder, returned per component `[a*3 + i]`.
fn nonlinear_grid(jet: &Jet, eq: Equation) -> Vec<Vec<f64>> {
    let group = jet.group;
    let d = group.algebra_dim();
    let points = jet.points;
    let mut out = vec![vec![0.0; points]; d * 3];
    let basis = basis_for(group);
    let sc = basis.structure_constants();
    if sc.is_zero() {
        return out;
    }
    let a_i = |i: usize| slices(&jet.a, d, points, move |a| a * 3 + i);
    let da = |k: usize, i: usize| slices(&jet.da, d, points, move |a| (a * 3 + k) * 3 + i);
    // G_ij = [A_i, A_j]
    let mut g = vec![vec![vec![0.0; points]; d]; 9];
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                bracket_acc(sc, &a_i(i), &a_i(j), 1.0, &mut g[i * 3 + j]);
            }
        }
    }
    for i in 0..3 {
        let mut acc = vec![vec![0.0; points]; d];
        match eq {
            Equation::YangMills => {
                for j in 0..3 {
                    // −∂_j [A_i, A_j] by the product rule
                    bracket_acc(sc, &da(j, i), &a_i(j), -1.0, &mut acc);
                    bracket_acc(sc, &a_i(i), &da(j, j), -1.0, &mut acc);
                    if i != j {
                        // −[A_j, F_ij], F_ij = ∂_iA_j − ∂_jA_i + G_ij
                        let f: Vec<Vec<f64>> = (0..d)
                            .map(|a| {
                                let (p, q) = (&jet.da[((a * 3 + i) * 3 + j) * points..], &jet.da[((a * 3 + j) * 3 + i) * points..]);
                                (0..points).map(|x| p[x] - q[x] + g[i * 3 + j][a][x]).collect()
                            })
                            .collect();
                        let fr: Vec<&[f64]> = f.iter().map(|v| v.as_slice()).collect();
                        bracket_acc(sc, &a_i(j), &fr, -1.0, &mut acc);
                    }
                }
            }
            Equation::Zdds => {
                for j in 0..3 {
                    // [A_j, 2∂_jA_i − ∂_iA_j + [A_j, A_i]]
                    let t: Vec<Vec<f64>> = (0..d)
                        .map(|a| {
                            let (p, q) = (&jet.da[((a * 3 + j) * 3 + i) * points..], &jet.da[((a * 3 + i) * 3 + j) * points..]);
                            (0..points).map(|x| 2.0 * p[x] - q[x] + g[j * 3 + i][a][x]).collect()
                        })
                        .collect();
                    let tr: Vec<&[f64]> = t.iter().map(|v| v.as_slice()).collect();
                    bracket_acc(sc, &a_i(j), &tr, 1.0, &mut acc);
                }
            }
        }
        for (a, v) in acc.into_iter().enumerate() {
            out[a * 3 + i] = v;
        }
    }
    out
}

fn linf_of_jet(jet: &Jet) -> f64 {
    let comps = jet.group.algebra_dim() * 3;
    let mut worst: f64 = 0.0;
    for x in 0..jet.points {
        let s: f64 = (0..comps).map(|c| jet.a[c * jet.points + x].powi(2)).sum();
        worst = worst.max(s);
    }
    worst.sqrt()
}

/// Nonlinear remainder of `eq` at a spectral state, evaluated on an
/// `m³` grid and truncated back to the state's cutoff. Exact (no aliasing)
/// for `m ≥ 4N+2`.
pub fn nonlinear_spectral(a: &SpectralConnection, eq: Equation, m: usize) -> Result<NonlinearEval> {
    let jet = Jet::from_spectral(a, m)?;
    let action = ops::action_of_curvature(&ops::curvature_from_jet(&jet));
    let linf = linf_of_jet(&jet);
    let value = if a.group().is_abelian() {
        SpectralConnection::zeros(a.group(), a.cutoff())
    } else {
        let grids = nonlinear_grid(&jet, eq);
        let refs: Vec<&[f64]> = grids.iter().map(|v| v.as_slice()).collect();
        SpectralConnection::from_coeffs(a.group(), a.cutoff(), fft::analyze(&refs, m, a.cutoff()).concat())?
    };
    Ok(NonlinearEval { value, action, linf })
}

/// Applies the linear operator of `eq` mode by mode.
pub fn linear_spectral(a: &SpectralConnection, eq: Equation) -> SpectralConnection {
    match eq {
        Equation::Zdds => ops::laplacian(a),
        Equation::YangMills => {
            let mut out = a.clone();
            for ai in 0..a.group().algebra_dim() {
                for (k, n) in modes::modes(a.cutoff()) {
                    let v = a.vector(ai, k);
                    let dot: Complex64 = (0..3).map(|j| v[j] * n[j] as f64).sum();
                    let nn = modes::norm_sq(n);
                    out.set_vector(
                        ai,
                        k,
                        std::array::from_fn(|j| -(v[j] * nn - dot * n[j] as f64) * FOUR_PI2),
                    );
                }
            }
            out
        }
    }
}

fn grid_from_components(a: &GridConnection, comps: Vec<Vec<f64>>) -> GridConnection {
    GridConnection::from_values(a.group(), a.resolution(), comps.concat()).expect("component shape")
}

/// Yang-Mills right-hand side `−(d*F_A + [A⌟F_A])` on the grid.
pub fn ym_rhs(a: &GridConnection) -> Result<GridConnection> {
    let f = ops::curvature(a)?;
    let dsf = ops::grid_d_star_2form(&f)?;
    let inner = ops::interior(a, &f)?;
    Ok(dsf.axpy(1.0, &inner)?.scale(-1.0))
}

/// ZDDS right-hand side in the explicit componentwise form.
pub fn zdds_rhs(a: &GridConnection) -> Result<GridConnection> {
    let jet = Jet::from_grid(a)?;
    let spec = a.to_spectral(resolved_cutoff(a.resolution()))?;
    let lap = GridConnection::from_spectral(&ops::laplacian(&spec), a.resolution())?;
    let nl = grid_from_components(a, nonlinear_grid(&jet, Equation::Zdds));
    lap.axpy(1.0, &nl)
}

/// ZDDS right-hand side assembled from operators, `−(d*_A F_A + d_A d*A)`.
pub fn zdds_rhs_composed(a: &GridConnection) -> Result<GridConnection> {
    let ym = ym_rhs(a)?;
    let div = ops::grid_d_star_1form(a)?;
    let dd = ops::covariant_d0(a, &div)?;
    ym.axpy(-1.0, &dd)
}

/// Nonlinear remainder on the grid (right-hand side minus linear part),
/// without truncation.
pub fn nonlinear_rhs(a: &GridConnection, eq: Equation) -> Result<GridConnection> {
    let jet = Jet::from_grid(a)?;
    Ok(grid_from_components(a, nonlinear_grid(&jet, eq)))
}

/// Full right-hand side of `eq` on the grid.
pub fn rhs(a: &GridConnection, eq: Equation) -> Result<GridConnection> {
    match eq {
        Equation::YangMills => ym_rhs(a),
        Equation::Zdds => zdds_rhs(a),
    }
}
