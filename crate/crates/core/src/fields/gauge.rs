//! Gauge transformations `A ↦ A^σ = σ⁻¹Aσ + σ⁻¹dσ`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::fft;
use super::grid::{check_resolution, GridConnection};
use super::jet::derivative;
use super::modes;
use super::spectral::{Spectral0Form, SpectralConnection};
use crate::algebra::{basis_for, dexp_left, expm, project_algebra, AlgebraElement, CMatrix, GroupElement, GroupSpec};
use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Clone, Debug)]
pub enum GaugeTransform {
    /// A constant group element.
    Constant(GroupElement),
    /// `σ(x) = exp(i2πm·x)` for U(1).
    U1Winding([i64; 3]),
    /// `σ(x) = exp(ξ(x))` with a band-limited algebra-valued `ξ`.
    Exp(Spectral0Form),
}

impl GaugeTransform {
    pub fn identity(group: GroupSpec) -> Self {
        Self::Constant(GroupElement::identity(group.n))
    }

    /// Whether `A^σ` is again band-limited at the cutoff of `A`.
    pub fn preserves_cutoff(&self) -> bool {
        !matches!(self, Self::Exp(_))
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Self::Constant(_))
    }

    fn check_group(&self, group: GroupSpec) -> Result<()> {
        match self {
            Self::Constant(g) if g.dim() != group.n => Err(Error::DimensionMismatch(format!(
                "gauge element of dimension {} for {group}",
                g.dim()
            ))),
            Self::U1Winding(_) if !group.is_u1() => Err(Error::NotAbelian(group)),
            Self::Exp(xi) if xi.group() != group => Err(Error::DimensionMismatch(format!(
                "gauge logarithm in {} for {group}",
                xi.group()
            ))),
            _ => Ok(()),
        }
    }

    /// `σ(x)` and `σ⁻¹∂_jσ(x)` at an arbitrary point, by direct Fourier summation.
    pub fn evaluate(&self, group: GroupSpec, x: [f64; 3]) -> (GroupElement, [AlgebraElement; 3]) {
        let n = group.n;
        match self {
            Self::Constant(g) => (g.clone(), std::array::from_fn(|_| AlgebraElement::zero(n))),
            Self::U1Winding(m) => {
                let phase: f64 = (0..3).map(|j| m[j] as f64 * x[j]).sum::<f64>() * TWO_PI;
                let g = CMatrix::from_element(1, 1, Complex64::from_polar(1.0, phase));
                let d = std::array::from_fn(|j| {
                    AlgebraElement::from_matrix_unchecked(CMatrix::from_element(
                        1,
                        1,
                        Complex64::new(0.0, TWO_PI * m[j] as f64),
                    ))
                });
                (GroupElement::from_matrix_unchecked(g), d)
            }
            Self::Exp(xi) => {
                let basis = basis_for(group);
                let cutoff = xi.cutoff();
                let d = group.algebra_dim();
                let mut val = vec![0.0; d];
                let mut grad = vec![[0.0; 3]; d];
                for (i, nv) in modes::modes(cutoff) {
                    let phase: f64 = (0..3).map(|j| nv[j] as f64 * x[j]).sum::<f64>() * TWO_PI;
                    let e = Complex64::from_polar(1.0, phase);
                    for (a, (v, g)) in val.iter_mut().zip(grad.iter_mut()).enumerate() {
                        let c = xi.component(a)[i] * e;
                        *v += c.re;
                        for j in 0..3 {
                            // Re(i2πn_j c e)
                            g[j] -= TWO_PI * nv[j] as f64 * c.im;
                        }
                    }
                }
                let xm = basis.element(&val).into_matrix();
                let sigma = expm(&xm);
                let derivs = std::array::from_fn(|j| {
                    let dj: Vec<f64> = grad.iter().map(|g| g[j]).collect();
                    let dm = basis.element(&dj).into_matrix();
                    project_algebra(&dexp_left(&xm, &dm), group)
                });
                (GroupElement::from_matrix_unchecked(sigma), derivs)
            }
        }
    }

    /// Applies the transform to grid data pointwise.
    pub fn apply_grid(&self, a: &GridConnection) -> Result<GridConnection> {
        let group = a.group();
        self.check_group(group)?;
        let basis = basis_for(group);
        let d = group.algebra_dim();
        let points = a.points();
        let mut out = a.clone();
        match self {
            Self::Constant(g) => {
                let r = basis.adjoint_matrix(g);
                for j in 0..3 {
                    for x in 0..points {
                        let v: Vec<f64> = (0..d).map(|b| a.get(b, j, x)).collect();
                        for c in 0..d {
                            out.values_mut()[(c * 3 + j) * points + x] = (0..d).map(|b| r[c][b] * v[b]).sum();
                        }
                    }
                }
            }
            Self::U1Winding(m) => {
                for j in 0..3 {
                    for v in out.component_mut(j) {
                        *v += TWO_PI * m[j] as f64;
                    }
                }
            }
            Self::Exp(xi) => {
                let res = a.resolution();
                check_resolution(res, xi.cutoff())?;
                let mut inputs: Vec<Vec<Complex64>> = Vec::with_capacity(4 * d);
                for c in 0..d {
                    inputs.push(xi.component(c).to_vec());
                }
                for c in 0..d {
                    for k in 0..3 {
                        inputs.push(derivative(xi.cutoff(), xi.component(c), k));
                    }
                }
                let refs: Vec<&[Complex64]> = inputs.iter().map(|v| v.as_slice()).collect();
                let grids = fft::synthesize(xi.cutoff(), &refs, res);
                for x in 0..points {
                    let val: Vec<f64> = (0..d).map(|c| grids[c][x]).collect();
                    let xm = basis.element(&val).into_matrix();
                    let sigma = expm(&xm);
                    let sigma_inv = sigma.adjoint();
                    for j in 0..3 {
                        let dj: Vec<f64> = (0..d).map(|c| grids[d + c * 3 + j][x]).collect();
                        let dm = basis.element(&dj).into_matrix();
                        let aj: Vec<f64> = (0..d).map(|c| a.get(c, j, x)).collect();
                        let am = basis.element(&aj).into_matrix();
                        let total: DMatrix<Complex64> = &sigma_inv * am * &sigma + dexp_left(&xm, &dm);
                        let coords = basis.coordinates(&project_algebra(&total, group));
                        for c in 0..d {
                            out.values_mut()[(c * 3 + j) * points + x] = coords[c];
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Applies a cutoff-preserving transform to spectral data exactly.
    pub fn apply_spectral(&self, a: &SpectralConnection) -> Result<SpectralConnection> {
        let group = a.group();
        self.check_group(group)?;
        let mut out = a.clone();
        match self {
            Self::Constant(g) => {
                let basis = basis_for(group);
                let r = basis.adjoint_matrix(g);
                let d = group.algebra_dim();
                let count = modes::mode_count(a.cutoff());
                for j in 0..3 {
                    for k in 0..count {
                        for c in 0..d {
                            let v: Complex64 = (0..d).map(|b| a.coeffs()[(b * 3 + j) * count + k] * r[c][b]).sum();
                            out.coeffs_mut()[(c * 3 + j) * count + k] = v;
                        }
                    }
                }
            }
            Self::U1Winding(m) => {
                for j in 0..3 {
                    let z = a.get(0, j, [0, 0, 0]) + TWO_PI * m[j] as f64;
                    out.set(0, j, [0, 0, 0], z);
                }
            }
            Self::Exp(_) => {
                return Err(Error::InvalidArgument(
                    "a general exp(ξ) gauge transform does not preserve the cutoff".into(),
                ))
            }
        }
        Ok(out)
    }
}

/// Applies `σ` to grid data.
pub fn gauge_transform(a: &GridConnection, sigma: &GaugeTransform) -> Result<GridConnection> {
    sigma.apply_grid(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{exp_map, standard_basis};
    use crate::fields::grid::to_grid;
    use crate::fields::ops::ym_action;

    fn sample_connection(group: GroupSpec, cutoff: usize, amp: f64) -> SpectralConnection {
        let mut a = SpectralConnection::zeros(group, cutoff);
        let mut k = 0.0;
        for ai in 0..group.algebra_dim() {
            for j in 0..3 {
                for (_, n) in modes::modes(cutoff) {
                    if modes::in_half_space(n) {
                        k += 1.0;
                        let s = amp / (1.0 + modes::norm_sq(n));
                        a.set_pair(ai, j, n, Complex64::new(s * (k * 0.7f64).sin(), s * (k * 1.3f64).cos()));
                    }
                }
            }
        }
        a
    }

    #[test]
    fn identity_and_trivial_cases() {
        let group = GroupSpec::su(2);
        let a = to_grid(&sample_connection(group, 2, 0.5), 8).unwrap();
        let id = GaugeTransform::identity(group);
        assert!(id.apply_grid(&a).unwrap().max_abs_diff(&a) < 1e-15);

        let mut xi = Spectral0Form::zeros(group, 1);
        xi.set_pair(1, [0, 0, 0], Complex64::new(0.8, 0.0));
        let sigma = GaugeTransform::Exp(xi);
        let zero = GridConnection::zeros(group, 8);
        assert!(sigma.apply_grid(&zero).unwrap().linf_norm() < 1e-15);
    }

    #[test]
    fn u1_winding_shifts_by_constant() {
        let group = GroupSpec::u1();
        let a = sample_connection(group, 2, 0.5);
        let g = to_grid(&a, 6).unwrap();
        let m = [1, -2, 0];
        let t = GaugeTransform::U1Winding(m);
        let out = t.apply_grid(&g).unwrap();
        for j in 0..3 {
            for x in 0..216 {
                assert!((out.get(0, j, x) - g.get(0, j, x) - TWO_PI * m[j] as f64).abs() < 1e-12);
            }
        }
        // the pointwise derivative by direct differentiation of e^{i2πm·x}
        let (_, d) = t.evaluate(group, [0.3, 0.1, 0.7]);
        for j in 0..3 {
            assert!((d[j].matrix()[(0, 0)] - Complex64::new(0.0, TWO_PI * m[j] as f64)).norm() < 1e-15);
        }
        let s = t.apply_spectral(&a).unwrap();
        assert!((s.get(0, 1, [0, 0, 0]).re + 2.0 * TWO_PI).abs() < 1e-12);
    }

    #[test]
    fn spectral_and_grid_agree_for_constants() {
        let group = GroupSpec::su(2);
        let basis = standard_basis(group);
        let g = exp_map(&basis.element(&[0.3, -1.1, 0.6]));
        let a = sample_connection(group, 2, 0.5);
        let t = GaugeTransform::Constant(g);
        let via_grid = t.apply_grid(&to_grid(&a, 7).unwrap()).unwrap();
        let via_spec = to_grid(&t.apply_spectral(&a).unwrap(), 7).unwrap();
        assert!(via_grid.max_abs_diff(&via_spec) < 1e-13);
    }

    #[test]
    fn exp_transform_agrees_with_pointwise_evaluation() {
        let group = GroupSpec::su(2);
        let mut xi = Spectral0Form::zeros(group, 1);
        xi.set_pair(0, [1, 0, 0], Complex64::new(0.3, -0.2));
        xi.set_pair(2, [0, 1, 1], Complex64::new(0.1, 0.25));
        xi.set_pair(1, [0, 0, 0], Complex64::new(0.4, 0.0));
        let sigma = GaugeTransform::Exp(xi);
        let a = sample_connection(group, 1, 0.4);
        let res = 6;
        let out = sigma.apply_grid(&to_grid(&a, res).unwrap()).unwrap();
        let basis = standard_basis(group);
        let grid = to_grid(&a, res).unwrap();
        for x in [0, 50, 215] {
            let p = crate::fields::grid::grid_point(res, x);
            let (s, ds) = sigma.evaluate(group, p);
            for j in 0..3 {
                let aj: Vec<f64> = (0..3).map(|c| grid.get(c, j, x)).collect();
                let want = s.conjugate_algebra(&basis.element(&aj)).add(&ds[j]);
                let got: Vec<f64> = (0..3).map(|c| out.get(c, j, x)).collect();
                assert!(basis.element(&got).sub(&want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn action_is_gauge_invariant() {
        let group = GroupSpec::su(2);
        let a = sample_connection(group, 2, 0.6);
        let mut xi = Spectral0Form::zeros(group, 1);
        xi.set_pair(0, [1, 0, 0], Complex64::new(0.15, -0.1));
        xi.set_pair(1, [0, 1, 0], Complex64::new(-0.1, 0.05));
        xi.set_pair(2, [0, 0, 1], Complex64::new(0.05, 0.1));
        let sigma = GaugeTransform::Exp(xi);
        let res = 40;
        let g = to_grid(&a, res).unwrap();
        let s0 = ym_action(&g).unwrap();
        let s1 = ym_action(&sigma.apply_grid(&g).unwrap()).unwrap();
        assert!((s0 - s1).abs() <= 1e-8 * (1.0 + s0), "{s0} vs {s1}");
    }
}
