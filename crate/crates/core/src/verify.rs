//! Built-in property suites run end to end by `ymtorus verify`.
//!
//! Each suite returns named numerical results, kept apart from its timing so
//! runs under different thread counts can be compared value for value.

use std::time::{Duration, Instant};

use num_complex::Complex64;

use crate::algebra::{basis_for, bracket, exp_map, GroupSpec};
use crate::error::Result;
use crate::fields::{
    coulomb_project_u1, d_star_1form, dealiased_resolution, gauge_transform, to_grid, ym_action, ym_rhs,
    zdds_rhs, zdds_rhs_composed, GaugeTransform, GridConnection, Spectral0Form, SpectralConnection,
};
use crate::flow::{action_decay_profile, heat_semigroup_u1, integrate, FlowConfig, FlowKind};
use crate::gff::{sample_gff, sample_u1_coulomb, ModeRng, Normalization, SamplerConfig};
use crate::wilson::{make_loop, u1_wilson_exact, wilson_loop, Character, FourierEval, GaugedEval, Loop};

pub type RhsFn = fn(&GridConnection) -> Result<GridConnection>;

#[derive(Clone, Copy)]
pub struct VerifyOptions {
    /// Explicit ZDDS right-hand side under test.
    pub zdds_rhs: RhsFn,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { zdds_rhs }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteResult {
    pub name: &'static str,
    /// First failing assertion, if any.
    pub failure: Option<String>,
    pub values: Vec<(String, f64)>,
    pub elapsed: Duration,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }

    pub fn first_failure(&self) -> Option<(&'static str, &str)> {
        self.suites
            .iter()
            .find_map(|s| s.failure.as_deref().map(|f| (s.name, f)))
    }
}

type Outcome = std::result::Result<Vec<(String, f64)>, String>;

fn ensure(cond: bool, message: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(message())
    }
}

fn lib<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

pub const SUITES: [&str; 8] = [
    "algebra",
    "Coulomb projection",
    "U(1) oracle",
    "ZDDS consistency",
    "gradient consistency",
    "gauge invariance",
    "Wilson exactness",
    "action monotonicity",
];

pub fn run_verification(options: &VerifyOptions) -> VerifyReport {
    let bodies: [&dyn Fn() -> Outcome; 8] = [
        &algebra_suite,
        &coulomb_suite,
        &u1_oracle_suite,
        &|| zdds_suite(options.zdds_rhs),
        &gradient_suite,
        &gauge_suite,
        &wilson_suite,
        &monotonicity_suite,
    ];
    let suites = SUITES
        .iter()
        .zip(bodies)
        .map(|(&name, body)| {
            let start = Instant::now();
            let (values, failure) = match body() {
                Ok(v) => (v, None),
                Err(e) => (Vec::new(), Some(e)),
            };
            SuiteResult {
                name,
                failure,
                values,
                elapsed: start.elapsed(),
            }
        })
        .collect();
    VerifyReport { suites }
}

fn su2(cutoff: usize, seed: u64, h1: f64) -> std::result::Result<SpectralConnection, String> {
    lib(sample_gff(
        &SamplerConfig::gff(GroupSpec::su(2), cutoff, seed, 11).with_normalization(Normalization::H1Norm(h1)),
    ))
}

fn coulomb(cutoff: usize, seed: u64) -> std::result::Result<SpectralConnection, String> {
    lib(sample_u1_coulomb(&SamplerConfig::u1_coulomb(cutoff, 1.0, seed, 11)))
}

fn algebra_suite() -> Outcome {
    let mut worst_jacobi: f64 = 0.0;
    let mut worst_unitary: f64 = 0.0;
    for group in [GroupSpec::su(2), GroupSpec::su(3), GroupSpec::u(2)] {
        let basis = basis_for(group);
        for seed in 0..5 {
            let mut rng = ModeRng::new(seed, 0, 0x616c67, [0, 0, 0]);
            let mut draw = || basis.element(&(0..basis.dim()).map(|_| rng.normal()).collect::<Vec<_>>());
            let (x, y, z) = (draw(), draw(), draw());
            let b = |p: &_, q: &_| bracket(p, q).expect("same dimension");
            let anti = b(&x, &y).add(&b(&y, &x)).norm();
            ensure(anti <= 1e-12, || format!("{group}: [X,Y] + [Y,X] = {anti:e}"))?;
            let jac = b(&x, &b(&y, &z)).add(&b(&y, &b(&z, &x))).add(&b(&z, &b(&x, &y))).norm();
            worst_jacobi = worst_jacobi.max(jac);
            ensure(jac <= 1e-12, || format!("{group}: Jacobi defect {jac:e}"))?;
            let u = exp_map(&x).unitarity_defect();
            worst_unitary = worst_unitary.max(u);
            ensure(u <= 1e-12, || format!("{group}: exp unitarity defect {u:e}"))?;
        }
    }
    Ok(vec![("jacobi_defect".into(), worst_jacobi), ("exp_unitarity_defect".into(), worst_unitary)])
}

fn coulomb_suite() -> Outcome {
    let a = lib(sample_gff(&SamplerConfig::gff(GroupSpec::u1(), 4, 1, 11)))?;
    let p = lib(coulomb_project_u1(&a))?;
    let div = d_star_1form(&p).l2_norm();
    ensure(div <= 1e-12, || format!("d* of projected field {div:e}"))?;
    let idem = lib(lib(coulomb_project_u1(&p))?.sub(&p))?.max_abs();
    ensure(idem <= 1e-15, || format!("projection not idempotent: {idem:e}"))?;
    let sampled = d_star_1form(&coulomb(4, 2)?).l2_norm();
    ensure(sampled <= 1e-12, || format!("d* of Coulomb sample {sampled:e}"))?;
    Ok(vec![("projected_divergence".into(), div), ("sampled_divergence".into(), sampled)])
}

fn u1_oracle_suite() -> Outcome {
    let times = vec![0.01, 0.05];
    let mut worst: f64 = 0.0;
    for seed in 0..2 {
        let a0 = coulomb(3, seed)?;
        for kind in [FlowKind::YangMills, FlowKind::Zdds] {
            let traj = lib(integrate(&a0, &FlowConfig::new(kind, 0.05, 1e-3, times.clone())))?;
            for cp in &traj.checkpoints {
                let exact = lib(heat_semigroup_u1(&a0, cp.t))?;
                let err = lib(cp.state.sub(&exact))?.l2_norm() / exact.l2_norm();
                worst = worst.max(err);
                ensure(err <= 1e-8, || format!("{kind} seed {seed} t = {}: relative error {err:e}", cp.t))?;
            }
        }
    }
    Ok(vec![("max_relative_error".into(), worst)])
}

fn zdds_suite(explicit: RhsFn) -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let a = su2(2, seed, 2.0)?;
        let grid = lib(to_grid(&a, dealiased_resolution(2)))?;
        let e = lib(explicit(&grid))?;
        let c = lib(zdds_rhs_composed(&grid))?;
        let err = e.max_abs_diff(&c) / c.linf_norm().max(1.0);
        worst = worst.max(err);
        ensure(err <= 1e-10, || {
            format!("seed {seed}: explicit and composed right-hand sides differ by {err:e}")
        })?;
    }
    Ok(vec![("max_relative_difference".into(), worst)])
}

/// Directional derivative of `S_YM` by the five-point stencil, exact for
/// the quartic polynomial `ε ↦ S(A + εB)` up to rounding.
pub fn action_derivative(a: &GridConnection, b: &GridConnection, h: f64) -> Result<f64> {
    let s = |e: f64| -> Result<f64> { ym_action(&a.axpy(e, b)?) };
    Ok((8.0 * (s(h)? - s(-h)?) - (s(2.0 * h)? - s(-2.0 * h)?)) / (12.0 * h))
}

/// `∫ Σ ⟨X_i, Y_i⟩` on the grid.
pub fn grid_inner(x: &GridConnection, y: &GridConnection) -> f64 {
    x.values().iter().zip(y.values()).map(|(p, q)| p * q).sum::<f64>() / x.points() as f64
}

fn gradient_suite() -> Outcome {
    let mut cs = Vec::new();
    for seed in 0..6 {
        let m = dealiased_resolution(2);
        let a = lib(to_grid(&su2(2, seed, 1.5)?, m))?;
        let b = lib(to_grid(&su2(2, 100 + seed, 1.0)?, m))?;
        let d = lib(action_derivative(&a, &b, 1e-2))?;
        let p = grid_inner(&lib(ym_rhs(&a))?, &b);
        cs.push(-d / p);
    }
    let mean = cs.iter().sum::<f64>() / cs.len() as f64;
    let spread = cs.iter().map(|c| (c - mean).abs()).fold(0.0, f64::max) / mean.abs();
    ensure(spread <= 1e-4, || format!("fitted constants {cs:?} spread {spread:e}"))?;
    Ok(vec![("fitted_constant".into(), mean), ("relative_spread".into(), spread)])
}

fn loops() -> Vec<Loop> {
    vec![
        make_loop(vec![[0.0, 0.3, 0.7], [1.0, 0.3, 0.7]], [1, 0, 0]).expect("closed"),
        make_loop(
            vec![[0.1, 0.2, 0.3], [0.35, 0.2, 0.3], [0.35, 0.45, 0.3], [0.1, 0.45, 0.3], [0.1, 0.2, 0.3]],
            [0; 3],
        )
        .expect("closed"),
    ]
}

fn gauge_suite() -> Outcome {
    let group = GroupSpec::su(2);
    let a = su2(2, 7, 1.0)?;
    let mut xi = Spectral0Form::zeros(group, 1);
    xi.set_pair(0, [1, 0, 0], Complex64::new(0.2, 0.1));
    xi.set_pair(2, [0, 1, -1], Complex64::new(-0.1, 0.15));
    let sigma = GaugeTransform::Exp(xi);
    // gauged field is not band-limited; a fine grid keeps aliasing negligible
    let grid = lib(to_grid(&a, 40))?;
    let s0 = lib(ym_action(&grid))?;
    let s1 = lib(ym_action(&lib(gauge_transform(&grid, &sigma))?))?;
    let action_dev = (s0 - s1).abs() / (1.0 + s0);
    ensure(action_dev <= 1e-8, || format!("S_YM changed by {action_dev:e} under a gauge transform"))?;
    let eval = FourierEval::new(&a);
    let gauged = GaugedEval {
        inner: &eval,
        sigma: &sigma,
    };
    let chi = Character::fundamental(group);
    let mut worst: f64 = 0.0;
    for l in loops() {
        let w = lib(wilson_loop(&eval, &l, &chi, 1000))?;
        let wg = lib(wilson_loop(&gauged, &l, &chi, 1000))?;
        worst = worst.max((w - wg).norm());
    }
    ensure(worst <= 1e-7 * chi.dimension(), || format!("Wilson loop changed by {worst:e}"))?;
    Ok(vec![("action_deviation".into(), action_dev), ("wilson_deviation".into(), worst)])
}

fn wilson_suite() -> Outcome {
    let a0 = coulomb(3, 4)?;
    let t = 0.02;
    let flowed = lib(heat_semigroup_u1(&a0, t))?;
    let eval = FourierEval::new(&flowed);
    let mut worst: f64 = 0.0;
    for l in loops() {
        for chi in [Character::fundamental(GroupSpec::u1()), Character::u1_power(3)] {
            let exact = lib(u1_wilson_exact(&a0, &l, &chi, t))?;
            let ode = lib(wilson_loop(&eval, &l, &chi, 512))?;
            worst = worst.max((exact - ode).norm());
        }
    }
    ensure(worst <= 1e-8, || format!("exact and holonomy Wilson values differ by {worst:e}"))?;
    Ok(vec![("max_deviation".into(), worst)])
}

fn monotonicity_suite() -> Outcome {
    let times: Vec<f64> = (1..=5).map(|k| 0.01 * k as f64).collect();
    let mut last = 0.0;
    for seed in 0..2 {
        let a0 = su2(2, seed, 0.5)?;
        let traj = lib(integrate(&a0, &FlowConfig::new(FlowKind::YangMills, 0.05, 1e-3, times.clone())))?;
        let p = action_decay_profile(&traj, 1e-9);
        ensure(p.violations.is_empty(), || format!("seed {seed}: action increased at {:?}", p.violations))?;
        last = p.points.last().map(|x| x.1).unwrap_or(0.0);
    }
    Ok(vec![("final_action".into(), last)])
}
