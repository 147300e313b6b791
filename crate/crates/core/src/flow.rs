//! Time integration of the Yang-Mills and ZDDS heat flows, and the exact
//! U(1) heat semigroup.
//!
//! The stiff linear part is diagonal in Fourier space and is integrated
//! exactly by a third-order exponential Runge-Kutta scheme (Cox-Matthews
//! ETDRK3). For ZDDS the linear operator is `Δ`. For Yang-Mills it is
//! `−d*d`, which acts as `−4π²|n|²` on the transverse part of each mode and
//! as `0` on the longitudinal part; this is the gauge-degenerate direction
//! that makes the flow only weakly parabolic.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::grid::dealiased_resolution;
use crate::fields::modes;
use crate::fields::rhs::{nonlinear_spectral, Equation, NonlinearEval};
use crate::fields::{GaugeTransform, GridConnection, SpectralConnection};

const FOUR_PI2: f64 = 4.0 * std::f64::consts::PI * std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FlowKind {
    #[serde(rename = "ym")]
    YangMills,
    #[serde(rename = "zdds")]
    Zdds,
    #[serde(rename = "u1_exact")]
    U1Exact,
}

impl std::str::FromStr for FlowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ym" | "yang_mills" | "yang-mills" => Ok(Self::YangMills),
            "zdds" => Ok(Self::Zdds),
            "u1_exact" | "exact" | "heat" => Ok(Self::U1Exact),
            _ => Err(Error::InvalidArgument(format!("unknown flow kind '{s}'"))),
        }
    }
}

impl std::fmt::Display for FlowKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::YangMills => "ym",
            Self::Zdds => "zdds",
            Self::U1Exact => "u1_exact",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub kind: FlowKind,
    pub t_end: f64,
    pub dt_initial: f64,
    /// Factor applied to `dt` when a step is rejected.
    pub dt_safety: f64,
    pub checkpoint_times: Vec<f64>,
    /// Pointwise bound on `|A(x)|` beyond which the run is declared blown up.
    pub blowup_threshold: f64,
    /// Disable step rejection and growth (used for convergence studies).
    pub fixed_step: bool,
    /// Largest accepted relative nonlinear change per step.
    pub max_relative_change: f64,
    /// Relative tolerance of the Yang-Mills action monotonicity guard.
    pub monotone_tolerance: f64,
    /// Grid size for nonlinear terms; defaults to `4N+2`.
    pub resolution: Option<usize>,
}

impl FlowConfig {
    pub fn new(kind: FlowKind, t_end: f64, dt_initial: f64, checkpoint_times: Vec<f64>) -> Self {
        Self {
            kind,
            t_end,
            dt_initial,
            dt_safety: 0.5,
            checkpoint_times,
            blowup_threshold: 1e6,
            fixed_step: false,
            max_relative_change: 1e-3,
            monotone_tolerance: 1e-9,
            resolution: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.dt_initial > 0.0 && self.dt_initial.is_finite()) {
            return bad(format!("dt_initial must be positive, got {}", self.dt_initial));
        }
        if !(self.dt_safety > 0.0 && self.dt_safety < 1.0) {
            return bad(format!("dt_safety must lie in (0, 1), got {}", self.dt_safety));
        }
        if !(self.blowup_threshold > 0.0) {
            return bad("blowup_threshold must be positive".into());
        }
        if !(self.max_relative_change > 0.0) || !(self.monotone_tolerance >= 0.0) {
            return bad("step-control tolerances must be positive".into());
        }
        for w in self.checkpoint_times.windows(2) {
            if !(w[0] < w[1]) {
                return bad("checkpoint_times must be strictly increasing".into());
            }
        }
        if let (Some(first), Some(last)) = (self.checkpoint_times.first(), self.checkpoint_times.last()) {
            if !(*first > 0.0) || *last > self.t_end {
                return bad("checkpoint_times must lie in (0, t_end]".into());
            }
        }
        Ok(())
    }

    fn equation(&self) -> Option<Equation> {
        match self.kind {
            FlowKind::YangMills => Some(Equation::YangMills),
            FlowKind::Zdds => Some(Equation::Zdds),
            FlowKind::U1Exact => None,
        }
    }
}

/// A recorded state.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub t: f64,
    pub state: SpectralConnection,
    pub action: f64,
    pub linf: f64,
}

/// Integrator state from which a run can be continued bit-for-bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResumeState {
    pub t: f64,
    pub dt: f64,
    pub clean_steps: u32,
}

#[derive(Clone, Debug)]
pub struct FlowTrajectory {
    pub initial: Checkpoint,
    pub checkpoints: Vec<Checkpoint>,
    pub attained_time: f64,
    pub blew_up: bool,
    /// Last state reached; exceeds the blow-up threshold when `blew_up`.
    pub final_state: SpectralConnection,
    pub resume: ResumeState,
    pub step_count: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
}

impl FlowTrajectory {
    pub fn state_at(&self, t: f64) -> Option<&Checkpoint> {
        self.checkpoints.iter().find(|c| c.t == t)
    }

    pub fn grid_state(&self, index: usize, resolution: usize) -> Result<GridConnection> {
        GridConnection::from_spectral(&self.checkpoints[index].state, resolution)
    }
}

/// Multiplies every coefficient by `e^{−4π²|n|²t}`.
pub fn heat_semigroup_u1(a: &SpectralConnection, t: f64) -> Result<SpectralConnection> {
    if !a.group().is_u1() {
        return Err(Error::NotAbelian(a.group()));
    }
    heat_semigroup(a, t)
}

/// Componentwise heat semigroup `e^{tΔ}` for any group.
pub fn heat_semigroup(a: &SpectralConnection, t: f64) -> Result<SpectralConnection> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be nonnegative, got {t}")));
    }
    let mut out = a.clone();
    let count = modes::mode_count(a.cutoff());
    for comp in out.coeffs_mut().chunks_mut(count) {
        for (i, n) in modes::modes(a.cutoff()) {
            comp[i] *= (-FOUR_PI2 * modes::norm_sq(n) * t).exp();
        }
    }
    Ok(out)
}

/// `φ_k(z) = Σ_m z^m/(m+k)!` for `k = 1, 2, 3`.
pub fn phi_functions(z: f64) -> [f64; 3] {
    if z.abs() < 1.0 {
        let mut out = [0.0; 3];
        for (k, o) in out.iter_mut().enumerate() {
            let mut term = 1.0;
            for m in 1..=(k + 1) {
                term /= m as f64;
            }
            let mut sum = term;
            for m in 1..40 {
                term *= z / (m + k + 1) as f64;
                sum += term;
                if term.abs() < 1e-18 * sum.abs() {
                    break;
                }
            }
            *o = sum;
        }
        out
    } else {
        let e = z.exp();
        let p1 = (e - 1.0) / z;
        let p2 = (e - 1.0 - z) / (z * z);
        let p3 = (e - 1.0 - z - 0.5 * z * z) / (z * z * z);
        [p1, p2, p3]
    }
}

/// ETDRK3 weights for one scalar eigenvalue `λ` and step `h`.
#[derive(Clone, Copy, Debug)]
struct Weights {
    half_exp: f64,
    half_phi: f64,
    exp: f64,
    phi: f64,
    wu: f64,
    wa: f64,
    wb: f64,
}

impl Weights {
    fn new(lambda: f64, h: f64) -> Self {
        let z = lambda * h;
        let [p1, p2, p3] = phi_functions(z);
        let [q1, _, _] = phi_functions(0.5 * z);
        Self {
            half_exp: (0.5 * z).exp(),
            half_phi: 0.5 * h * q1,
            exp: z.exp(),
            phi: h * p1,
            wu: h * (p1 - 3.0 * p2 + 4.0 * p3),
            wa: h * 4.0 * (p2 - 2.0 * p3),
            wb: h * (4.0 * p3 - p2),
        }
    }
}

/// Weights tabulated by `|n|²`, plus the zero-eigenvalue weights used for
/// longitudinal Yang-Mills components.
struct WeightTable {
    h: f64,
    by_norm: Vec<Weights>,
    zero: Weights,
}

impl WeightTable {
    fn new(cutoff: usize, h: f64) -> Self {
        let max = 3 * cutoff * cutoff;
        Self {
            h,
            by_norm: (0..=max).map(|k| Weights::new(-FOUR_PI2 * k as f64, h)).collect(),
            zero: Weights::new(0.0, h),
        }
    }
}

/// `out = Σ_t w_t(L)·v_t`, with `w` applied through the spectral
/// decomposition of the linear operator.
fn combine(
    eq: Equation,
    table: &WeightTable,
    terms: &[(fn(&Weights) -> f64, &SpectralConnection)],
) -> SpectralConnection {
    let first = terms[0].1;
    let cutoff = first.cutoff();
    let mut out = SpectralConnection::zeros(first.group(), cutoff);
    for a in 0..first.group().algebra_dim() {
        for (k, n) in modes::modes(cutoff) {
            let nn = n.iter().map(|c| c * c).sum::<i64>() as usize;
            let w = &table.by_norm[nn];
            let mut acc = [Complex64::default(); 3];
            for (sel, v) in terms {
                let vec = v.vector(a, k);
                match eq {
                    Equation::Zdds => {
                        let s = sel(w);
                        for j in 0..3 {
                            acc[j] += vec[j] * s;
                        }
                    }
                    Equation::YangMills => {
                        if nn == 0 {
                            let s = sel(&table.zero);
                            for j in 0..3 {
                                acc[j] += vec[j] * s;
                            }
                        } else {
                            let dot: Complex64 = (0..3).map(|j| vec[j] * n[j] as f64).sum::<Complex64>() / nn as f64;
                            let (st, sl) = (sel(w), sel(&table.zero));
                            for j in 0..3 {
                                let long = dot * n[j] as f64;
                                acc[j] += (vec[j] - long) * st + long * sl;
                            }
                        }
                    }
                }
            }
            out.set_vector(a, k, acc);
        }
    }
    out
}

fn diff_norm(a: &SpectralConnection, b: &SpectralConnection) -> f64 {
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Where an integration starts.
#[derive(Clone, Debug)]
pub struct FlowStart {
    pub state: SpectralConnection,
    pub resume: ResumeState,
}

impl FlowStart {
    pub fn initial(a0: &SpectralConnection, config: &FlowConfig) -> Self {
        Self {
            state: a0.clone(),
            resume: ResumeState {
                t: 0.0,
                dt: config.dt_initial,
                clean_steps: 0,
            },
        }
    }
}

pub fn integrate(a0: &SpectralConnection, config: &FlowConfig) -> Result<FlowTrajectory> {
    integrate_from(FlowStart::initial(a0, config), config)
}

/// Continues an integration; checkpoints at or before the start time are
/// skipped.
pub fn integrate_from(start: FlowStart, config: &FlowConfig) -> Result<FlowTrajectory> {
    config.validate()?;
    if !start.state.is_finite() {
        return Err(Error::NonFinite { t: start.resume.t });
    }
    let cutoff = start.state.cutoff();
    let m = config.resolution.unwrap_or_else(|| dealiased_resolution(cutoff));
    match config.equation() {
        None => integrate_exact(start, config, m),
        Some(eq) => integrate_etd(start, config, eq, m),
    }
}

fn diagnostics(state: &SpectralConnection, m: usize) -> Result<NonlinearEval> {
    // the equation does not matter for the action and sup norm
    nonlinear_spectral(state, Equation::Zdds, m).map(|mut e| {
        e.value = SpectralConnection::zeros(state.group(), state.cutoff());
        e
    })
}

fn integrate_exact(start: FlowStart, config: &FlowConfig, m: usize) -> Result<FlowTrajectory> {
    let a0 = &start.state;
    if !a0.group().is_u1() {
        return Err(Error::NotAbelian(a0.group()));
    }
    let t0 = start.resume.t;
    let d0 = diagnostics(a0, m)?;
    let initial = Checkpoint {
        t: t0,
        state: a0.clone(),
        action: d0.action,
        linf: d0.linf,
    };
    let mut checkpoints = Vec::new();
    let mut evaluations = 1;
    for &t in config.checkpoint_times.iter().filter(|&&t| t > t0) {
        let state = heat_semigroup_u1(a0, t - t0)?;
        let d = diagnostics(&state, m)?;
        evaluations += 1;
        checkpoints.push(Checkpoint {
            t,
            state,
            action: d.action,
            linf: d.linf,
        });
    }
    let final_state = heat_semigroup_u1(a0, config.t_end - t0)?;
    Ok(FlowTrajectory {
        initial,
        checkpoints,
        attained_time: config.t_end,
        blew_up: false,
        final_state,
        resume: ResumeState {
            t: config.t_end,
            dt: start.resume.dt,
            clean_steps: 0,
        },
        step_count: 0,
        rejected_steps: 0,
        rhs_evaluations: evaluations,
    })
}

fn integrate_etd(start: FlowStart, config: &FlowConfig, eq: Equation, m: usize) -> Result<FlowTrajectory> {
    let cutoff = start.state.cutoff();
    let mut t = start.resume.t;
    let mut dt = start.resume.dt.min(config.dt_initial);
    let mut clean = start.resume.clean_steps;
    let mut u = start.state;
    let mut nu = nonlinear_spectral(&u, eq, m)?;
    let mut evaluations = 1usize;
    let initial = Checkpoint {
        t,
        state: u.clone(),
        action: nu.action,
        linf: nu.linf,
    };
    let mut checkpoints = Vec::new();
    let mut pending: Vec<f64> = config.checkpoint_times.iter().copied().filter(|&c| c > t).collect();
    pending.reverse();
    let mut steps = 0usize;
    let mut rejected = 0usize;
    let mut table: Option<WeightTable> = None;
    let min_dt = 1e-13 * config.t_end;
    let mut blew_up = nu.linf > config.blowup_threshold;
    let mut attained = t;

    while !blew_up && t < config.t_end {
        let target = pending.last().copied().unwrap_or(config.t_end);
        let remaining = target - t;
        let landing = remaining <= dt * (1.0 + 1e-12);
        let h = if landing { remaining } else { dt };
        if table.as_ref().is_none_or(|w| w.h != h) {
            table = Some(WeightTable::new(cutoff, h));
        }
        let w = table.as_ref().expect("weights");

        let a = combine(eq, w, &[(|w| w.half_exp, &u), (|w| w.half_phi, &nu.value)]);
        let na = nonlinear_spectral(&a, eq, m)?;
        let two_na_minus_nu = na.value.axpy(-0.5, &nu.value)?.scale(2.0);
        let b = combine(eq, w, &[(|w| w.exp, &u), (|w| w.phi, &two_na_minus_nu)]);
        let nb = nonlinear_spectral(&b, eq, m)?;
        let linear = combine(eq, w, &[(|w| w.exp, &u)]);
        let next = combine(
            eq,
            w,
            &[
                (|w| w.exp, &u),
                (|w| w.wu, &nu.value),
                (|w| w.wa, &na.value),
                (|w| w.wb, &nb.value),
            ],
        );
        let n_next = nonlinear_spectral(&next, eq, m)?;
        evaluations += 3;
        if !next.is_finite() || !n_next.action.is_finite() {
            return Err(Error::NonFinite { t: t + h });
        }

        if !config.fixed_step {
            let size = u.l2_norm();
            let change = if size > 0.0 { diff_norm(&next, &linear) / size } else { 0.0 };
            let rising = eq == Equation::YangMills
                && n_next.action > nu.action + config.monotone_tolerance * (1.0 + nu.action);
            if change > config.max_relative_change || rising {
                rejected += 1;
                clean = 0;
                dt = h * config.dt_safety;
                if dt < min_dt {
                    return Err(Error::StepUnderflow { t, dt });
                }
                continue;
            }
        }

        attained = t;
        t = if landing { target } else { t + h };
        u = next;
        nu = n_next;
        steps += 1;
        if nu.linf > config.blowup_threshold {
            blew_up = true;
            break;
        }
        attained = t;
        if landing {
            if pending.last() == Some(&target) {
                pending.pop();
                checkpoints.push(Checkpoint {
                    t,
                    state: u.clone(),
                    action: nu.action,
                    linf: nu.linf,
                });
            }
        } else {
            clean += 1;
            if !config.fixed_step && clean >= 10 {
                dt = (2.0 * dt).min(config.dt_initial);
                clean = 0;
            }
        }
    }

    Ok(FlowTrajectory {
        initial,
        checkpoints,
        attained_time: attained,
        blew_up,
        final_state: u,
        resume: ResumeState {
            t,
            dt,
            clean_steps: clean,
        },
        step_count: steps,
        rejected_steps: rejected,
        rhs_evaluations: evaluations,
    })
}

/// Action at the start and at every checkpoint, with flagged increases.
#[derive(Clone, Debug, Serialize)]
pub struct DecayProfile {
    pub points: Vec<(f64, f64)>,
    /// Indices `i` with `S(t_i) > S(t_{i−1}) + tol·(1 + S(t_{i−1}))`.
    pub violations: Vec<usize>,
}

pub fn action_decay_profile(traj: &FlowTrajectory, tolerance: f64) -> DecayProfile {
    let mut points = vec![(traj.initial.t, traj.initial.action)];
    points.extend(traj.checkpoints.iter().map(|c| (c.t, c.action)));
    let violations = (1..points.len())
        .filter(|&i| points[i].1 > points[i - 1].1 + tolerance * (1.0 + points[i - 1].1))
        .collect();
    DecayProfile { points, violations }
}

/// `‖flow(A0^σ)(t) − flow(A0)(t)^σ‖₂ / ‖flow(A0)(t)‖₂` for transforms that
/// keep the cutoff. Yang-Mills accepts constant and U(1) winding
/// transforms; ZDDS only constant ones.
pub fn gauge_covariance_check(
    a0: &SpectralConnection,
    sigma: &GaugeTransform,
    t: f64,
    config: &FlowConfig,
) -> Result<f64> {
    if !sigma.preserves_cutoff() {
        return Err(Error::InvalidArgument(
            "covariance check needs a transform that keeps the field band-limited".into(),
        ));
    }
    if config.kind == FlowKind::Zdds && !sigma.is_constant() {
        return Err(Error::InvalidArgument(
            "ZDDS is gauge covariant only for constant transforms".into(),
        ));
    }
    let cfg = FlowConfig {
        t_end: t,
        checkpoint_times: vec![t],
        ..config.clone()
    };
    let plain = integrate(a0, &cfg)?;
    let moved = integrate(&sigma.apply_spectral(a0)?, &cfg)?;
    if plain.blew_up || moved.blew_up {
        return Err(Error::InvalidArgument("flow blew up before the comparison time".into()));
    }
    let a_t = sigma.apply_spectral(&plain.checkpoints[0].state)?;
    let b_t = &moved.checkpoints[0].state;
    let denom = plain.checkpoints[0].state.l2_norm();
    let num = diff_norm(&a_t, b_t);
    Ok(if denom > 0.0 { num / denom } else { num })
}
