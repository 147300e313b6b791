use num_complex::Complex64;
use torus_ym::algebra::{exp_map, standard_basis, GroupSpec};
use torus_ym::fields::modes;
use torus_ym::fields::rhs::{linear_spectral, nonlinear_spectral, Equation};
use torus_ym::fields::{d_star_1form, to_grid, ym_rhs, zdds_rhs, GaugeTransform, Spectral0Form, SpectralConnection};
use torus_ym::flow::{
    action_decay_profile, gauge_covariance_check, heat_semigroup_u1, integrate, integrate_from, FlowConfig, FlowKind,
    FlowStart,
};
use torus_ym::gff::{sample_gff, sample_u1_coulomb, Normalization, SamplerConfig};
use torus_ym::Error;

const PI: f64 = std::f64::consts::PI;

fn su2_field(cutoff: usize, seed: u64, h1: f64) -> SpectralConnection {
    let cfg = SamplerConfig::gff(GroupSpec::su(2), cutoff, seed, 0).with_normalization(Normalization::H1Norm(h1));
    sample_gff(&cfg).unwrap()
}

fn rel_diff(a: &SpectralConnection, b: &SpectralConnection) -> f64 {
    a.sub(b).unwrap().l2_norm() / b.l2_norm()
}

#[test]
fn zero_field_is_a_fixed_point() {
    for kind in [FlowKind::YangMills, FlowKind::Zdds] {
        let a0 = SpectralConnection::zeros(GroupSpec::su(2), 2);
        let cfg = FlowConfig::new(kind, 0.02, 1e-3, vec![0.01, 0.02]);
        let traj = integrate(&a0, &cfg).unwrap();
        assert_eq!(traj.attained_time, 0.02);
        assert!(!traj.blew_up);
        for c in &traj.checkpoints {
            assert_eq!(c.state.max_abs(), 0.0);
            assert_eq!(c.action, 0.0);
        }
        let p = action_decay_profile(&traj, 1e-9);
        assert!(p.points.iter().all(|(_, s)| *s == 0.0));
    }
}

#[test]
fn u1_coulomb_flows_match_heat_semigroup() {
    let times = vec![0.01, 0.05, 0.2];
    for seed in 0..3 {
        let a0 = sample_u1_coulomb(&SamplerConfig::u1_coulomb(4, 1.0, seed, 0)).unwrap();
        for kind in [FlowKind::YangMills, FlowKind::Zdds, FlowKind::U1Exact] {
            let cfg = FlowConfig::new(kind, 0.2, 1e-3, times.clone());
            let traj = integrate(&a0, &cfg).unwrap();
            assert_eq!(traj.checkpoints.len(), 3);
            for c in &traj.checkpoints {
                let exact = heat_semigroup_u1(&a0, c.t).unwrap();
                assert!(rel_diff(&c.state, &exact) <= 1e-8, "{kind} at t = {}", c.t);
                assert!(d_star_1form(&c.state).l2_norm() <= 1e-10);
            }
        }
    }
}

#[test]
fn u1_action_profile_matches_closed_form() {
    let a0 = sample_u1_coulomb(&SamplerConfig::u1_coulomb(3, 1.0, 8, 1)).unwrap();
    let cfg = FlowConfig::new(FlowKind::YangMills, 0.1, 1e-3, vec![0.02, 0.05, 0.1]);
    let traj = integrate(&a0, &cfg).unwrap();
    let profile = action_decay_profile(&traj, 1e-9);
    assert!(profile.violations.is_empty());
    for (t, s) in profile.points {
        // 8π² Σ e^{−8π²|n|²t}|n|²|Z_n|² over all modes
        let mut want = 0.0;
        for (k, n) in modes::modes(3) {
            let z: f64 = a0.vector(0, k).iter().map(|c| c.norm_sqr()).sum();
            let nn = modes::norm_sq(n);
            want += 8.0 * PI * PI * (-8.0 * PI * PI * nn * t).exp() * nn * z;
        }
        assert!((s - want).abs() <= 1e-8 * want, "t = {t}: {s} vs {want}");
    }
}

#[test]
fn nonlinear_remainders_match_full_right_hand_sides() {
    let a = su2_field(2, 3, 1.5);
    let m = 10;
    let grid = to_grid(&a, m).unwrap();
    for (eq, full) in [
        (Equation::YangMills, ym_rhs(&grid).unwrap()),
        (Equation::Zdds, zdds_rhs(&grid).unwrap()),
    ] {
        let n = nonlinear_spectral(&a, eq, m).unwrap().value;
        let lin = linear_spectral(&a, eq);
        let want = full.to_spectral(2).unwrap();
        let got = n.add(&lin).unwrap();
        assert!(got.sub(&want).unwrap().max_abs() < 1e-11 * want.max_abs().max(1.0), "{eq:?}");
    }
}

#[test]
fn su2_convergence_order_is_at_least_three() {
    let a0 = su2_field(2, 5, 0.1);
    let t = 0.04;
    let run = |dt: f64| {
        let mut cfg = FlowConfig::new(FlowKind::Zdds, t, dt, vec![t]);
        cfg.fixed_step = true;
        integrate(&a0.scale(10.0), &cfg).unwrap().checkpoints[0].state.clone()
    };
    let (u1, u2, u3) = (run(0.01), run(0.005), run(0.0025));
    let d1 = u1.sub(&u2).unwrap().l2_norm();
    let d2 = u2.sub(&u3).unwrap().l2_norm();
    let order = (d1 / d2).log2();
    assert!(order >= 2.7, "observed order {order} ({d1:e}, {d2:e})");
}

#[test]
fn su2_actions_decrease_along_ym_flow() {
    for seed in 0..3 {
        let a0 = su2_field(3, seed, 0.5);
        let times: Vec<f64> = (1..=10).map(|k| 0.005 * k as f64).collect();
        let cfg = FlowConfig::new(FlowKind::YangMills, 0.05, 1e-3, times);
        let traj = integrate(&a0, &cfg).unwrap();
        let p = action_decay_profile(&traj, 0.0);
        assert!(p.violations.is_empty());
        assert!(p.points.windows(2).all(|w| w[1].1 < w[0].1));
    }
}

#[test]
fn resumed_run_equals_uninterrupted_run() {
    let a0 = su2_field(2, 9, 2.0);
    let cfg = FlowConfig::new(FlowKind::YangMills, 0.03, 2e-3, vec![0.01, 0.02, 0.03]);
    let full = integrate(&a0, &cfg).unwrap();
    let first = integrate(&a0, &FlowConfig { t_end: 0.01, checkpoint_times: vec![0.01], ..cfg.clone() }).unwrap();
    let start = FlowStart {
        state: first.checkpoints[0].state.clone(),
        resume: first.resume.clone(),
    };
    let rest = integrate_from(start, &cfg).unwrap();
    assert_eq!(rest.checkpoints.len(), 2);
    assert_eq!(rest.checkpoints[1].state, full.checkpoints[2].state);
    assert_eq!(rest.checkpoints[0].state, full.checkpoints[1].state);
}

#[test]
fn gauge_covariance() {
    let cfg_ym = FlowConfig::new(FlowKind::YangMills, 0.02, 1e-3, vec![0.02]);
    let a0 = sample_u1_coulomb(&SamplerConfig::u1_coulomb(3, 1.0, 2, 0)).unwrap();
    let id = GaugeTransform::identity(GroupSpec::u1());
    assert_eq!(gauge_covariance_check(&a0, &id, 0.02, &cfg_ym).unwrap(), 0.0);
    let wind = GaugeTransform::U1Winding([1, -1, 2]);
    assert!(gauge_covariance_check(&a0, &wind, 0.02, &cfg_ym).unwrap() <= 1e-6);

    let b0 = su2_field(2, 4, 1.0);
    let basis = standard_basis(GroupSpec::su(2));
    let g = GaugeTransform::Constant(exp_map(&basis.element(&[0.4, -1.2, 2.0])));
    for kind in [FlowKind::YangMills, FlowKind::Zdds] {
        let cfg = FlowConfig { kind, ..cfg_ym.clone() };
        assert!(gauge_covariance_check(&b0, &g, 0.02, &cfg).unwrap() <= 1e-6);
    }

    let mut xi = Spectral0Form::zeros(GroupSpec::su(2), 1);
    xi.set_pair(0, [1, 0, 0], Complex64::new(0.1, 0.0));
    let general = GaugeTransform::Exp(xi);
    assert!(matches!(
        gauge_covariance_check(&b0, &general, 0.02, &cfg_ym),
        Err(Error::InvalidArgument(_))
    ));
    let cfg_z = FlowConfig { kind: FlowKind::Zdds, ..cfg_ym };
    assert!(gauge_covariance_check(&a0, &wind, 0.02, &cfg_z).is_err());
}

#[test]
fn blow_up_is_detected_and_reported() {
    let a0 = su2_field(2, 1, 5.0);
    let mut cfg = FlowConfig::new(FlowKind::Zdds, 0.01, 1e-3, vec![0.005, 0.01]);
    cfg.blowup_threshold = 0.5 * to_grid(&a0, 10).unwrap().linf_norm();
    let traj = integrate(&a0, &cfg).unwrap();
    assert!(traj.blew_up);
    assert!(traj.attained_time < cfg.t_end);
    assert!(traj.checkpoints.is_empty());
}

#[test]
fn blow_up_fraction_falls_with_amplitude() {
    // Large SU(2) data driven to a low sup-norm threshold: the fraction of
    // runs exceeding it before t = 1e-3 must fall as the amplitude shrinks.
    let t_end = 1e-3;
    let fraction = |h1: f64| {
        let mut hits = 0;
        let mut times = Vec::new();
        for seed in 0..12 {
            let a0 = su2_field(2, seed, h1);
            let mut cfg = FlowConfig::new(FlowKind::Zdds, t_end, 1e-4, vec![t_end]);
            cfg.blowup_threshold = 6.0;
            match integrate(&a0, &cfg) {
                Ok(traj) => {
                    times.push(traj.attained_time);
                    if traj.blew_up {
                        hits += 1;
                    }
                }
                Err(Error::StepUnderflow { t, .. }) | Err(Error::NonFinite { t }) => {
                    times.push(t);
                    hits += 1;
                }
                Err(e) => panic!("{e}"),
            }
        }
        (hits as f64 / 12.0, times)
    };
    let (big, times_big) = fraction(60.0);
    let (small, times_small) = fraction(5.0);
    assert!(times_big.iter().chain(&times_small).all(|&t| t >= 0.0));
    assert!(big > small, "{big} vs {small}");
}
