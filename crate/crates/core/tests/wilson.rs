use num_complex::Complex64;
use proptest::prelude::*;
use torus_ym::algebra::{exp_map, frobenius_norm, standard_basis, GroupElement, GroupSpec};
use torus_ym::fields::modes;
use torus_ym::fields::{to_grid, GaugeTransform, Spectral0Form, SpectralConnection};
use torus_ym::flow::{heat_semigroup_u1, integrate, FlowConfig, FlowKind};
use torus_ym::gff::{sample_gff, sample_u1_coulomb, ModeRng, Normalization, SamplerConfig};
use torus_ym::wilson::*;
use torus_ym::Error;

fn loops() -> Vec<Loop> {
    vec![
        make_loop(vec![[0.0, 0.3, 0.7], [1.0, 0.3, 0.7]], [1, 0, 0]).unwrap(),
        make_loop(
            vec![
                [0.1, 0.2, 0.3],
                [0.35, 0.2, 0.3],
                [0.35, 0.45, 0.3],
                [0.1, 0.45, 0.3],
                [0.1, 0.2, 0.3],
            ],
            [0; 3],
        )
        .unwrap(),
        make_loop(vec![[0.2, 0.0, 0.5], [1.2, 1.0, 0.5]], [1, 1, 0]).unwrap(),
        make_loop(vec![[0.0; 3], [0.4, 0.1, 0.2], [0.1, 0.5, 0.3], [0.0; 3]], [0; 3]).unwrap(),
        make_loop(
            vec![[0.5, 0.1, 0.9], [0.6, 0.6, 0.4], [0.3, 0.8, 0.2], [0.5, 1.1, -0.1]],
            [0, 1, -1],
        )
        .unwrap(),
    ]
}

fn u1_chars() -> Vec<Character> {
    vec![Character::fundamental(GroupSpec::u1()), Character::conjugate(GroupSpec::u1()), Character::u1_power(3)]
}

fn su2_field(cutoff: usize, seed: u64, h1: f64) -> SpectralConnection {
    let cfg = SamplerConfig::gff(GroupSpec::su(2), cutoff, seed, 0).with_normalization(Normalization::H1Norm(h1));
    sample_gff(&cfg).unwrap()
}

/// Random smooth gauge logarithm with modes `|n|_∞ ≤ 1`.
fn random_xi(group: GroupSpec, seed: u64, amp: f64) -> Spectral0Form {
    let mut xi = Spectral0Form::zeros(group, 1);
    for (_, n) in modes::modes(1) {
        if !modes::in_half_space(n) && n != [0, 0, 0] {
            continue;
        }
        let mut rng = ModeRng::new(seed, 7, 0x7869, n);
        for a in 0..group.algebra_dim() {
            let z = if n == [0, 0, 0] {
                Complex64::new(rng.normal(), 0.0)
            } else {
                rng.complex_normal()
            };
            xi.set_pair(a, n, z * amp);
        }
    }
    xi
}

#[test]
fn zero_field_gives_character_dimension() {
    for group in [GroupSpec::u1(), GroupSpec::su(2), GroupSpec::su(3), GroupSpec::u(2)] {
        let eval = FourierEval::new(&SpectralConnection::zeros(group, 2));
        for l in loops() {
            let h = holonomy(&eval, &l, 32).unwrap();
            assert_eq!(h, GroupElement::identity(group.n));
            let w = wilson_loop(&eval, &l, &Character::fundamental(group), 32).unwrap();
            assert_eq!(w, Complex64::new(group.n as f64, 0.0));
        }
    }
}

#[test]
fn constant_u1_field_on_axis_cycle() {
    let a = 0.83;
    let mut field = SpectralConnection::zeros(GroupSpec::u1(), 1);
    field.set(0, 0, [0, 0, 0], Complex64::new(a, 0.0));
    let eval = FourierEval::new(&field);
    let l = &loops()[0];
    let h = holonomy(&eval, l, 8).unwrap();
    assert!((h.matrix()[(0, 0)] - Complex64::from_polar(1.0, a)).norm() < 1e-14);
    for k in [-2i64, 1, 3] {
        let w = wilson_loop(&eval, l, &Character::u1_power(k), 8).unwrap();
        assert!((w - Complex64::from_polar(1.0, k as f64 * a)).norm() < 1e-14);
    }
}

#[test]
fn loop_coefficient_symmetries() {
    for l in loops() {
        let c = loop_fourier_coefficients(&l, 3);
        let m = l.winding();
        for k in 0..3 {
            assert!((c.get([0, 0, 0])[k] - m[k] as f64).norm() < 1e-12);
        }
        for (i, n) in modes::modes(3) {
            let partner = c.coeffs[modes::neg_index(3, i)];
            let dot: Complex64 = (0..3).map(|k| c.coeffs[i][k] * n[k] as f64).sum();
            assert!(dot.norm() < 1e-12, "n·c_n = {dot} at {n:?}");
            for k in 0..3 {
                assert!((partner[k] - c.coeffs[i][k].conj()).norm() < 1e-14);
            }
        }
    }
}

#[test]
fn loop_coefficients_match_quadrature() {
    let l = &loops()[3];
    let c = loop_fourier_coefficients(l, 2);
    for n in [[1, 0, 0], [2, -1, 1], [0, 2, -2]] {
        let mut q = [Complex64::new(0.0, 0.0); 3];
        for (p, e) in l.segments() {
            let v: [f64; 3] = std::array::from_fn(|k| e[k] - p[k]);
            // Gauss-Legendre 5 point on each segment
            let nodes = [
                (0.0, 128.0 / 225.0),
                (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
                (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
                (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
                (0.906_179_845_938_664, 0.236_926_885_056_189_1),
            ];
            for sub in 0..64 {
                for (xg, w) in nodes {
                    let s = (sub as f64 + 0.5 + 0.5 * xg) / 64.0;
                    let ph: f64 = (0..3).map(|k| n[k] as f64 * (p[k] + s * v[k])).sum::<f64>() * 2.0 * std::f64::consts::PI;
                    let e = Complex64::from_polar(0.5 * w / 64.0, ph);
                    for k in 0..3 {
                        q[k] += e * v[k];
                    }
                }
            }
        }
        for k in 0..3 {
            assert!((q[k] - c.get(n)[k]).norm() < 1e-12);
        }
    }
}

#[test]
fn u1_exact_formula_matches_ode_pipeline() {
    let times = [0.01, 0.05, 0.2];
    for seed in 0..3 {
        let a0 = sample_u1_coulomb(&SamplerConfig::u1_coulomb(4, 1.0, seed, 0)).unwrap();
        let cfg = FlowConfig::new(FlowKind::Zdds, 0.2, 1e-3, times.to_vec());
        let traj = integrate(&a0, &cfg).unwrap();
        for (cp, &t) in traj.checkpoints.iter().zip(&times) {
            let eval = FourierEval::new(&cp.state);
            for l in loops() {
                for chi in u1_chars() {
                    let exact = u1_wilson_exact(&a0, &l, &chi, t).unwrap();
                    let ode = wilson_loop(&eval, &l, &chi, 512).unwrap();
                    assert!((exact - ode).norm() <= 1e-8, "{} {} t={t}: {exact} vs {ode}", l.id, chi.id());
                }
            }
        }
    }
}

#[test]
fn u1_exact_limits() {
    let mut a = sample_u1_coulomb(&SamplerConfig::u1_coulomb(3, 1.0, 4, 0)).unwrap();
    let l = &loops()[2];
    let chi = Character::u1_power(1);
    assert_eq!(u1_wilson_exact(&SpectralConnection::zeros(GroupSpec::u1(), 3), l, &chi, 0.1).unwrap(), Complex64::new(1.0, 0.0));
    assert!((u1_wilson_exact(&a, l, &chi, 50.0).unwrap() - 1.0).norm() < 1e-14);
    a.set(0, 0, [0, 0, 0], Complex64::new(0.4, 0.0));
    a.set(0, 1, [0, 0, 0], Complex64::new(-0.1, 0.0));
    // winding (1, 1, 0): exp(i(0.4 − 0.1))
    let w = u1_wilson_exact(&a, l, &chi, 50.0).unwrap();
    assert!((w - Complex64::from_polar(1.0, 0.3)).norm() < 1e-14);
    assert!(matches!(
        u1_wilson_exact(&su2_field(1, 0, 1.0), l, &Character::fundamental(GroupSpec::su(2)), 0.1),
        Err(Error::NotAbelian(_))
    ));
}

#[test]
fn h_series_properties() {
    let l = &loops()[1];
    let z = sample_u1_coulomb(&SamplerConfig::u1_coulomb(8, 1.0, 1, 0)).unwrap();
    let h = h_series(&z, l, 0.01, 8).unwrap();
    assert_eq!(h.re, 0.0);
    assert!(h_series(&z, l, 100.0, 8).unwrap().norm() < 1e-300);

    let mut single = SpectralConnection::zeros(GroupSpec::u1(), 2);
    let zn = [Complex64::new(0.1, 0.2), Complex64::new(-0.2, 0.1), Complex64::new(0.0, 0.0)];
    for (j, v) in zn.iter().enumerate() {
        single.set_pair(0, j, [1, 1, 0], *v);
    }
    let c = loop_fourier_coefficients(l, 2);
    let t = 0.02;
    let damp = (-4.0 * std::f64::consts::PI.powi(2) * 2.0 * t).exp();
    let term: Complex64 = (0..3).map(|j| zn[j] * c.get([1, 1, 0])[j]).sum::<Complex64>() * damp;
    let want = Complex64::new(0.0, 1.0) * (term + term.conj());
    assert!((h_series(&single, l, t, 2).unwrap() - want).norm() < 1e-15);

    // mean successive-cutoff gap against the tail bound
    let (t, lo, hi) = (0.005, 3, 6);
    let mut gap = 0.0;
    let draws = 40;
    for seed in 0..draws {
        let z = sample_u1_coulomb(&SamplerConfig::u1_coulomb(hi, 1.0, seed, 0)).unwrap();
        let c = loop_fourier_coefficients(l, hi);
        gap += (h_series_with(&z, &c, t, hi).unwrap() - h_series_with(&z, &c, t, lo).unwrap()).norm();
    }
    gap /= draws as f64;
    let bound = h_series_tail_bound(l, 1.0, t, lo, hi);
    assert!(gap > 0.0 && gap <= bound, "{gap} vs {bound}");
}

#[test]
fn gauge_invariance_u1_and_su2() {
    for (group, field) in [
        (GroupSpec::u1(), sample_u1_coulomb(&SamplerConfig::u1_coulomb(2, 1.0, 0, 0)).unwrap()),
        (GroupSpec::su(2), su2_field(2, 0, 1.0)),
    ] {
        let chi = Character::fundamental(group);
        const STEPS: usize = 2000;
        for pair in 0..50u64 {
            let a = if pair == 0 { field.clone() } else { field.scale(1.0 + 0.02 * pair as f64) };
            let eval = FourierEval::new(&a);
            let sigma = GaugeTransform::Exp(random_xi(group, pair, 0.3));
            let gauged = GaugedEval { inner: &eval, sigma: &sigma };
            let l = &loops()[(pair % 5) as usize];
            let w = wilson_loop(&eval, l, &chi, STEPS).unwrap();
            let wg = wilson_loop(&gauged, l, &chi, STEPS).unwrap();
            assert!((w - wg).norm() <= 1e-7 * chi.dimension(), "{group} pair {pair}: {w} vs {wg}");
        }
    }
}

#[test]
fn grid_backed_evaluator_agrees() {
    let a = su2_field(2, 3, 1.0);
    let grid = to_grid(&a, 10).unwrap();
    let l = &loops()[4];
    let chi = Character::fundamental(GroupSpec::su(2));
    let w1 = wilson_loop(&FourierEval::new(&a), l, &chi, 64).unwrap();
    let w2 = wilson_loop(&FourierEval::from_grid(&grid).unwrap(), l, &chi, 64).unwrap();
    assert!((w1 - w2).norm() < 1e-12);
}

#[test]
fn holonomies_are_unitary_and_bounded() {
    for seed in 0..6 {
        let a = su2_field(2, seed, 4.0);
        let eval = FourierEval::new(&a);
        for l in loops() {
            let h = holonomy(&eval, &l, 16).unwrap();
            assert!(h.unitarity_defect() <= 1e-9);
            for chi in [Character::fundamental(GroupSpec::su(2)), Character::conjugate(GroupSpec::su(2))] {
                assert!(chi.evaluate(&h).norm() <= chi.dimension() + 1e-9);
            }
        }
    }
}

#[test]
fn holonomy_converges_at_third_order() {
    let a = su2_field(2, 11, 2.0);
    let eval = FourierEval::new(&a);
    let l = &loops()[0];
    let reference = holonomy(&eval, l, 640).unwrap();
    let err = |k: usize| frobenius_norm(&(holonomy(&eval, l, k).unwrap().matrix() - reference.matrix()));
    let (e1, e2) = (err(16), err(32));
    let order = (e1 / e2).log2();
    assert!(order >= 3.0, "observed order {order} ({e1:e}, {e2:e})");
}

#[test]
fn reparametrization_and_reversal() {
    let a = su2_field(2, 6, 1.5);
    let eval = FourierEval::new(&a);
    let chi = Character::fundamental(GroupSpec::su(2));
    for l in loops() {
        let w = wilson_loop(&eval, &l, &chi, 2000).unwrap();
        let split = reparametrize(&l, 2).unwrap();
        assert_eq!(split.segment_count(), 2 * l.segment_count());
        let ws = wilson_loop(&eval, &split, &chi, 2000).unwrap();
        assert!((w - ws).norm() <= 1e-9, "{w} vs {ws}");
        let wr = wilson_loop(&eval, &l.reversed(), &chi, 2000).unwrap();
        assert!((wr - w.conj()).norm() <= 1e-9);
    }
}

#[test]
fn continuity_in_the_connection() {
    // Halving a perturbation quarters the squared deviation up to
    // second-order corrections.
    let a = su2_field(2, 2, 3.0);
    let chi = Character::fundamental(GroupSpec::su(2));
    let l = &loops()[4];
    let w0 = wilson_loop(&FourierEval::new(&a), l, &chi, 128).unwrap();
    for dir in 0..6 {
        let b = su2_field(2, 100 + dir, 1.0);
        let dev = |eps: f64| {
            let w = wilson_loop(&FourierEval::new(&a.axpy(eps, &b).unwrap()), l, &chi, 128).unwrap();
            (w - w0).norm_sqr()
        };
        let (d1, d2) = (dev(1e-4), dev(5e-5));
        assert!(d2 <= 0.25 * d1 * 1.01, "direction {dir}: {d2:e} vs {d1:e}");
    }
}

#[test]
fn heat_semigroup_before_or_after_evaluation() {
    let a0 = sample_u1_coulomb(&SamplerConfig::u1_coulomb(3, 1.0, 5, 0)).unwrap();
    let chi = Character::u1_power(2);
    for l in loops() {
        let flowed = heat_semigroup_u1(&a0, 0.03).unwrap();
        let w = wilson_loop(&FourierEval::new(&flowed), &l, &chi, 512).unwrap();
        let e = u1_wilson_exact(&a0, &l, &chi, 0.03).unwrap();
        assert!((w - e).norm() <= 1e-10);
    }
}

#[test]
fn loop_file_parsing() {
    let text = "# two loops\nloop a\nwinding 1 0 0\n0 0 0\n1 0 0\n\nloop b\n0 0 0\n0.25 0 0 # edge\n0.25 0.25 0\n0 0 0\n";
    let parsed = parse_loops(text).unwrap();
    assert_eq!(parsed.len(), 2);
    assert_eq!(parsed[0].id, "a");
    assert_eq!(parsed[1].winding(), [0; 3]);
    assert_eq!(parsed[1].vertices().len(), 4);

    let line_of = |text: &str| match parse_loops(text) {
        Err(Error::Parse { line, .. }) => line,
        other => panic!("expected parse error, got {other:?}"),
    };
    assert_eq!(line_of("loop a\n0 0 0\n1 0 x\n"), 3);
    assert_eq!(line_of("0 0 0\n"), 1);
    assert_eq!(line_of("loop a\nwinding 1 0\n"), 2);
    assert_eq!(line_of("\nloop open\n0 0 0\n0.5 0 0\n"), 2);
    assert_eq!(line_of("loop a\nwinding 0 1 0\n0 0 0\n0 1 0\nloop a\n"), 5);
}

fn unitary(seed: u64, group: GroupSpec) -> GroupElement {
    let basis = standard_basis(group);
    let mut rng = ModeRng::new(seed, 3, 0x636861, [0, 0, 0]);
    let coords: Vec<f64> = (0..basis.dim()).map(|_| 2.0 * rng.normal()).collect();
    exp_map(&basis.element(&coords))
}

proptest! {
    #[test]
    fn characters_are_class_functions(seed in 0u64..1000, n in 2usize..4) {
        for group in [GroupSpec::su(n), GroupSpec::u(n)] {
            let g = unitary(seed, group);
            let h = unitary(seed + 5000, group);
            let conj = g.mul(&h).mul(&g.inverse());
            for chi in [Character::fundamental(group), Character::conjugate(group)] {
                prop_assert!((chi.evaluate(&conj) - chi.evaluate(&h)).norm() <= 1e-12);
            }
        }
        let g = unitary(seed, GroupSpec::u1());
        let h = unitary(seed + 1, GroupSpec::u1());
        let chi = Character::u1_power(((seed % 7) as i64) - 3);
        prop_assert!((chi.evaluate(&g.mul(&h).mul(&g.inverse())) - chi.evaluate(&h)).norm() <= 1e-12);
    }
}
