use num_complex::Complex64;
use torus_ym::algebra::GroupSpec;
use torus_ym::ensemble::*;
use torus_ym::fields::modes;
use torus_ym::flow::{FlowConfig, FlowKind};
use torus_ym::gff::{sample, Normalization, SamplerConfig};
use torus_ym::wilson::{make_loop, Character, Loop};
use torus_ym::Error;

fn plaquette() -> Loop {
    make_loop(
        vec![[0.1, 0.2, 0.3], [0.35, 0.2, 0.3], [0.35, 0.45, 0.3], [0.1, 0.45, 0.3], [0.1, 0.2, 0.3]],
        [0; 3],
    )
    .unwrap()
    .with_id("plaquette")
}

fn cycle() -> Loop {
    make_loop(vec![[0.0, 0.3, 0.7], [1.0, 0.3, 0.7]], [1, 0, 0]).unwrap().with_id("x_cycle")
}

fn u1_spec(g: f64, n_samples: usize, cutoffs: Vec<usize>, times: Vec<f64>) -> EnsembleSpec {
    EnsembleSpec {
        sampler: SamplerConfig::u1_coulomb(cutoffs[0], g, 1000, 3),
        cutoffs,
        times: times.clone(),
        loops: vec![plaquette(), cycle()],
        characters: vec![Character::fundamental(GroupSpec::u1()), Character::u1_power(2)],
        n_samples,
        flow: FlowConfig::new(FlowKind::U1Exact, *times.last().unwrap(), 1e-3, times),
        wilson: WilsonMethod::U1Series,
        checkpoint_dir: None,
    }
}

#[test]
fn record_bookkeeping_and_zero_coupling() {
    let spec = u1_spec(1e-12, 2, vec![3], vec![0.01]);
    let records = run_ensemble(&spec).unwrap();
    assert_eq!(records.len(), 2);
    for r in &records {
        assert_eq!(r.config_hash, spec.config_hash());
        assert_eq!(r.group, "U(1)");
        assert!(!r.blew_up);
        for w in &r.samples[0].wilson {
            assert!((w.value() - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        }
    }
    let mut ode = spec.clone();
    ode.wilson = WilsonMethod::Holonomy { steps: 64 };
    ode.flow.kind = FlowKind::YangMills;
    let records = run_ensemble(&ode).unwrap();
    assert_eq!(records.len(), 2);
    assert!(records.iter().all(|r| r.samples[0].wilson.iter().all(|w| (w.value() - 1.0).norm() < 1e-9)));
}

#[test]
fn records_are_ordered_and_thread_independent() {
    let mut spec = u1_spec(1.0, 6, vec![2, 3, 4], vec![0.01, 0.02]);
    spec.flow.kind = FlowKind::Zdds;
    spec.wilson = WilsonMethod::Holonomy { steps: 48 };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let records = pool.install(|| run_ensemble(&spec)).unwrap();
        let mut buf = Vec::new();
        write_records(&records, &mut buf).unwrap();
        (records, buf)
    };
    let (records, one) = run(1);
    let (_, four) = run(4);
    assert_eq!(one, four);
    assert_eq!(records.len(), 18);
    let keys: Vec<(u64, usize)> = records.iter().map(|r| (r.seed, r.cutoff)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn initial_fields_are_coupled_across_cutoffs() {
    for kind in ["coulomb", "gff"] {
        let (small, large) = match kind {
            "coulomb" => (SamplerConfig::u1_coulomb(3, 1.3, 77, 2), SamplerConfig::u1_coulomb(6, 1.3, 77, 2)),
            _ => (
                SamplerConfig::gff(GroupSpec::su(2), 3, 77, 2),
                SamplerConfig::gff(GroupSpec::su(2), 6, 77, 2),
            ),
        };
        let a = sample(&small).unwrap();
        let b = sample(&large).unwrap();
        assert_eq!(b.with_cutoff(3), a);
    }
}

#[test]
fn per_seed_wilson_values_form_cauchy_sequences() {
    let spec = u1_spec(1.0, 20, vec![2, 4, 8], vec![0.01]);
    let records = run_ensemble(&spec).unwrap();
    let mut shrinking = 0;
    for i in 0..spec.n_samples {
        let seed = spec.seed(i);
        let w: Vec<Complex64> = [2, 4, 8]
            .iter()
            .map(|&c| {
                records
                    .iter()
                    .find(|r| r.seed == seed && r.cutoff == c)
                    .unwrap()
                    .wilson_at(0.01, "plaquette", "fundamental")
                    .unwrap()
            })
            .collect();
        if (w[2] - w[1]).norm() < (w[1] - w[0]).norm() {
            shrinking += 1;
        }
    }
    assert!(shrinking >= 18, "{shrinking} of 20");
}

#[test]
fn tightness_against_closed_form() {
    let spec = u1_spec(1.0, 200, vec![2, 4], vec![0.05]);
    let records = run_ensemble(&spec).unwrap();
    let report = tightness_report(&records, true).unwrap();
    assert_eq!(report.rows.len(), 2);
    assert!(report.flags.is_empty(), "{:?}", report.flags);
    for row in &report.rows {
        assert_eq!(row.samples, 200);
        assert_eq!(row.excluded, 0);
        assert!(row.z_score.unwrap().abs() <= 4.0, "{row:?}");
    }
    // paired cutoff increments against the closed-form tail
    let diffs: Vec<f64> = (0..spec.n_samples)
        .map(|i| {
            let seed = spec.seed(i);
            let s = |c: usize| records.iter().find(|r| r.seed == seed && r.cutoff == c).unwrap().samples[0].s_ym;
            s(4) - s(2)
        })
        .collect();
    // the extra modes add nonnegative terms, down to rounding
    assert!(diffs.iter().all(|d| *d >= -1e-12));
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let se = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
    let tail = u1_expected_action(1.0, 0.05, 4) - u1_expected_action(1.0, 0.05, 2);
    assert!((mean - tail).abs() <= 4.0 * se, "{mean} vs {tail} ± {se}");

    assert!(matches!(
        tightness_report(&records[..100], true),
        Err(Error::InsufficientSamples { needed: 100, got: 50 })
    ));
}

#[test]
fn distribution_convergence_against_reference() {
    let spec = u1_spec(1.0, 60, vec![2, 4, 8], vec![0.01]);
    let records = run_ensemble(&spec).unwrap();
    let report = distribution_convergence_report(&records, &spec, 16).unwrap();
    for m in &report.monotone {
        assert_eq!(m.seeds, 60);
        assert!(m.monotone_fraction >= 0.9, "{m:?}");
    }
    for l in ["plaquette", "x_cycle"] {
        let ks = |c: usize| {
            report
                .rows
                .iter()
                .find(|r| r.loop_id == l && r.character_id == "fundamental" && r.cutoff == c)
                .unwrap()
                .clone()
        };
        assert!(ks(8).ks_distance < ks(2).ks_distance || ks(2).ks_distance == 0.0);
        assert!(ks(8).max_seed_deviation < ks(2).max_seed_deviation);
    }

    let tiny = u1_spec(1e-12, 10, vec![2, 4], vec![0.01]);
    let records = run_ensemble(&tiny).unwrap();
    let report = distribution_convergence_report(&records, &tiny, 16).unwrap();
    assert!(report.rows.iter().all(|r| r.max_seed_deviation < 1e-10));
}

#[test]
fn persistence_round_trip_and_integrity() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = u1_spec(1.0, 3, vec![2, 3], vec![0.01, 0.05]);
    spec.checkpoint_dir = Some(dir.path().join("fields"));
    let records = run_ensemble(&spec).unwrap();
    assert_eq!(std::fs::read_dir(dir.path().join("fields")).unwrap().count(), 3 * 2 * 2);

    let path = dir.path().join("records.jsonl");
    save_records(&records, &path).unwrap();
    assert_eq!(load_records(&path).unwrap(), records);

    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    let cut = &lines[3][..lines[3].len() / 2];
    lines[3] = cut;
    match read_records(lines.join("\n").as_bytes()) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("expected a parse error, got {other:?}"),
    }

    // resuming a partial run reproduces the full one
    let resumed = resume_ensemble(&spec, records[..2].to_vec()).unwrap();
    assert_eq!(resumed, records);
    let mut other = spec.clone();
    other.sampler.coupling = 2.0;
    assert!(matches!(resume_ensemble(&other, records.clone()), Err(Error::HashMismatch { .. })));

    let mut csv = Vec::new();
    write_csv(&records, &mut csv).unwrap();
    let csv = String::from_utf8(csv).unwrap();
    let mut rows = csv.lines();
    assert_eq!(rows.next().unwrap(), CSV_HEADER);
    assert_eq!(rows.count(), records.len() * 2 * 2 * 2);
}

#[test]
fn spec_validation() {
    let good = u1_spec(1.0, 2, vec![2, 4], vec![0.01]);
    assert!(good.validate().is_ok());
    let mut bad = good.clone();
    bad.cutoffs = vec![4, 2];
    assert!(bad.validate().is_err());
    let mut bad = good.clone();
    bad.n_samples = 1;
    assert!(bad.validate().is_err());
    let mut bad = good.clone();
    bad.times = vec![0.0];
    assert!(bad.validate().is_err());
    let mut bad = good.clone();
    bad.characters = vec![Character::fundamental(GroupSpec::su(2))];
    assert!(bad.validate().is_err());
    assert_ne!(good.config_hash(), u1_spec(1.0, 3, vec![2, 4], vec![0.01]).config_hash());
}

#[test]
fn non_abelian_blow_up_is_recorded() {
    let sampler = SamplerConfig::gff(GroupSpec::su(2), 2, 5, 0).with_normalization(Normalization::H1Norm(40.0));
    let mut flow = FlowConfig::new(FlowKind::Zdds, 0.002, 1e-4, vec![0.001, 0.002]);
    flow.blowup_threshold = 5.0;
    let spec = EnsembleSpec {
        sampler,
        cutoffs: vec![2],
        times: vec![0.001, 0.002],
        loops: vec![plaquette()],
        characters: vec![Character::fundamental(GroupSpec::su(2))],
        n_samples: 4,
        flow,
        wilson: WilsonMethod::Holonomy { steps: 32 },
        checkpoint_dir: None,
    };
    let records = run_ensemble(&spec).unwrap();
    assert_eq!(records.len(), 4);
    assert!(records.iter().any(|r| r.blew_up));
    for r in &records {
        assert!(r.samples.iter().all(|s| s.t <= r.attained_time));
        if r.blew_up {
            assert!(r.attained_time < 0.002);
        }
    }
    let n = modes::mode_count(2);
    assert_eq!(n, 125);
}
