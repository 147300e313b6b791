//! Monte Carlo ensembles over seeds and cutoffs with persistent records.
//!
//! Initial data for a given seed is coupled across cutoffs: every sampler
//! draws each mode from its own `(seed, stream, mode)` keyed generator, so the
//! cutoff-`M` field is exactly the restriction of any larger-cutoff draw.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fields::modes;
use crate::fields::io::save_field;
use crate::fields::SpectralConnection;
use crate::flow::{integrate, FlowConfig, FlowTrajectory};
use crate::gff::{sample, SamplerConfig, SamplerKind};
use crate::wilson::{
    h_series_with, holonomy, loop_fourier_coefficients, u1_wilson_exact_with, Character, FourierEval, Loop,
};

const PI: f64 = std::f64::consts::PI;

/// Minimum number of retained samples per cutoff for the tightness table.
pub const MIN_TIGHTNESS_SAMPLES: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum WilsonMethod {
    /// Holonomy ODE with about `steps` substeps per loop.
    Holonomy { steps: usize },
    /// Closed-form U(1) line integral of the flowed field.
    U1Series,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    /// Template; sample `i` uses seed `sampler.seed + i` and the given cutoff.
    pub sampler: SamplerConfig,
    pub cutoffs: Vec<usize>,
    pub times: Vec<f64>,
    pub loops: Vec<Loop>,
    pub characters: Vec<Character>,
    pub n_samples: usize,
    /// Its checkpoint times are replaced by `times`.
    pub flow: FlowConfig,
    pub wilson: WilsonMethod,
    /// Directory for per-run field checkpoints; not part of the hash.
    #[serde(skip)]
    pub checkpoint_dir: Option<PathBuf>,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if self.n_samples < 2 {
            return bad("n_samples must be at least 2");
        }
        if self.cutoffs.is_empty() || self.cutoffs.windows(2).any(|w| w[0] >= w[1]) {
            return bad("cutoffs must be nonempty and strictly increasing");
        }
        if self.times.is_empty() || self.times.iter().any(|t| !(*t > 0.0)) || self.times.windows(2).any(|w| w[0] >= w[1])
        {
            return bad("times must be positive and strictly increasing");
        }
        if self.characters.iter().any(|c| c.group != self.sampler.group) {
            return bad("every character must belong to the sampler's group");
        }
        if self.wilson == WilsonMethod::U1Series && !self.sampler.group.is_u1() {
            return Err(Error::NotAbelian(self.sampler.group));
        }
        if let WilsonMethod::Holonomy { steps: 0 } = self.wilson {
            return bad("holonomy steps must be positive");
        }
        for &cutoff in &self.cutoffs {
            SamplerConfig {
                cutoff,
                ..self.sampler.clone()
            }
            .validate()?;
        }
        self.run_flow_config().validate()
    }

    fn run_flow_config(&self) -> FlowConfig {
        let mut flow = self.flow.clone();
        flow.checkpoint_times = self.times.clone();
        flow.t_end = flow.t_end.max(*self.times.last().unwrap_or(&0.0));
        flow
    }

    pub fn seed(&self, i: usize) -> u64 {
        self.sampler.seed.wrapping_add(i as u64)
    }

    pub fn sampler_for(&self, i: usize, cutoff: usize) -> SamplerConfig {
        SamplerConfig {
            cutoff,
            seed: self.seed(i),
            ..self.sampler.clone()
        }
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn config_hash(&self) -> String {
        hash_json(self)
    }
}

fn hash_json<T: Serialize>(v: &T) -> String {
    let bytes = serde_json::to_vec(v).expect("configuration types serialize");
    hex::encode(Sha256::digest(&bytes))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WilsonValue {
    pub loop_id: String,
    pub character_id: String,
    pub wilson_re: f64,
    pub wilson_im: f64,
}

impl WilsonValue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.wilson_re, self.wilson_im)
    }
}

/// Observables at one checkpoint time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSample {
    pub t: f64,
    pub s_ym: f64,
    pub wilson: Vec<WilsonValue>,
}

/// One flowed sample at one cutoff; times past a blow-up are absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRecord {
    pub seed: u64,
    pub stream: u64,
    pub cutoff: usize,
    pub group: String,
    pub g: f64,
    pub attained_time: f64,
    pub blew_up: bool,
    pub config_hash: String,
    pub sampler_hash: String,
    pub flow_hash: String,
    pub samples: Vec<TimeSample>,
}

impl EnsembleRecord {
    pub fn sample_at(&self, t: f64) -> Option<&TimeSample> {
        self.samples.iter().find(|s| s.t == t)
    }

    pub fn wilson_at(&self, t: f64, loop_id: &str, character_id: &str) -> Option<Complex64> {
        self.sample_at(t)?
            .wilson
            .iter()
            .find(|w| w.loop_id == loop_id && w.character_id == character_id)
            .map(WilsonValue::value)
    }
}

fn evaluate_wilson(spec: &EnsembleSpec, state: &SpectralConnection) -> Result<Vec<WilsonValue>> {
    let mut out = Vec::with_capacity(spec.loops.len() * spec.characters.len());
    let eval = match spec.wilson {
        WilsonMethod::Holonomy { .. } => Some(FourierEval::new(state)),
        WilsonMethod::U1Series => None,
    };
    for l in &spec.loops {
        let values: Vec<Complex64> = match (&spec.wilson, &eval) {
            (WilsonMethod::Holonomy { steps }, Some(eval)) => {
                let h = holonomy(eval, l, *steps)?;
                spec.characters.iter().map(|c| c.evaluate(&h)).collect()
            }
            _ => {
                let c = loop_fourier_coefficients(l, state.cutoff());
                spec.characters
                    .iter()
                    .map(|chi| u1_wilson_exact_with(state, &c, chi, 0.0))
                    .collect::<Result<_>>()?
            }
        };
        for (chi, w) in spec.characters.iter().zip(values) {
            out.push(WilsonValue {
                loop_id: l.id.clone(),
                character_id: chi.id(),
                wilson_re: w.re,
                wilson_im: w.im,
            });
        }
    }
    Ok(out)
}

fn run_one(spec: &EnsembleSpec, hash: &str, flow_hash: &str, i: usize, cutoff: usize) -> Result<EnsembleRecord> {
    let sampler = spec.sampler_for(i, cutoff);
    let a0 = sample(&sampler)?;
    let flow = spec.run_flow_config();
    let traj: FlowTrajectory = match integrate(&a0, &flow) {
        Ok(t) => t,
        Err(Error::StepUnderflow { t, .. }) | Err(Error::NonFinite { t }) => {
            return Ok(EnsembleRecord {
                seed: sampler.seed,
                stream: sampler.stream,
                cutoff,
                group: sampler.group.to_string(),
                g: sampler.coupling,
                attained_time: t,
                blew_up: true,
                config_hash: hash.to_string(),
                sampler_hash: hash_json(&sampler),
                flow_hash: flow_hash.to_string(),
                samples: Vec::new(),
            })
        }
        Err(e) => return Err(e),
    };
    let mut samples = Vec::with_capacity(traj.checkpoints.len());
    for (k, cp) in traj.checkpoints.iter().enumerate() {
        if let Some(dir) = &spec.checkpoint_dir {
            let name = format!("seed{}_stream{}_cutoff{}_t{}.ymf", sampler.seed, sampler.stream, cutoff, k);
            save_field(&cp.state, &dir.join(name))?;
        }
        samples.push(TimeSample {
            t: cp.t,
            s_ym: cp.action,
            wilson: evaluate_wilson(spec, &cp.state)?,
        });
    }
    Ok(EnsembleRecord {
        seed: sampler.seed,
        stream: sampler.stream,
        cutoff,
        group: sampler.group.to_string(),
        g: sampler.coupling,
        attained_time: traj.attained_time,
        blew_up: traj.blew_up,
        config_hash: hash.to_string(),
        sampler_hash: hash_json(&sampler),
        flow_hash: flow_hash.to_string(),
        samples,
    })
}

/// Runs every `(seed, cutoff)` pair in parallel; records come back ordered
/// by seed, then cutoff, independent of the thread count.
pub fn run_ensemble(spec: &EnsembleSpec) -> Result<Vec<EnsembleRecord>> {
    resume_ensemble(spec, Vec::new())
}

/// Completes a partially finished ensemble, reusing `existing` records.
pub fn resume_ensemble(spec: &EnsembleSpec, existing: Vec<EnsembleRecord>) -> Result<Vec<EnsembleRecord>> {
    spec.validate()?;
    let hash = spec.config_hash();
    let flow_hash = hash_json(&spec.run_flow_config());
    check_config_hash(&existing, &hash)?;
    if let Some(dir) = &spec.checkpoint_dir {
        fs::create_dir_all(dir)?;
    }
    let mut done: BTreeMap<(u64, usize), EnsembleRecord> =
        existing.into_iter().map(|r| ((r.seed, r.cutoff), r)).collect();
    let jobs: Vec<(usize, usize)> = (0..spec.n_samples)
        .flat_map(|i| spec.cutoffs.iter().map(move |&c| (i, c)))
        .collect();
    let fresh: Vec<Result<EnsembleRecord>> = jobs
        .par_iter()
        .filter(|(i, c)| !done.contains_key(&(spec.seed(*i), *c)))
        .map(|&(i, c)| run_one(spec, &hash, &flow_hash, i, c))
        .collect();
    for r in fresh {
        let r = r?;
        done.insert((r.seed, r.cutoff), r);
    }
    Ok(jobs
        .iter()
        .filter_map(|&(i, c)| done.remove(&(spec.seed(i), c)))
        .collect())
}

/// Refuses records produced by a different configuration.
pub fn check_config_hash(records: &[EnsembleRecord], expected: &str) -> Result<()> {
    match records.iter().find(|r| r.config_hash != expected) {
        Some(r) => Err(Error::HashMismatch {
            expected: expected.to_string(),
            found: r.config_hash.clone(),
        }),
        None => Ok(()),
    }
}

/// Writes one JSON object per line.
pub fn write_records<W: Write>(records: &[EnsembleRecord], w: W) -> Result<()> {
    let mut w = BufWriter::new(w);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads newline-delimited records; failures name the offending line.
pub fn read_records<R: std::io::Read>(r: R) -> Result<Vec<EnsembleRecord>> {
    let mut out = Vec::new();
    for (k, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: k + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn save_records(records: &[EnsembleRecord], path: &Path) -> Result<()> {
    write_records(records, fs::File::create(path)?)
}

pub fn load_records(path: &Path) -> Result<Vec<EnsembleRecord>> {
    read_records(fs::File::open(path)?)
}

pub const CSV_HEADER: &str =
    "seed,stream,cutoff,group,g,t,s_ym,loop_id,character_id,wilson_re,wilson_im,attained_time,blew_up,config_hash";

/// Flat rows, one per `(record, t, loop, character)`; records without
/// Wilson values get one row per time with empty loop columns.
pub fn write_csv<W: Write>(records: &[EnsembleRecord], w: W) -> Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        let head = format!("{},{},{},{},{:.16e}", r.seed, r.stream, r.cutoff, r.group, r.g);
        let tail = format!("{:.16e},{},{}", r.attained_time, r.blew_up, r.config_hash);
        for s in &r.samples {
            if s.wilson.is_empty() {
                writeln!(w, "{head},{:.16e},{:.16e},,,,,{tail}", s.t, s.s_ym)?;
            }
            for v in &s.wilson {
                writeln!(
                    w,
                    "{head},{:.16e},{:.16e},{},{},{:.16e},{:.16e},{tail}",
                    s.t, s.s_ym, v.loop_id, v.character_id, v.wilson_re, v.wilson_im
                )?;
            }
        }
        if r.samples.is_empty() {
            writeln!(w, "{head},,,,,,,{tail}")?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `E[S_YM]` of the Coulomb law flowed to time `t`:
/// `g² Σ_{0<|n|_∞≤M} e^{−8π²|n|²t}`.
pub fn u1_expected_action(g: f64, t: f64, cutoff: usize) -> f64 {
    g * g
        * modes::modes(cutoff)
            .filter(|&(_, n)| n != [0, 0, 0])
            .map(|(_, n)| (-8.0 * PI * PI * modes::norm_sq(n) * t).exp())
            .sum::<f64>()
}

/// The all-mode limit of [`u1_expected_action`], summed shell by shell
/// until a shell no longer changes the total.
pub fn u1_expected_action_limit(g: f64, t: f64) -> f64 {
    let mut total = 0.0;
    let mut k = 1usize;
    loop {
        // shell |n|_∞ = k
        let shell: f64 = shell_modes(k).map(|n| (-8.0 * PI * PI * modes::norm_sq(n) * t).exp()).sum();
        total += shell;
        if shell <= total * 1e-17 || k > 10_000 {
            return g * g * total;
        }
        k += 1;
    }
}

fn shell_modes(k: usize) -> impl Iterator<Item = [i64; 3]> {
    let k = k as i64;
    (-k..=k).flat_map(move |a| {
        (-k..=k).flat_map(move |b| {
            (-k..=k)
                .map(move |c| [a, b, c])
                .filter(move |n| n.iter().map(|x| x.abs()).max() == Some(k))
        })
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TightnessRow {
    pub cutoff: usize,
    pub t: f64,
    pub samples: usize,
    /// Runs that did not reach `t`.
    pub excluded: usize,
    pub mean: f64,
    pub standard_error: f64,
    pub closed_form: Option<f64>,
    /// `(mean − closed_form)/standard_error`.
    pub z_score: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TightnessReport {
    pub rows: Vec<TightnessRow>,
    /// All-mode closed-form expectation per time, when compared exactly.
    pub limits: Vec<(f64, f64)>,
    pub flags: Vec<String>,
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Mean and standard error of `S_YM` per `(cutoff, t)`. With
/// `exact_comparison` the U(1) closed form is tabulated alongside and the
/// largest-cutoff mean is checked against the all-mode limit.
pub fn tightness_report(records: &[EnsembleRecord], exact_comparison: bool) -> Result<TightnessReport> {
    let mut groups: BTreeMap<(usize, u64), (f64, Vec<f64>, usize)> = BTreeMap::new();
    let times: Vec<f64> = {
        let mut ts: Vec<f64> = records.iter().flat_map(|r| r.samples.iter().map(|s| s.t)).collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    };
    for r in records {
        for &t in &times {
            let entry = groups.entry((r.cutoff, t.to_bits())).or_insert((t, Vec::new(), 0));
            match r.sample_at(t) {
                Some(s) => entry.1.push(s.s_ym),
                None => entry.2 += 1,
            }
        }
    }
    let g = records.first().map(|r| r.g).unwrap_or(1.0);
    if exact_comparison {
        if let Some(r) = records.iter().find(|r| r.group != "U(1)") {
            return Err(Error::InvalidArgument(format!("closed-form comparison needs U(1) records, got {}", r.group)));
        }
        if records.iter().any(|r| r.g != g) {
            return Err(Error::InvalidArgument("records mix couplings".into()));
        }
    }
    let mut rows = Vec::new();
    for (&(cutoff, _), (t, values, excluded)) in &groups {
        if values.len() < MIN_TIGHTNESS_SAMPLES {
            return Err(Error::InsufficientSamples {
                needed: MIN_TIGHTNESS_SAMPLES,
                got: values.len(),
            });
        }
        let (mean, se) = mean_se(values);
        let closed_form = exact_comparison.then(|| u1_expected_action(g, *t, cutoff));
        rows.push(TightnessRow {
            cutoff,
            t: *t,
            samples: values.len(),
            excluded: *excluded,
            mean,
            standard_error: se,
            closed_form,
            z_score: closed_form.map(|c| (mean - c) / se),
        });
    }
    let mut flags = Vec::new();
    let mut limits = Vec::new();
    for &t in &times {
        let mut by_cutoff: Vec<&TightnessRow> = rows.iter().filter(|r| r.t == t).collect();
        by_cutoff.sort_by_key(|r| r.cutoff);
        if exact_comparison {
            let limit = u1_expected_action_limit(g, t);
            limits.push((t, limit));
            for r in &by_cutoff {
                if r.mean > limit + 5.0 * r.standard_error {
                    flags.push(format!(
                        "t = {t}: cutoff {} mean {} exceeds the all-mode limit {limit} by more than 5 SE",
                        r.cutoff, r.mean
                    ));
                }
            }
        } else if by_cutoff.len() >= 3 {
            // growth at every refinement, each beyond 2 combined SE, reads as unbounded
            let growing = by_cutoff.windows(2).all(|w| {
                w[1].mean - w[0].mean > 2.0 * (w[0].standard_error.powi(2) + w[1].standard_error.powi(2)).sqrt()
            });
            if growing {
                flags.push(format!("t = {t}: mean S_YM grows at every cutoff refinement"));
            }
        }
    }
    Ok(TightnessReport { rows, limits, flags })
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub loop_id: String,
    pub character_id: String,
    pub t: f64,
    pub cutoff: usize,
    /// Largest of the KS distances of the real and imaginary parts.
    pub ks_distance: f64,
    pub max_seed_deviation: f64,
    pub mean_seed_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotoneSummary {
    pub loop_id: String,
    pub character_id: String,
    pub t: f64,
    pub seeds: usize,
    /// Seeds whose deviation strictly decreases at every cutoff refinement.
    pub monotone_fraction: f64,
    /// Seeds whose deviation at the largest cutoff is below that at the smallest.
    pub endpoint_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub reference_cutoff: usize,
    pub rows: Vec<ConvergenceRow>,
    pub monotone: Vec<MonotoneSummary>,
}

/// Compares per-seed U(1) Wilson values with `χ(exp(H))`, `H` the
/// heat-regularized line integral of the same seed's draw at
/// `reference_cutoff`.
pub fn distribution_convergence_report(
    records: &[EnsembleRecord],
    spec: &EnsembleSpec,
    reference_cutoff: usize,
) -> Result<ConvergenceReport> {
    if !spec.sampler.group.is_u1() || spec.sampler.kind != SamplerKind::U1Coulomb {
        return Err(Error::NotAbelian(spec.sampler.group));
    }
    if let Some(r) = records.iter().find(|r| r.group != "U(1)") {
        return Err(Error::InvalidArgument(format!("convergence report needs U(1) records, got {}", r.group)));
    }
    let seeds: Vec<u64> = {
        let mut s: Vec<u64> = records.iter().map(|r| r.seed).collect();
        s.sort_unstable();
        s.dedup();
        s
    };
    let coeffs: Vec<_> = spec.loops.iter().map(|l| loop_fourier_coefficients(l, reference_cutoff)).collect();
    // reference line integrals per seed: [loop][time]
    let reference: BTreeMap<u64, Vec<Vec<f64>>> = seeds
        .par_iter()
        .map(|&seed| {
            let cfg = SamplerConfig {
                cutoff: reference_cutoff,
                seed,
                ..spec.sampler.clone()
            };
            let z = sample(&cfg)?;
            let h = coeffs
                .iter()
                .map(|c| spec.times.iter().map(|&t| h_series_with(&z, c, t, reference_cutoff).map(|h| h.im)).collect())
                .collect::<Result<Vec<Vec<f64>>>>()?;
            Ok((seed, h))
        })
        .collect::<Result<_>>()?;
    let by_key: BTreeMap<(u64, usize), &EnsembleRecord> = records.iter().map(|r| ((r.seed, r.cutoff), r)).collect();
    let mut rows = Vec::new();
    let mut monotone = Vec::new();
    for (li, l) in spec.loops.iter().enumerate() {
        for chi in &spec.characters {
            let cid = chi.id();
            for (ti, &t) in spec.times.iter().enumerate() {
                let reference_values: Vec<Complex64> =
                    seeds.iter().map(|s| chi.evaluate_phase(reference[s][li][ti])).collect();
                let mut per_seed: Vec<Vec<Option<f64>>> = vec![Vec::new(); seeds.len()];
                for &cutoff in &spec.cutoffs {
                    let mut values = Vec::new();
                    let mut refs = Vec::new();
                    let mut devs = Vec::new();
                    for (si, seed) in seeds.iter().enumerate() {
                        let w = by_key.get(&(*seed, cutoff)).and_then(|r| r.wilson_at(t, &l.id, &cid));
                        let dev = w.map(|w| (w - reference_values[si]).norm());
                        per_seed[si].push(dev);
                        if let (Some(w), Some(d)) = (w, dev) {
                            values.push(w);
                            refs.push(reference_values[si]);
                            devs.push(d);
                        }
                    }
                    let re = |v: &[Complex64]| v.iter().map(|z| z.re).collect::<Vec<_>>();
                    let im = |v: &[Complex64]| v.iter().map(|z| z.im).collect::<Vec<_>>();
                    let ks = ks_distance(&re(&values), &re(&refs)).max(ks_distance(&im(&values), &im(&refs)));
                    rows.push(ConvergenceRow {
                        loop_id: l.id.clone(),
                        character_id: cid.clone(),
                        t,
                        cutoff,
                        ks_distance: ks,
                        max_seed_deviation: devs.iter().cloned().fold(0.0, f64::max),
                        mean_seed_deviation: if devs.is_empty() {
                            0.0
                        } else {
                            devs.iter().sum::<f64>() / devs.len() as f64
                        },
                    });
                }
                let complete: Vec<Vec<f64>> = per_seed
                    .iter()
                    .filter_map(|d| d.iter().cloned().collect::<Option<Vec<f64>>>())
                    .collect();
                let n = complete.len().max(1) as f64;
                monotone.push(MonotoneSummary {
                    loop_id: l.id.clone(),
                    character_id: cid.clone(),
                    t,
                    seeds: complete.len(),
                    monotone_fraction: complete.iter().filter(|d| d.windows(2).all(|w| w[1] < w[0])).count() as f64
                        / n,
                    endpoint_fraction: complete
                        .iter()
                        .filter(|d| d.len() >= 2 && d[d.len() - 1] < d[0])
                        .count() as f64
                        / n,
                });
            }
        }
    }
    Ok(ConvergenceReport {
        reference_cutoff,
        rows,
        monotone,
    })
}
