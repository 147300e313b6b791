//! The five subcommands. Each writes its outputs plus a JSON manifest into
//! the output directory and prints a short summary to stdout.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use torus_ym::ensemble::{
    distribution_convergence_report, load_records, resume_ensemble, run_ensemble, save_records, tightness_report,
    write_csv, EnsembleSpec,
};
use torus_ym::fields::io::{load_field, save_field};
use torus_ym::fields::ops::{d_star_1form, ym_action};
use torus_ym::fields::rhs::{nonlinear_rhs, Equation};
use torus_ym::fields::{dealiased_resolution, to_grid, zdds_rhs, GridConnection, SpectralConnection};
use torus_ym::flow::{integrate_from, FlowConfig, FlowStart, FlowTrajectory, ResumeState};
use torus_ym::gff::{self, SamplerKind};
use torus_ym::verify::{run_verification, VerifyOptions};
use torus_ym::wilson::{parse_loops, u1_wilson_exact, wilson_loop, FourierEval, Loop};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::{Common, Fault, OUTPUT_ENV};

const DEFAULT_OUTPUT: &str = "ymtorus-output";

/// Where outputs go and which setting chose the directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub config: String,
    pub config_hash: String,
    pub seed: u64,
    pub output_dir: String,
    pub output_source: String,
}

struct Context {
    config: RunConfig,
    out: PathBuf,
    provenance: Provenance,
}

fn output_dir(flag: Option<&Path>, config: &RunConfig) -> (PathBuf, String) {
    if let Some(p) = flag {
        return (p.to_path_buf(), "--output".into());
    }
    if let Some(p) = std::env::var_os(OUTPUT_ENV).filter(|v| !v.is_empty()) {
        return (PathBuf::from(p), format!("env {OUTPUT_ENV}"));
    }
    if let Some(p) = &config.output_dir {
        return (p.clone(), "config output.dir".into());
    }
    (PathBuf::from(DEFAULT_OUTPUT), "default".into())
}

fn context(common: &Common) -> Result<Context, CliError> {
    let mut config = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        config.sampler.seed = seed;
    }
    let (out, source) = output_dir(common.output.as_deref(), &config);
    fs::create_dir_all(&out).map_err(CliError::io(format!("cannot create {}", out.display())))?;
    let provenance = Provenance {
        version: env!("CARGO_PKG_VERSION").into(),
        config: common.config.display().to_string(),
        config_hash: config.hash(),
        seed: config.sampler.seed,
        output_dir: out.display().to_string(),
        output_source: source,
    };
    Ok(Context { config, out, provenance })
}

fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(CliError::io(format!("cannot read {}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(torus_ym::Error::from)?;
    text.push('\n');
    fs::write(path, text).map_err(CliError::io(format!("cannot write {}", path.display())))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(CliError::io(format!("cannot read {}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn load_checkpoint(path: &Path) -> Result<SpectralConnection, CliError> {
    if !path.exists() {
        return Err(CliError::Config(format!("checkpoint {} does not exist", path.display())));
    }
    Ok(load_field(path)?)
}

fn action(a: &SpectralConnection) -> Result<f64, CliError> {
    Ok(ym_action(&to_grid(a, dealiased_resolution(a.cutoff()))?)?)
}

fn load_loops(path: &Path) -> Result<Vec<Loop>, CliError> {
    let text = fs::read_to_string(path).map_err(CliError::io(format!("cannot read loop file {}", path.display())))?;
    parse_loops(&text).map_err(|e| match e {
        torus_ym::Error::Parse { line, message } => {
            CliError::Config(format!("{}: line {line}: {message}", path.display()))
        }
        other => other.into(),
    })
}

#[derive(Serialize)]
struct SampleManifest<'a> {
    provenance: &'a Provenance,
    sampler: &'a gff::SamplerConfig,
    file: String,
    sha256: String,
    s_ym: f64,
    h1_norm: f64,
    l2_norm: f64,
    divergence_max: f64,
}

pub fn sample(common: &Common) -> Result<(), CliError> {
    let ctx = context(common)?;
    let a = gff::sample(&ctx.config.sampler)?;
    let path = ctx.out.join("field.ymf");
    save_field(&a, &path)?;
    let manifest = SampleManifest {
        provenance: &ctx.provenance,
        sampler: &ctx.config.sampler,
        file: "field.ymf".into(),
        sha256: sha256_file(&path)?,
        s_ym: action(&a)?,
        h1_norm: a.h1_norm(),
        l2_norm: a.l2_norm(),
        divergence_max: d_star_1form(&a).max_abs(),
    };
    write_json(&ctx.out.join("sample_manifest.json"), &manifest)?;
    println!("wrote {}", path.display());
    println!("S_YM = {:.16e}", manifest.s_ym);
    println!("H1 = {:.16e}", manifest.h1_norm);
    println!("max |d*A| = {:.16e}", manifest.divergence_max);
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSummary {
    pub t: f64,
    pub action: f64,
    pub l2_norm: f64,
    pub linf: f64,
    pub file: Option<String>,
    pub sha256: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowManifest {
    pub provenance: Provenance,
    pub input: String,
    pub input_sha256: String,
    pub flow: FlowConfig,
    pub initial: StateSummary,
    pub checkpoints: Vec<StateSummary>,
    pub attained_time: f64,
    pub blew_up: bool,
    pub error: Option<String>,
    pub final_state: Option<StateSummary>,
    /// Integrator state after the final step; absent after a failure.
    pub resume: Option<ResumeState>,
    pub resumed_from: Option<f64>,
    pub step_count: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
}

fn save_state(out: &Path, name: &str, t: f64, a: &SpectralConnection, action: f64, linf: f64) -> Result<StateSummary, CliError> {
    let path = out.join(name);
    save_field(a, &path)?;
    Ok(StateSummary {
        t,
        action,
        l2_norm: a.l2_norm(),
        linf,
        file: Some(name.into()),
        sha256: Some(sha256_file(&path)?),
    })
}

fn print_decay_table(initial: &StateSummary, rows: &[StateSummary]) {
    println!("{:>24} {:>24} {:>24} {:>24}", "t", "S_YM", "S_YM/S_YM(0)", "|A|_inf");
    for r in std::iter::once(initial).chain(rows) {
        let ratio = if initial.action > 0.0 { r.action / initial.action } else { f64::NAN };
        println!("{:>24.16e} {:>24.16e} {:>24.16e} {:>24.16e}", r.t, r.action, ratio, r.linf);
    }
}

pub fn flow(common: &Common, input: &Path, resume: bool) -> Result<(), CliError> {
    let ctx = context(common)?;
    let cfg = ctx.config.flow()?.clone();
    let a0 = load_checkpoint(input)?;
    let input_sha256 = sha256_file(input)?;
    let manifest_path = ctx.out.join("flow_manifest.json");

    let (start, previous) = if resume {
        let prev: FlowManifest = read_json(&manifest_path)?;
        if prev.input_sha256 != input_sha256 {
            return Err(CliError::Config("resume: the input differs from the one the run started from".into()));
        }
        if prev.flow.kind != cfg.kind {
            return Err(CliError::Config(format!("resume: flow kind changed from {} to {}", prev.flow.kind, cfg.kind)));
        }
        let (Some(state), Some(resume_state)) = (&prev.final_state, &prev.resume) else {
            return Err(CliError::Config("resume: the previous run did not finish cleanly".into()));
        };
        if prev.blew_up {
            return Err(CliError::Config("resume: the previous run blew up".into()));
        }
        if cfg.t_end <= prev.attained_time {
            return Err(CliError::Config(format!(
                "resume: t_end = {} already reached (attained {})",
                cfg.t_end, prev.attained_time
            )));
        }
        let path = ctx.out.join(state.file.as_deref().unwrap_or_default());
        if state.sha256.as_deref() != Some(sha256_file(&path)?.as_str()) {
            return Err(CliError::Config(format!("resume: {} does not match the manifest", path.display())));
        }
        let start = FlowStart {
            state: load_checkpoint(&path)?,
            resume: resume_state.clone(),
        };
        (start, Some(prev))
    } else {
        (FlowStart::initial(&a0, &cfg), None)
    };
    let start_t = start.resume.t;

    let result = integrate_from(start, &cfg);
    let mut checkpoints = previous.as_ref().map(|p| p.checkpoints.clone()).unwrap_or_default();
    let offset = checkpoints.len();
    let mut manifest = FlowManifest {
        provenance: ctx.provenance.clone(),
        input: input.display().to_string(),
        input_sha256,
        flow: cfg.clone(),
        initial: StateSummary {
            t: 0.0,
            action: action(&a0)?,
            l2_norm: a0.l2_norm(),
            linf: to_grid(&a0, dealiased_resolution(a0.cutoff()))?.linf_norm(),
            file: None,
            sha256: None,
        },
        checkpoints: Vec::new(),
        attained_time: start_t,
        blew_up: false,
        error: None,
        final_state: None,
        resume: None,
        resumed_from: previous.as_ref().map(|_| start_t),
        step_count: previous.as_ref().map_or(0, |p| p.step_count),
        rejected_steps: previous.as_ref().map_or(0, |p| p.rejected_steps),
        rhs_evaluations: previous.as_ref().map_or(0, |p| p.rhs_evaluations),
    };
    let outcome = match result {
        Ok(traj) => {
            record_trajectory(&ctx.out, &traj, offset, &mut checkpoints, &mut manifest, previous.as_ref())?;
            if traj.blew_up {
                Err(CliError::BlowUp(format!(
                    "|A| exceeded {:e} at t = {:.16e}",
                    cfg.blowup_threshold, traj.attained_time
                )))
            } else {
                Ok(())
            }
        }
        Err(e @ (torus_ym::Error::StepUnderflow { t, .. } | torus_ym::Error::NonFinite { t })) => {
            if let Some(p) = &previous {
                manifest.initial = p.initial.clone();
            }
            manifest.blew_up = true;
            manifest.attained_time = t;
            manifest.error = Some(e.to_string());
            Err(CliError::BlowUp(e.to_string()))
        }
        Err(e) => return Err(e.into()),
    };
    manifest.checkpoints = checkpoints;
    write_json(&manifest_path, &manifest)?;
    print_decay_table(&manifest.initial, &manifest.checkpoints);
    println!("attained t = {:.16e}", manifest.attained_time);
    println!("wrote {}", manifest_path.display());
    outcome
}

fn record_trajectory(
    out: &Path,
    traj: &FlowTrajectory,
    offset: usize,
    checkpoints: &mut Vec<StateSummary>,
    manifest: &mut FlowManifest,
    previous: Option<&FlowManifest>,
) -> Result<(), CliError> {
    if let Some(p) = previous {
        manifest.initial = p.initial.clone();
    }
    for (i, c) in traj.checkpoints.iter().enumerate() {
        let name = format!("checkpoint_{:04}.ymf", offset + i + 1);
        checkpoints.push(save_state(out, &name, c.t, &c.state, c.action, c.linf)?);
    }
    let final_action = action(&traj.final_state)?;
    let final_linf = to_grid(&traj.final_state, dealiased_resolution(traj.final_state.cutoff()))?.linf_norm();
    manifest.final_state = Some(save_state(
        out,
        "flow_final.ymf",
        traj.attained_time,
        &traj.final_state,
        final_action,
        final_linf,
    )?);
    manifest.attained_time = traj.attained_time;
    manifest.blew_up = traj.blew_up;
    manifest.resume = (!traj.blew_up).then(|| traj.resume.clone());
    manifest.step_count += traj.step_count;
    manifest.rejected_steps += traj.rejected_steps;
    manifest.rhs_evaluations += traj.rhs_evaluations;
    Ok(())
}

#[derive(Serialize)]
struct WilsonManifest<'a> {
    provenance: &'a Provenance,
    input: String,
    input_sha256: String,
    loops: String,
    loops_sha256: String,
    times: Vec<f64>,
    steps: usize,
    flow: Option<FlowConfig>,
    rows: usize,
    max_abs_diff: Option<f64>,
    attained_time: f64,
    blew_up: bool,
    csv: String,
}

pub fn wilson(common: &Common, input: &Path, loops: Option<&Path>) -> Result<(), CliError> {
    let ctx = context(common)?;
    let cfg = &ctx.config;
    let loops_path = loops
        .map(Path::to_path_buf)
        .or_else(|| cfg.wilson.loops.clone())
        .ok_or_else(|| CliError::Config("no loop file: pass --loops or set wilson.loops".into()))?;
    let loop_list = load_loops(&loops_path)?;
    let a0 = load_checkpoint(input)?;
    let characters = cfg.characters();
    if a0.group() != cfg.sampler.group {
        return Err(CliError::Config(format!(
            "input field has group {} but sampler.group is {}",
            a0.group(),
            cfg.sampler.group
        )));
    }
    let times = if cfg.wilson.times.is_empty() { vec![0.0] } else { cfg.wilson.times.clone() };
    let positive: Vec<f64> = times.iter().copied().filter(|&t| t > 0.0).collect();

    let mut flow_cfg = None;
    let mut states: Vec<(f64, SpectralConnection)> = Vec::new();
    if times[0] == 0.0 {
        states.push((0.0, a0.clone()));
    }
    let mut attained = 0.0;
    let mut blew_up = false;
    if let Some(&last) = positive.last() {
        let mut f = cfg.flow()?.clone();
        f.checkpoint_times = positive.clone();
        f.t_end = last;
        match integrate_from(FlowStart::initial(&a0, &f), &f) {
            Ok(traj) => {
                attained = traj.attained_time;
                blew_up = traj.blew_up;
                states.extend(traj.checkpoints.into_iter().map(|c| (c.t, c.state)));
            }
            Err(torus_ym::Error::StepUnderflow { t, .. } | torus_ym::Error::NonFinite { t }) => {
                attained = t;
                blew_up = true;
            }
            Err(e) => return Err(e.into()),
        }
        flow_cfg = Some(f);
    }

    let exact = cfg.sampler.group.is_u1();
    let csv_path = ctx.out.join("wilson.csv");
    let mut csv = Vec::new();
    write!(csv, "loop_id,character_id,t,wilson_re,wilson_im").unwrap();
    if exact {
        write!(csv, ",exact_re,exact_im,abs_diff").unwrap();
    }
    writeln!(csv).unwrap();
    let evals: Vec<(f64, FourierEval)> = states.iter().map(|(t, a)| (*t, FourierEval::new(a))).collect();
    let mut rows = 0;
    let mut max_diff: Option<f64> = None;
    for l in &loop_list {
        for chi in &characters {
            for (t, eval) in &evals {
                let w = wilson_loop(eval, l, chi, cfg.wilson.steps)?;
                write!(csv, "{},{},{:.16e},{:.16e},{:.16e}", l.id, chi.id(), t, w.re, w.im).unwrap();
                if exact {
                    let e = u1_wilson_exact(&a0, l, chi, *t)?;
                    let d = (w - e).norm();
                    max_diff = Some(max_diff.map_or(d, |m: f64| m.max(d)));
                    write!(csv, ",{:.16e},{:.16e},{:.16e}", e.re, e.im, d).unwrap();
                }
                writeln!(csv).unwrap();
                rows += 1;
            }
        }
    }
    fs::write(&csv_path, csv).map_err(CliError::io(format!("cannot write {}", csv_path.display())))?;
    let manifest = WilsonManifest {
        provenance: &ctx.provenance,
        input: input.display().to_string(),
        input_sha256: sha256_file(input)?,
        loops: loops_path.display().to_string(),
        loops_sha256: sha256_file(&loops_path)?,
        times: times.clone(),
        steps: cfg.wilson.steps,
        flow: flow_cfg,
        rows,
        max_abs_diff: max_diff,
        attained_time: attained,
        blew_up,
        csv: "wilson.csv".into(),
    };
    write_json(&ctx.out.join("wilson_manifest.json"), &manifest)?;
    println!("wrote {} rows to {}", rows, csv_path.display());
    if let Some(d) = max_diff {
        println!("max |W - W_exact| = {d:.16e}");
    }
    if blew_up {
        return Err(CliError::BlowUp(format!("flow stopped at t = {attained:.16e}")));
    }
    Ok(())
}

#[derive(Serialize)]
struct EnsembleManifest<'a> {
    provenance: &'a Provenance,
    spec_hash: String,
    spec: &'a EnsembleSpec,
    records: usize,
    blown_up: usize,
    resumed: bool,
    tightness: String,
    convergence: String,
}

pub fn ensemble(common: &Common, resume: bool) -> Result<(), CliError> {
    let ctx = context(common)?;
    let cfg = &ctx.config;
    let es = cfg
        .ensemble
        .as_ref()
        .ok_or_else(|| CliError::Config("this command needs an [ensemble] section".into()))?;
    let loops = match &cfg.wilson.loops {
        Some(p) => load_loops(p)?,
        None => Vec::new(),
    };
    let spec = EnsembleSpec {
        sampler: cfg.sampler.clone(),
        cutoffs: es.cutoffs.clone(),
        times: es.times.clone(),
        loops,
        characters: cfg.characters(),
        n_samples: es.n_samples,
        flow: cfg.flow()?.clone(),
        wilson: cfg.wilson.method,
        checkpoint_dir: es.save_fields.then(|| ctx.out.join("fields")),
    };
    spec.validate().map_err(|e| CliError::Config(format!("[ensemble]: {e}")))?;

    let records_path = ctx.out.join("records.jsonl");
    let records = if resume {
        if !records_path.exists() {
            return Err(CliError::Config(format!("resume: {} does not exist", records_path.display())));
        }
        resume_ensemble(&spec, load_records(&records_path)?)?
    } else {
        run_ensemble(&spec)?
    };
    save_records(&records, &records_path)?;
    let csv_path = ctx.out.join("records.csv");
    let file = fs::File::create(&csv_path).map_err(CliError::io(format!("cannot write {}", csv_path.display())))?;
    write_csv(&records, file)?;

    let coulomb = spec.sampler.kind == SamplerKind::U1Coulomb;
    let tightness = match tightness_report(&records, coulomb) {
        Ok(report) => {
            write_json(&ctx.out.join("tightness.json"), &report)?;
            println!("{:>6} {:>24} {:>8} {:>24} {:>24} {:>24} {:>10}", "cutoff", "t", "samples", "mean S_YM", "std err", "closed form", "z");
            for r in &report.rows {
                println!(
                    "{:>6} {:>24.16e} {:>8} {:>24.16e} {:>24.16e} {:>24} {:>10}",
                    r.cutoff,
                    r.t,
                    r.samples,
                    r.mean,
                    r.standard_error,
                    r.closed_form.map_or("-".into(), |c| format!("{c:.16e}")),
                    r.z_score.map_or("-".into(), |z| format!("{z:.3}")),
                );
            }
            for f in &report.flags {
                println!("flag: {f}");
            }
            "tightness.json".to_string()
        }
        Err(torus_ym::Error::InsufficientSamples { needed, got }) => {
            format!("skipped: needs {needed} retained samples per cutoff, got {got}")
        }
        Err(e) => return Err(e.into()),
    };
    let convergence = if coulomb && !spec.loops.is_empty() {
        let top = *spec.cutoffs.iter().max().unwrap_or(&1);
        let reference = es.reference_cutoff.unwrap_or(2 * top);
        let report = distribution_convergence_report(&records, &spec, reference)?;
        write_json(&ctx.out.join("convergence.json"), &report)?;
        for m in &report.monotone {
            println!(
                "{} {} t = {:.16e}: decreasing deviation for {:.3} of {} seeds",
                m.loop_id, m.character_id, m.t, m.monotone_fraction, m.seeds
            );
        }
        "convergence.json".to_string()
    } else {
        "skipped: needs the U(1) Coulomb sampler and at least one loop".to_string()
    };

    let blown_up = records.iter().filter(|r| r.blew_up).count();
    let manifest = EnsembleManifest {
        provenance: &ctx.provenance,
        spec_hash: spec.config_hash(),
        spec: &spec,
        records: records.len(),
        blown_up,
        resumed: resume,
        tightness,
        convergence,
    };
    write_json(&ctx.out.join("ensemble_manifest.json"), &manifest)?;
    println!("wrote {} records to {}", records.len(), records_path.display());
    if blown_up > 0 {
        return Err(CliError::BlowUp(format!("{blown_up} of {} runs blew up", records.len())));
    }
    Ok(())
}

/// `zdds_rhs` with the sign of its commutator terms flipped.
fn flipped_zdds(a: &GridConnection) -> torus_ym::Result<GridConnection> {
    zdds_rhs(a)?.axpy(-2.0, &nonlinear_rhs(a, Equation::Zdds)?)
}

pub fn verify(fault: Option<Fault>) -> Result<(), CliError> {
    let options = match fault {
        None => VerifyOptions::default(),
        Some(Fault::ZddsSign) => VerifyOptions { zdds_rhs: flipped_zdds },
    };
    let report = run_verification(&options);
    for s in &report.suites {
        println!("{} {}", if s.passed() { "PASS" } else { "FAIL" }, s.name);
        for (k, v) in &s.values {
            println!("    {k} = {v:.16e}");
        }
    }
    println!("timing");
    for s in &report.suites {
        println!("    {:<24} {:>10.3} s", s.name, s.elapsed.as_secs_f64());
    }
    match report.first_failure() {
        Some((suite, message)) => Err(CliError::Verification {
            suite: suite.into(),
            message: message.into(),
        }),
        None => {
            println!("all {} suites passed", report.suites.len());
            Ok(())
        }
    }
}
