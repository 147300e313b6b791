//! Run configuration: a flat `key = value` file split into sections.
//!
//! ```text
//! [sampler]
//! group = su2
//! kind = gff
//! cutoff = 3
//!
//! [flow]
//! kind = ym
//! t_end = 0.05
//! ```
//!
//! Unknown sections and keys are rejected, as are duplicates. Lists are
//! comma-separated. Relative paths are resolved against the directory of
//! the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use sha2::{Digest, Sha256};
use torus_ym::algebra::GroupSpec;
use torus_ym::ensemble::WilsonMethod;
use torus_ym::flow::{FlowConfig, FlowKind};
use torus_ym::gff::{Normalization, SamplerConfig, SamplerKind};
use torus_ym::wilson::{Character, CharacterKind};

use crate::error::CliError;

const SECTIONS: [(&str, &[&str]); 5] = [
    ("sampler", &["group", "kind", "cutoff", "g", "seed", "stream", "normalization", "amplitude"]),
    (
        "flow",
        &[
            "kind",
            "t_end",
            "dt_initial",
            "dt_safety",
            "checkpoint_times",
            "blowup_threshold",
            "fixed_step",
            "max_relative_change",
            "monotone_tolerance",
        ],
    ),
    ("wilson", &["loops", "characters", "times", "steps", "method"]),
    ("ensemble", &["n_samples", "cutoffs", "times", "reference_cutoff", "save_fields"]),
    ("output", &["dir"]),
];

/// One `key = value` entry with the line it came from.
#[derive(Clone, Debug)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Clone, Debug, Default)]
struct RawConfig {
    entries: BTreeMap<(String, String), Entry>,
    sections: Vec<String>,
}

fn config_error(line: usize, message: impl Into<String>) -> CliError {
    CliError::Config(format!("line {line}: {}", message.into()))
}

fn parse_raw(text: &str) -> Result<RawConfig, CliError> {
    let mut raw = RawConfig::default();
    let mut section: Option<String> = None;
    for (k, line_text) in text.lines().enumerate() {
        let line = k + 1;
        let content = line_text.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim();
            if !SECTIONS.iter().any(|(s, _)| *s == name) {
                return Err(config_error(line, format!("unknown section [{name}]")));
            }
            if raw.sections.iter().any(|s| s == name) {
                return Err(config_error(line, format!("section [{name}] appears twice")));
            }
            raw.sections.push(name.to_string());
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| config_error(line, format!("expected 'key = value', got '{content}'")))?;
        let (key, value) = (key.trim(), value.trim());
        let sec = section
            .as_deref()
            .ok_or_else(|| config_error(line, format!("key '{key}' appears before any section")))?;
        let allowed = SECTIONS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key) {
            return Err(config_error(line, format!("unknown key '{sec}.{key}'")));
        }
        if value.is_empty() {
            return Err(config_error(line, format!("key '{sec}.{key}' has no value")));
        }
        let slot = (sec.to_string(), key.to_string());
        if let Some(prev) = raw.entries.get(&slot) {
            return Err(config_error(line, format!("key '{sec}.{key}' already set on line {}", prev.line)));
        }
        raw.entries.insert(slot, Entry { value: value.to_string(), line });
    }
    Ok(raw)
}

impl RawConfig {
    fn has_section(&self, s: &str) -> bool {
        self.sections.iter().any(|x| x == s)
    }

    fn get(&self, sec: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(sec.to_string(), key.to_string()))
    }

    fn parse<T: FromStr>(&self, sec: &str, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(sec, key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse()
                .map(Some)
                .map_err(|err| config_error(e.line, format!("key '{sec}.{key}': {err}"))),
        }
    }

    fn require<T: FromStr>(&self, sec: &str, key: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.parse(sec, key)?
            .ok_or_else(|| CliError::Config(format!("missing required key '{sec}.{key}'")))
    }

    fn list<T: FromStr>(&self, sec: &str, key: &str) -> Result<Option<Vec<T>>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(sec, key) {
            None => Ok(None),
            Some(e) => e
                .value
                .split(',')
                .map(|item| {
                    item.trim()
                        .parse()
                        .map_err(|err| config_error(e.line, format!("key '{sec}.{key}': '{}': {err}", item.trim())))
                })
                .collect::<Result<Vec<T>, _>>()
                .map(Some),
        }
    }

    /// Error pointing at the line of `sec.key`, or at the file if unset.
    fn invalid(&self, sec: &str, key: &str, message: impl std::fmt::Display) -> CliError {
        match self.get(sec, key) {
            Some(e) => config_error(e.line, format!("key '{sec}.{key}': {message}")),
            None => CliError::Config(format!("key '{sec}.{key}': {message}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WilsonSection {
    pub loops: Option<PathBuf>,
    pub characters: Vec<CharacterKind>,
    pub times: Vec<f64>,
    pub steps: usize,
    pub method: WilsonMethod,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleSection {
    pub n_samples: usize,
    pub cutoffs: Vec<usize>,
    pub times: Vec<f64>,
    pub reference_cutoff: Option<usize>,
    pub save_fields: bool,
}

/// Parsed and validated configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub sampler: SamplerConfig,
    pub flow: Option<FlowConfig>,
    pub wilson: WilsonSection,
    pub ensemble: Option<EnsembleSection>,
    /// `[output] dir`, resolved against the config directory.
    #[serde(skip)]
    pub output_dir: Option<PathBuf>,
}

fn positive(raw: &RawConfig, sec: &str, key: &str, x: f64) -> Result<f64, CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(raw.invalid(sec, key, format!("must be positive, got {x}")))
    }
}

impl RunConfig {
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let raw = parse_raw(text)?;
        let sampler = sampler_section(&raw)?;
        let flow = if raw.has_section("flow") { Some(flow_section(&raw)?) } else { None };
        let wilson = wilson_section(&raw, base, sampler.group)?;
        let ensemble = if raw.has_section("ensemble") { Some(ensemble_section(&raw)?) } else { None };
        let output_dir = raw.get("output", "dir").map(|e| base.join(&e.value));
        Ok(Self {
            sampler,
            flow,
            wilson,
            ensemble,
            output_dir,
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn flow(&self) -> Result<&FlowConfig, CliError> {
        self.flow
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs a [flow] section".into()))
    }

    pub fn characters(&self) -> Vec<Character> {
        self.wilson
            .characters
            .iter()
            .map(|&kind| Character {
                group: self.sampler.group,
                kind,
            })
            .collect()
    }

    /// SHA-256 of the effective configuration (after flag overrides).
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}

fn sampler_section(raw: &RawConfig) -> Result<SamplerConfig, CliError> {
    const S: &str = "sampler";
    if !raw.has_section(S) {
        return Err(CliError::Config("missing [sampler] section".into()));
    }
    let group: GroupSpec = raw.parse(S, "group")?.unwrap_or_else(|| GroupSpec::su(2));
    let kind = match raw.get(S, "kind").map(|e| e.value.as_str()) {
        None | Some("gff") => SamplerKind::Gff,
        Some("u1_coulomb") | Some("coulomb") => SamplerKind::U1Coulomb,
        Some(other) => return Err(raw.invalid(S, "kind", format!("expected gff or u1_coulomb, got '{other}'"))),
    };
    let cutoff: usize = raw.require(S, "cutoff")?;
    if cutoff < 1 {
        return Err(raw.invalid(S, "cutoff", "must be at least 1"));
    }
    let g = positive(raw, S, "g", raw.parse(S, "g")?.unwrap_or(1.0))?;
    let amplitude: Option<f64> = raw.parse(S, "amplitude")?;
    let normalization = match raw.get(S, "normalization").map(|e| e.value.as_str()) {
        None | Some("none") => {
            if amplitude.is_some() {
                return Err(raw.invalid(S, "amplitude", "only meaningful with normalization = scale or h1"));
            }
            Normalization::None
        }
        Some("scale") => Normalization::Scale(
            amplitude.ok_or_else(|| raw.invalid(S, "amplitude", "required by normalization = scale"))?,
        ),
        Some("h1") => Normalization::H1Norm(
            amplitude.ok_or_else(|| raw.invalid(S, "amplitude", "required by normalization = h1"))?,
        ),
        Some(other) => {
            return Err(raw.invalid(S, "normalization", format!("expected none, scale or h1, got '{other}'")))
        }
    };
    let config = SamplerConfig {
        kind,
        group,
        cutoff,
        coupling: g,
        seed: raw.parse(S, "seed")?.unwrap_or(0),
        stream: raw.parse(S, "stream")?.unwrap_or(0),
        normalization,
    };
    config.validate().map_err(|e| CliError::Config(format!("[sampler]: {e}")))?;
    Ok(config)
}

fn flow_section(raw: &RawConfig) -> Result<FlowConfig, CliError> {
    const S: &str = "flow";
    let kind: FlowKind = raw.parse(S, "kind")?.unwrap_or(FlowKind::YangMills);
    let t_end = positive(raw, S, "t_end", raw.require(S, "t_end")?)?;
    let dt = positive(raw, S, "dt_initial", raw.parse(S, "dt_initial")?.unwrap_or(1e-3))?;
    let times = raw.list(S, "checkpoint_times")?.unwrap_or_else(|| vec![t_end]);
    for &t in &times {
        positive(raw, S, "checkpoint_times", t)?;
    }
    let mut flow = FlowConfig::new(kind, t_end, dt, times);
    if let Some(x) = raw.parse(S, "dt_safety")? {
        flow.dt_safety = x;
    }
    if let Some(x) = raw.parse(S, "blowup_threshold")? {
        flow.blowup_threshold = positive(raw, S, "blowup_threshold", x)?;
    }
    if let Some(x) = raw.parse(S, "fixed_step")? {
        flow.fixed_step = x;
    }
    if let Some(x) = raw.parse(S, "max_relative_change")? {
        flow.max_relative_change = positive(raw, S, "max_relative_change", x)?;
    }
    if let Some(x) = raw.parse(S, "monotone_tolerance")? {
        flow.monotone_tolerance = x;
    }
    flow.validate().map_err(|e| CliError::Config(format!("[flow]: {e}")))?;
    Ok(flow)
}

fn wilson_section(raw: &RawConfig, base: &Path, group: GroupSpec) -> Result<WilsonSection, CliError> {
    const S: &str = "wilson";
    let characters: Vec<CharacterKind> = raw.list(S, "characters")?.unwrap_or_else(|| vec![CharacterKind::Fundamental]);
    for &kind in &characters {
        Character::new(group, kind).map_err(|e| raw.invalid(S, "characters", e))?;
    }
    let times: Vec<f64> = raw.list(S, "times")?.unwrap_or_default();
    if times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(raw.invalid(S, "times", "times must be nonnegative"));
    }
    if times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(raw.invalid(S, "times", "times must be strictly increasing"));
    }
    let steps: usize = raw.parse(S, "steps")?.unwrap_or(256);
    if steps < 1 {
        return Err(raw.invalid(S, "steps", "must be at least 1"));
    }
    let method = match raw.get(S, "method").map(|e| e.value.as_str()) {
        None | Some("holonomy") => WilsonMethod::Holonomy { steps },
        Some("u1_series") => {
            if !group.is_u1() {
                return Err(raw.invalid(S, "method", "u1_series requires group u1"));
            }
            WilsonMethod::U1Series
        }
        Some(other) => return Err(raw.invalid(S, "method", format!("expected holonomy or u1_series, got '{other}'"))),
    };
    Ok(WilsonSection {
        loops: raw.get(S, "loops").map(|e| base.join(&e.value)),
        characters,
        times,
        steps,
        method,
    })
}

fn ensemble_section(raw: &RawConfig) -> Result<EnsembleSection, CliError> {
    const S: &str = "ensemble";
    let n_samples: usize = raw.require(S, "n_samples")?;
    let cutoffs: Vec<usize> = raw
        .list(S, "cutoffs")?
        .ok_or_else(|| CliError::Config(format!("missing required key '{S}.cutoffs'")))?;
    if cutoffs.iter().any(|&c| c < 1) {
        return Err(raw.invalid(S, "cutoffs", "every cutoff must be at least 1"));
    }
    let times: Vec<f64> = raw
        .list(S, "times")?
        .ok_or_else(|| CliError::Config(format!("missing required key '{S}.times'")))?;
    for &t in &times {
        positive(raw, S, "times", t)?;
    }
    let reference_cutoff: Option<usize> = raw.parse(S, "reference_cutoff")?;
    if let (Some(r), Some(&top)) = (reference_cutoff, cutoffs.iter().max()) {
        if r <= top {
            return Err(raw.invalid(S, "reference_cutoff", format!("must exceed the largest cutoff {top}")));
        }
    }
    Ok(EnsembleSection {
        n_samples,
        cutoffs,
        times,
        reference_cutoff,
        save_fields: raw.parse(S, "save_fields")?.unwrap_or(false),
    })
}
