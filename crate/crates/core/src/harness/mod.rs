//! Experiment runner behind the `elliptic-lab` CLI: versioned JSON configs,
//! deterministic CSV/SVG outputs and a checksummed manifest.
//!
//! Precedence for shared settings: command-line flag, then the
//! `ELLIPTIC_LAB_JOBS` environment variable (jobs only), then the config
//! file, then the built-in default.

pub mod anticonc;
pub mod esd;
pub mod limit;
pub mod lsv;
pub mod svg;

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, LabError, Result};

pub use anticonc::AnticoncConfig;
pub use esd::EsdConfig;
pub use limit::LimitConfig;
pub use lsv::LsvConfig;

pub const SCHEMA_VERSION: u32 = 1;
pub const JOBS_ENV: &str = "ELLIPTIC_LAB_JOBS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Esd,
    Lsv,
    Limit,
    Anticonc,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Esd => "esd",
            Self::Lsv => "lsv",
            Self::Limit => "limit",
            Self::Anticonc => "anticonc",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum Experiment {
    Esd(EsdConfig),
    Lsv(LsvConfig),
    Limit(LimitConfig),
    Anticonc(AnticoncConfig),
}

impl Experiment {
    pub fn command(&self) -> Command {
        match self {
            Self::Esd(_) => Command::Esd,
            Self::Lsv(_) => Command::Lsv,
            Self::Limit(_) => Command::Limit,
            Self::Anticonc(_) => Command::Anticonc,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Trial count; its meaning depends on the command (seeds per sweep point
    /// for esd, Monte Carlo trials elsewhere).
    #[serde(default)]
    pub trials: Option<u64>,
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub experiment: Experiment,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        if cfg.schema_version != SCHEMA_VERSION {
            return invalid(format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", cfg.schema_version));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Settings given on the command line.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resolved {
    pub seed: u64,
    pub trials: Option<u64>,
    pub jobs: usize,
    pub output_dir: PathBuf,
}

/// Applies the documented precedence. `env_jobs` is the raw value of
/// ELLIPTIC_LAB_JOBS, if set.
pub fn resolve(cfg: &ExperimentConfig, o: &Overrides, env_jobs: Option<&str>) -> Result<Resolved> {
    let seed = o
        .seed
        .or(cfg.seed)
        .ok_or_else(|| LabError::Validation("a seed is required (config field or --seed)".into()))?;
    let env = match env_jobs {
        Some(s) => Some(
            s.trim()
                .parse::<usize>()
                .map_err(|_| LabError::Validation(format!("{JOBS_ENV}={s} is not a positive integer")))?,
        ),
        None => None,
    };
    let jobs = o.jobs.or(env).or(cfg.jobs).unwrap_or(1);
    if jobs == 0 {
        return invalid("jobs must be at least 1");
    }
    let trials = o.trials.or(cfg.trials);
    if trials == Some(0) {
        return invalid("trials must be at least 1");
    }
    let output_dir = o.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    Ok(Resolved { seed, trials, jobs, output_dir })
}

pub(crate) fn nonempty<T>(name: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        return invalid(format!("sweep list `{name}` is empty"));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    /// "<=" or ">=".
    pub relation: String,
    pub passed: bool,
}

impl Assertion {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, relation: "<=".into(), passed: value <= bound }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, relation: ">=".into(), passed: value >= bound }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub name: String,
    /// "ok" or the error that stopped the run.
    pub status: String,
    pub assertions: Vec<Assertion>,
    pub metrics: serde_json::Map<String, serde_json::Value>,
    pub wall_seconds: f64,
}

impl RunRecord {
    pub fn passed(&self) -> bool {
        self.status == "ok" && self.assertions.iter().all(|a| a.passed)
    }
}

/// Work in progress for one run.
#[derive(Default)]
pub(crate) struct Run {
    pub assertions: Vec<Assertion>,
    pub metrics: serde_json::Map<String, serde_json::Value>,
}

impl Run {
    pub fn metric(&mut self, key: &str, value: impl Serialize) {
        self.metrics.insert(key.to_string(), serde_json::to_value(value).unwrap_or(serde_json::Value::Null));
    }

    pub fn check(&mut self, a: Assertion) {
        self.assertions.push(a);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultManifest {
    pub schema_version: u32,
    pub artifact_version: String,
    pub command: Command,
    pub config_hash: String,
    pub seed: u64,
    pub jobs: usize,
    pub runs: Vec<RunRecord>,
    pub files: Vec<FileRecord>,
    pub passed: bool,
    pub wall_seconds: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects output files and their checksums.
pub(crate) struct Outputs {
    dir: PathBuf,
    files: Vec<FileRecord>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        std::fs::write(self.dir.join(name), bytes)?;
        self.files.push(FileRecord { path: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
        Ok(())
    }
}

/// Builds a CSV in memory: header plus rows of displayable cells.
pub(crate) struct Csv(String);

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self(format!("{}\n", header.join(",")))
    }

    pub fn row(&mut self, cells: &[&dyn Display]) {
        let line: Vec<String> = cells.iter().map(|c| c.to_string()).collect();
        self.0.push_str(&line.join(","));
        self.0.push('\n');
    }

    pub fn bytes(&self) -> &[u8] {
        self.0.as_bytes()
    }
}

/// Context handed to the command runners.
pub(crate) struct Ctx<'a> {
    pub seed: u64,
    pub trials: Option<u64>,
    pub out: &'a mut Outputs,
}

impl Ctx<'_> {
    pub fn trials_or(&self, default: u64) -> u64 {
        self.trials.unwrap_or(default)
    }
}

/// Executes one named run, turning errors into a failed record.
pub(crate) fn execute(name: impl Into<String>, f: impl FnOnce(&mut Run) -> Result<()>) -> RunRecord {
    let start = Instant::now();
    let mut run = Run::default();
    let status = match f(&mut run) {
        Ok(()) => "ok".to_string(),
        Err(e) => format!("error: {e}"),
    };
    RunRecord {
        name: name.into(),
        status,
        assertions: run.assertions,
        metrics: run.metrics,
        wall_seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn validate(cfg: &ExperimentConfig) -> Result<()> {
    match &cfg.experiment {
        Experiment::Esd(c) => c.validate(),
        Experiment::Lsv(c) => c.validate(),
        Experiment::Limit(c) => c.validate(),
        Experiment::Anticonc(c) => c.validate(),
    }
}

/// Runs the experiment and writes all outputs plus `manifest.json`.
pub fn run(command: Command, cfg: &ExperimentConfig, o: &Overrides, env_jobs: Option<&str>) -> Result<ResultManifest> {
    if cfg.experiment.command() != command {
        return invalid(format!(
            "config describes a `{}` experiment, not `{}`",
            cfg.experiment.command().name(),
            command.name()
        ));
    }
    validate(cfg)?;
    let r = resolve(cfg, o, env_jobs)?;
    let start = Instant::now();
    let mut effective = cfg.clone();
    effective.seed = Some(r.seed);
    effective.trials = r.trials;
    effective.jobs = None;
    effective.output_dir = None;
    let config_hash = sha256_hex(serde_json::to_string(&effective)?.as_bytes());

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(r.jobs)
        .build()
        .map_err(|e| LabError::Validation(format!("cannot start worker pool: {e}")))?;
    let mut out = Outputs::new(&r.output_dir)?;
    let runs = {
        let mut ctx = Ctx { seed: r.seed, trials: r.trials, out: &mut out };
        pool.install(|| match &cfg.experiment {
            Experiment::Esd(c) => esd::run(c, &mut ctx),
            Experiment::Lsv(c) => lsv::run(c, &mut ctx),
            Experiment::Limit(c) => limit::run(c, &mut ctx),
            Experiment::Anticonc(c) => anticonc::run(c, &mut ctx),
        })?
    };
    let passed = runs.iter().all(RunRecord::passed);
    let manifest = ResultManifest {
        schema_version: SCHEMA_VERSION,
        artifact_version: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
        command,
        config_hash,
        seed: r.seed,
        jobs: r.jobs,
        runs,
        files: out.files,
        passed,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    std::fs::write(out.dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

/// Re-reads every file listed in a manifest and compares checksums.
pub fn verify_manifest(dir: &Path, m: &ResultManifest) -> Result<bool> {
    for f in &m.files {
        let bytes = std::fs::read(dir.join(&f.path))?;
        if sha256_hex(&bytes) != f.sha256 {
            return Ok(false);
        }
    }
    Ok(true)
}
