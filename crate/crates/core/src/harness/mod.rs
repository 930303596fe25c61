//! Sweeps over `(k, r, n, p, host, mode)` grids with per-trial random streams,
//! JSON-lines records with resume, replay, CSV summaries and SVG plots.

mod kv;
mod plot;
mod summary;

use std::collections::{BTreeMap, HashSet};
use std::fs::{File, OpenOptions};
use std::hash::Hasher;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::mpsc;
use std::time::Instant;

use fnv::FnvHasher;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use kv::KvConfig;
pub use plot::{plot, PlotSpec};
pub use summary::{summarize, summarize_records, wilson_interval, WILSON_Z};

use crate::absorbing::{run_pipeline, PipelineConfig, PipelineOutcome, StageBudget};
use crate::counting::{count_labelled_copies, induced_contains_everywhere, overlap_scale};
use crate::error::{invalid, Error, Result};
use crate::exact::{contains_power_hamilton, ExactOutcome};
use crate::hosts::{codegree_host, complete_host, split_host, theorem_codegree_target};
use crate::hypergraph::KGraph;
use crate::power::{is_power_hamilton_cycle, power_path, Parameters};
use crate::prob::{chebyshev_tail, delta_bound, expected_labelled_copies, janson_tail};
use crate::random::{sample_gnp, RngStream};

/// Version string stamped into every record.
pub const ARTIFACT_VERSION: &str = concat!("powercycle ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HostKind {
    Complete,
    Empty,
    Split,
    Codegree,
}

impl std::str::FromStr for HostKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complete" => Ok(HostKind::Complete),
            "empty" => Ok(HostKind::Empty),
            "split" => Ok(HostKind::Split),
            "codegree" => Ok(HostKind::Codegree),
            other => Err(invalid(format!("unknown host kind {other:?}"))),
        }
    }
}

impl HostKind {
    pub fn name(self) -> &'static str {
        match self {
            HostKind::Complete => "complete",
            HostKind::Empty => "empty",
            HostKind::Split => "split",
            HostKind::Codegree => "codegree",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exact,
    Pipeline,
    Count,
    LemmaCheck,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "pipeline" => Ok(Mode::Pipeline),
            "count" => Ok(Mode::Count),
            "lemma-check" => Ok(Mode::LemmaCheck),
            other => Err(invalid(format!("unknown mode {other:?}"))),
        }
    }
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Pipeline => "pipeline",
            Mode::Count => "count",
            Mode::LemmaCheck => "lemma-check",
        }
    }
}

/// Host family and its parameter: `α` of the split host, or the `α` in the
/// codegree target `(1 − c + α) n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HostSpec {
    pub kind: HostKind,
    pub alpha: f64,
}

impl HostSpec {
    pub fn build(&self, k: usize, r: usize, n: usize, rng: &mut RngStream) -> Result<KGraph> {
        match self.kind {
            HostKind::Complete => complete_host(k, n),
            HostKind::Empty => KGraph::empty(k, n),
            HostKind::Split => split_host(k, n, self.alpha),
            HostKind::Codegree => {
                let target = theorem_codegree_target(&Parameters::new(k, r)?, n, self.alpha);
                Ok(codegree_host(k, n, target, rng, 3)?.0)
            }
        }
    }
}

/// Everything needed to rerun one trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialSpec {
    pub k: usize,
    pub r: usize,
    pub n: usize,
    pub p: f64,
    pub host: HostSpec,
    pub mode: Mode,
    pub seed: u64,
    pub trial: u64,
    pub exact_budget: u64,
    pub count_budget: u64,
    /// Order `b` of the counted power path `P_b^{k,r}`.
    pub pattern_b: usize,
    pub gamma: f64,
    pub induced_samples: u64,
    pub pipeline: PipelineConfig,
}

impl TrialSpec {
    /// Canonical text of the grid point and trial index.
    pub fn key(&self) -> String {
        format!(
            "k={};r={};n={};p={:?};host={}:{:?};mode={};trial={}",
            self.k,
            self.r,
            self.n,
            self.p,
            self.host.kind.name(),
            self.host.alpha,
            self.mode.name(),
            self.trial
        )
    }

    /// FNV-1a of the canonical key.
    pub fn stream_id(&self) -> u64 {
        let mut h = FnvHasher::default();
        h.write(self.key().as_bytes());
        h.finish()
    }
}

/// Outcome fields of a trial; replaying a record reproduces them exactly.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub status: String,
    pub stage: Option<String>,
    pub nodes: Option<u64>,
    pub counts: BTreeMap<String, f64>,
    pub error: Option<String>,
}

impl TrialOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self.status.as_str(), "found" | "success")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub version: String,
    pub stream_id: u64,
    pub spec: TrialSpec,
    pub outcome: TrialOutcome,
    pub runtime_ms: u64,
}

fn random_part(spec: &TrialSpec, rng: &mut RngStream) -> Result<KGraph> {
    sample_gnp(spec.k, spec.n, spec.p, rng)
}

fn evaluate(spec: &TrialSpec) -> Result<TrialOutcome> {
    let mut rng = RngStream::new(spec.seed, spec.stream_id());
    let host = spec.host.build(spec.k, spec.r, spec.n, &mut rng)?;
    let mut out = TrialOutcome::default();
    match spec.mode {
        Mode::Exact => {
            let g = host.union(&random_part(spec, &mut rng)?)?;
            let result = contains_power_hamilton(&g, spec.r, spec.exact_budget)?;
            out.nodes = Some(result.nodes());
            out.counts.insert("edges".into(), g.edge_count() as f64);
            out.status = match &result {
                ExactOutcome::Found { order, .. } => {
                    if !is_power_hamilton_cycle(&g, spec.r, order)? {
                        return Err(invalid("exact search certificate failed verification"));
                    }
                    "found"
                }
                ExactOutcome::NotFound { .. } => "not_found",
                ExactOutcome::Timeout { .. } => "timeout",
            }
            .into();
        }
        Mode::Pipeline => {
            let report = run_pipeline(&host, spec.r, spec.p, &spec.pipeline, &mut rng)?;
            for (name, v) in [
                ("absorbing_path_len", report.absorbing_path_len),
                ("reservoir_size", report.reservoir_size),
                ("cover_paths", report.cover_paths),
                ("leftover", report.leftover),
            ] {
                out.counts.insert(name.into(), v as f64);
            }
            match report.outcome {
                PipelineOutcome::Success { .. } => out.status = "success".into(),
                PipelineOutcome::Failure(f) => {
                    out.status = "failure".into();
                    out.stage = Some(f.stage);
                }
            }
        }
        Mode::Count | Mode::LemmaCheck => {
            let g = host.union(&random_part(spec, &mut rng)?)?;
            let pattern = power_path(spec.k, spec.r, spec.pattern_b)?;
            let rep = count_labelled_copies(&pattern, &g, spec.count_budget)?;
            out.nodes = Some(rep.nodes);
            let x = rep.labelled_count as f64;
            out.counts.insert("labelled_count".into(), x);
            out.counts
                .insert("overlapping_pairs".into(), rep.overlapping_pairs as f64);
            out.counts.insert("truncated".into(), rep.truncated as u8 as f64);
            out.status = "ok".into();
            if spec.mode == Mode::LemmaCheck {
                let lambda = expected_labelled_copies(&pattern, spec.n as u64, spec.p)?;
                let delta = delta_bound(&pattern, spec.n as f64, spec.p)?;
                let lam = lambda.to_linear().unwrap_or(f64::MAX);
                out.counts.insert("lambda".into(), lam);
                out.counts.insert("ln_delta_bound".into(), delta.ln());
                out.counts
                    .insert("chebyshev_tail".into(), chebyshev_tail(lambda, delta)?);
                out.counts
                    .insert("janson_tail".into(), janson_tail(lambda, lam / 2.0, delta)?);
                out.counts.insert("x_ge_2lambda".into(), (x >= 2.0 * lam) as u8 as f64);
                out.counts
                    .insert("x_le_half_lambda".into(), (x <= lam / 2.0) as u8 as f64);
                let scale = overlap_scale(pattern.n(), pattern.edge_count(), spec.n as f64, spec.p);
                out.counts.insert(
                    "overlap_exceeds".into(),
                    (rep.overlapping_pairs as f64 > scale) as u8 as f64,
                );
                let s = (spec.gamma * spec.n as f64 - 1e-9).ceil() as usize;
                if s >= pattern.n() {
                    let ind = induced_contains_everywhere(&pattern, &g, spec.gamma, spec.induced_samples, &mut rng)?;
                    out.counts.insert("induced_failures".into(), ind.failures as f64);
                    out.counts.insert("induced_sampled".into(), ind.sampled as f64);
                }
            }
        }
    }
    Ok(out)
}

/// Runs one trial. Library errors become records with status `error`.
pub fn run_trial(spec: &TrialSpec) -> RunRecord {
    let start = Instant::now();
    let outcome = evaluate(spec).unwrap_or_else(|e| TrialOutcome {
        status: "error".into(),
        error: Some(e.to_string()),
        ..TrialOutcome::default()
    });
    RunRecord {
        version: ARTIFACT_VERSION.into(),
        stream_id: spec.stream_id(),
        spec: spec.clone(),
        outcome,
        runtime_ms: start.elapsed().as_millis() as u64,
    }
}

/// Reruns the trial described by a record and returns the fresh outcome.
pub fn replay(record: &RunRecord) -> TrialOutcome {
    run_trial(&record.spec).outcome
}

/// A parsed sweep configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub trials: Vec<TrialSpec>,
    pub workers: usize,
}

const SWEEP_KEYS: &[&str] = &[
    "seed",
    "trials",
    "k",
    "r",
    "n",
    "p",
    "host",
    "mode",
    "split_alpha",
    "codegree_alpha",
    "exact_budget",
    "count_budget",
    "pattern_b",
    "gamma",
    "induced_samples",
    "workers",
];

const PIPELINE_KEYS: &[&str] = &[
    "alpha",
    "epsilon",
    "beta",
    "zeta",
    "gamma",
    "rounds",
    "connector_target",
    "absorber_target",
    "cover_segment_length",
    "selection_q",
    "fill_nodes",
    "restarts",
];

/// Reads a `[pipeline]` section (all keys optional) over the defaults.
pub fn pipeline_config_from(cfg: &KvConfig, section: &str) -> Result<PipelineConfig> {
    cfg.reject_unknown(section, PIPELINE_KEYS)?;
    let d = PipelineConfig::default();
    let pc = PipelineConfig {
        alpha: cfg.get_or(section, "alpha", d.alpha)?,
        epsilon: cfg.get_or(section, "epsilon", d.epsilon)?,
        beta: cfg.get_or(section, "beta", d.beta)?,
        zeta: cfg.get_or(section, "zeta", d.zeta)?,
        gamma: cfg.get_or(section, "gamma", d.gamma)?,
        rounds: cfg.get_or(section, "rounds", d.rounds)?,
        connector_target: cfg.get(section, "connector_target")?,
        absorber_target: cfg.get(section, "absorber_target")?,
        cover_segment_length: cfg.get(section, "cover_segment_length")?,
        selection_q_override: cfg.get(section, "selection_q")?,
        budget: StageBudget {
            fill_nodes: cfg.get_or(section, "fill_nodes", d.budget.fill_nodes)?,
            restarts: cfg.get_or(section, "restarts", d.budget.restarts)?,
        },
    };
    pc.validate()?;
    Ok(pc)
}

impl SweepConfig {
    /// Parses the `[sweep]` and optional `[pipeline]` sections. Grid keys
    /// (`k`, `r`, `n`, `p`, `host`, `mode`) take comma lists; an empty list
    /// gives an empty grid.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg = KvConfig::parse(text)?;
        if !cfg.has_section("sweep") {
            return Err(Error::Parse {
                line: 0,
                message: "missing [sweep] section".into(),
            });
        }
        if let Some(s) = cfg.keys("").first() {
            return Err(invalid(format!("key {s:?} outside any section")));
        }
        cfg.reject_unknown("sweep", SWEEP_KEYS)?;
        let pipeline = pipeline_config_from(&cfg, "pipeline")?;
        let need = |key: &str| Error::Parse {
            line: 0,
            message: format!("[sweep] needs `{key}`"),
        };
        let ks: Vec<usize> = cfg.list("sweep", "k")?.ok_or_else(|| need("k"))?;
        let rs: Vec<usize> = cfg.list("sweep", "r")?.ok_or_else(|| need("r"))?;
        let ns: Vec<usize> = cfg.list("sweep", "n")?.ok_or_else(|| need("n"))?;
        let ps: Vec<f64> = cfg.list("sweep", "p")?.ok_or_else(|| need("p"))?;
        let hosts: Vec<String> = cfg.list("sweep", "host")?.unwrap_or_else(|| vec!["complete".into()]);
        let modes: Vec<String> = cfg.list("sweep", "mode")?.unwrap_or_else(|| vec!["exact".into()]);
        let line_of = |key: &str| cfg.raw("sweep", key).map_or(0, |(_, l)| l);
        let hosts: Vec<HostKind> = hosts
            .iter()
            .map(|h| {
                h.parse().map_err(|e: Error| Error::Parse {
                    line: line_of("host"),
                    message: e.to_string(),
                })
            })
            .collect::<Result<_>>()?;
        let modes: Vec<Mode> = modes
            .iter()
            .map(|m| {
                m.parse().map_err(|e: Error| Error::Parse {
                    line: line_of("mode"),
                    message: e.to_string(),
                })
            })
            .collect::<Result<_>>()?;
        for &p in &ps {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Parse {
                    line: line_of("p"),
                    message: format!("p = {p} outside [0, 1]"),
                });
            }
        }
        let seed: u64 = cfg.get_or("sweep", "seed", 0)?;
        let trials: u64 = cfg.get_or("sweep", "trials", 1)?;
        let split_alpha: f64 = cfg.get_or("sweep", "split_alpha", 0.3)?;
        let codegree_alpha: f64 = cfg.get_or("sweep", "codegree_alpha", 0.1)?;
        let exact_budget: u64 = cfg.get_or("sweep", "exact_budget", crate::exact::DEFAULT_EXACT_BUDGET)?;
        let count_budget: u64 = cfg.get_or("sweep", "count_budget", crate::counting::DEFAULT_COUNT_BUDGET)?;
        let pattern_b: Option<usize> = cfg.get("sweep", "pattern_b")?;
        let gamma: f64 = cfg.get_or("sweep", "gamma", 0.5)?;
        let induced_samples: u64 = cfg.get_or("sweep", "induced_samples", 50)?;
        let workers: usize = cfg.get_or("sweep", "workers", 0)?;
        let mut out = Vec::new();
        for &k in &ks {
            for &r in &rs {
                for &n in &ns {
                    for &p in &ps {
                        for &kind in &hosts {
                            for &mode in &modes {
                                let alpha = match kind {
                                    HostKind::Split => split_alpha,
                                    HostKind::Codegree => codegree_alpha,
                                    _ => 0.0,
                                };
                                for trial in 0..trials {
                                    out.push(TrialSpec {
                                        k,
                                        r,
                                        n,
                                        p,
                                        host: HostSpec { kind, alpha },
                                        mode,
                                        seed,
                                        trial,
                                        exact_budget,
                                        count_budget,
                                        pattern_b: pattern_b.unwrap_or(2 * (k + r - 1)),
                                        gamma,
                                        induced_samples,
                                        pipeline: pipeline.clone(),
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(SweepConfig { trials: out, workers })
    }
}

/// Counts of a finished sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub total: usize,
    pub skipped: usize,
    pub ran: usize,
    pub errored: usize,
}

/// Reads a records file. A final line without a trailing newline, or one
/// that does not parse, is treated as an interrupted write and dropped;
/// any other unparsable line is an error naming its line number. Returns the
/// records and the byte length of the valid prefix.
pub fn read_records(path: &Path) -> Result<(Vec<RunRecord>, u64)> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    let mut records = Vec::new();
    let mut valid = 0u64;
    let mut offset = 0usize;
    let lines: Vec<&str> = text.split_inclusive('\n').collect();
    for (i, line) in lines.iter().enumerate() {
        let last = i + 1 == lines.len();
        offset += line.len();
        let complete = line.ends_with('\n');
        let body = line.trim_end_matches('\n');
        if body.trim().is_empty() {
            if complete {
                valid = offset as u64;
            }
            continue;
        }
        match serde_json::from_str::<RunRecord>(body) {
            Ok(r) if complete => {
                records.push(r);
                valid = offset as u64;
            }
            _ if last => break,
            Ok(_) => unreachable!("only the last line can lack a newline"),
            Err(e) => {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("corrupt record: {e}"),
                })
            }
        }
    }
    Ok((records, valid))
}

/// Runs every trial of `config` whose key is not already in `out`, appending
/// one JSON line per finished trial. Trials run on a worker pool; a single
/// writer serializes the appends.
pub fn run_sweep(config: &SweepConfig, out: &Path) -> Result<SweepSummary> {
    let mut done = HashSet::new();
    if out.exists() {
        let (records, valid) = read_records(out)?;
        OpenOptions::new().write(true).open(out)?.set_len(valid)?;
        done.extend(records.iter().map(|r| r.spec.key()));
    }
    let todo: Vec<&TrialSpec> = config.trials.iter().filter(|t| !done.contains(&t.key())).collect();
    let mut summary = SweepSummary {
        total: config.trials.len(),
        skipped: config.trials.len() - todo.len(),
        ..Default::default()
    };
    let mut file = OpenOptions::new().create(true).append(true).open(out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| invalid(e.to_string()))?;
    let (tx, rx) = mpsc::channel::<RunRecord>();
    let writer = std::thread::spawn(move || -> Result<(usize, usize)> {
        let (mut ran, mut errored) = (0, 0);
        for rec in rx {
            let line = serde_json::to_string(&rec).map_err(|e| invalid(e.to_string()))?;
            file.write_all(line.as_bytes())?;
            file.write_all(b"\n")?;
            file.flush()?;
            ran += 1;
            errored += (rec.outcome.status == "error") as usize;
        }
        Ok((ran, errored))
    });
    pool.install(|| {
        todo.par_iter().for_each_with(tx, |tx, spec| {
            let _ = tx.send(run_trial(spec));
        })
    });
    let (ran, errored) = writer.join().map_err(|_| invalid("record writer panicked"))??;
    summary.ran = ran;
    summary.errored = errored;
    Ok(summary)
}

/// Reads all records from a JSON-lines file, dropping an interrupted final
/// line.
pub fn load_records(path: &Path) -> Result<Vec<RunRecord>> {
    Ok(read_records(path)?.0)
}
