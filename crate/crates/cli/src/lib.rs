//! Experiment driver: spec files, seed sweeps and the CSV reports.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use slicesim::engine::{
    compute_acceptance, compute_delay_metric, compute_queue_delay, cumulative_profit,
    generate_experiment_trace, generate_network, run_experiment_with, write_events_log, write_windows_csv,
    EngineError, RunOptions, SchemeRegistry, SimulationConfig, WindowRecord,
};
use slicesim::policy::ExplorationRegistry;
use slicesim::slicegen::{write_trace_csv, SliceRequest, SliceType};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid spec:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error("seed {seed} mode {mode}: {source}")]
    Run {
        seed: u64,
        mode: String,
        source: EngineError,
    },
    #[error("writing {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
}

/// One experiment: a simulation config replayed over several seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
    /// Run every registered scheme on each seed's shared trace.
    #[serde(default)]
    pub compare: bool,
    /// Also write a per-request `events.log` for every run.
    #[serde(default)]
    pub events_log: bool,
    #[serde(default)]
    pub simulation: SimulationConfig,
}

impl ExperimentSpec {
    pub fn parse(text: &str, path: &Path) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    /// Modes this spec runs, in output order.
    pub fn modes(&self) -> Vec<String> {
        if self.compare {
            vec!["depsac".into(), "dsara".into()]
        } else {
            vec![self.simulation.mode.clone()]
        }
    }
}

/// Command-line overrides applied on top of a spec.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub mode: Option<String>,
    pub out_dir: Option<PathBuf>,
}

impl Overrides {
    /// A forced mode turns comparison off.
    pub fn apply(&self, spec: &mut ExperimentSpec) {
        if let Some(seed) = self.seed {
            spec.seeds = vec![seed];
        }
        if let Some(mode) = &self.mode {
            spec.simulation.mode = mode.clone();
            spec.compare = false;
        }
        if let Some(dir) = &self.out_dir {
            spec.out_dir = dir.clone();
        }
    }
}

/// Every problem with `spec`; empty means it can run.
pub fn validate(spec: &ExperimentSpec) -> Vec<String> {
    let mut out = Vec::new();
    if spec.seeds.is_empty() {
        out.push("seeds: need at least one seed".into());
    }
    let mut seen = spec.seeds.clone();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != spec.seeds.len() {
        out.push("seeds: duplicate seeds would overwrite each other's outputs".into());
    }
    if spec.out_dir.as_os_str().is_empty() {
        out.push("out_dir: must not be empty".into());
    } else if spec.out_dir.exists() && !spec.out_dir.is_dir() {
        out.push(format!(
            "out_dir: {} exists and is not a directory",
            spec.out_dir.display()
        ));
    }
    let schemes = SchemeRegistry::default();
    let explorers = ExplorationRegistry::default();
    out.extend(spec.simulation.validate(&schemes, &explorers));
    if spec.compare {
        for mode in spec.modes() {
            if schemes.create(&mode).is_none() {
                out.push(format!("compare: scheme {mode:?} is not registered"));
            }
        }
    }
    out
}

/// SHA-256 of the trace in its CSV form.
pub fn trace_checksum(trace: &[SliceRequest]) -> String {
    let mut buf = Vec::new();
    write_trace_csv(trace, &mut buf).expect("writing to memory");
    hex::encode(Sha256::digest(&buf))
}

fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
) -> Result<(), CliError> {
    let wrap = |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(wrap)?;
    }
    let mut w = BufWriter::new(File::create(path).map_err(wrap)?);
    body(&mut w).and_then(|_| w.flush()).map_err(wrap)
}

fn seed_config(spec: &ExperimentSpec, seed: u64) -> SimulationConfig {
    SimulationConfig {
        seed,
        ..spec.simulation.clone()
    }
}

pub fn seed_dir(out_dir: &Path, seed: u64) -> PathBuf {
    out_dir.join(format!("seed_{seed}"))
}

/// Writes each seed's trace and substrate dump. Returns `(seed, checksum)`.
pub fn emit_traces(spec: &ExperimentSpec) -> Result<Vec<(u64, String)>, CliError> {
    let problems = validate(spec);
    if !problems.is_empty() {
        return Err(CliError::Invalid(problems));
    }
    let mut out = Vec::new();
    for &seed in &spec.seeds {
        let config = seed_config(spec, seed);
        let err = |source| CliError::Run {
            seed,
            mode: "trace".into(),
            source,
        };
        let trace = generate_experiment_trace(&config).map_err(err)?;
        let sn = generate_network(&config).map_err(err)?;
        let dir = seed_dir(&spec.out_dir, seed);
        write_file(&dir.join("trace.csv"), |w| {
            write_trace_csv(&trace, w).map_err(io::Error::other)
        })?;
        write_file(&dir.join("substrate_links.txt"), |w| sn.write_edge_list(w))?;
        write_file(&dir.join("substrate_nodes.txt"), |w| sn.write_node_table(w))?;
        out.push((seed, trace_checksum(&trace)));
    }
    Ok(out)
}

/// One finished run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub seed: u64,
    pub mode: String,
    pub trace_checksum: String,
    pub records: Vec<WindowRecord>,
}

#[derive(Debug)]
pub struct RunReport {
    pub runs: Vec<RunResult>,
    /// The first failure, if any. Runs before it are complete on disk.
    pub failure: Option<CliError>,
}

/// Executes every `(seed, mode)` run and writes the reports. Both modes of a
/// seed replay the same trace and substrate.
pub fn run(spec: &ExperimentSpec) -> Result<RunReport, CliError> {
    let problems = validate(spec);
    if !problems.is_empty() {
        return Err(CliError::Invalid(problems));
    }
    let log_path = spec.out_dir.join("run.log");
    let mut log = Vec::new();
    let mut runs = Vec::new();
    let mut failure = None;
    'seeds: for &seed in &spec.seeds {
        let base = seed_config(spec, seed);
        let shared = generate_experiment_trace(&base).and_then(|t| Ok((t, generate_network(&base)?)));
        let (trace, network) = match shared {
            Ok(v) => v,
            Err(source) => {
                failure = Some(CliError::Run {
                    seed,
                    mode: base.mode.clone(),
                    source,
                });
                break;
            }
        };
        for mode in spec.modes() {
            let config = SimulationConfig {
                mode: mode.clone(),
                ..base.clone()
            };
            let result = run_experiment_with(
                &config,
                RunOptions {
                    trace: Some(trace.clone()),
                    network: Some(network.clone()),
                    log_events: spec.events_log,
                    ..RunOptions::default()
                },
            );
            let out = match result {
                Ok(out) => out,
                Err(source) => {
                    failure = Some(CliError::Run { seed, mode, source });
                    break 'seeds;
                }
            };
            let checksum = trace_checksum(&out.trace);
            let dir = seed_dir(&spec.out_dir, seed).join(&mode);
            let written = write_file(&dir.join("windows.csv"), |w| write_windows_csv(&out.records, w))
                .and_then(|_| {
                    write_file(&dir.join("qnet.txt"), |w| {
                        out.simulation.agent().eval_net().save(w)
                    })
                })
                .and_then(|_| {
                    if spec.events_log {
                        write_file(&dir.join("events.log"), |w| write_events_log(&out.events, w))
                    } else {
                        Ok(())
                    }
                });
            if let Err(e) = written {
                failure = Some(e);
                break 'seeds;
            }
            log.push(format!(
                "seed={seed} mode={mode} windows={} requests={} trace_sha256={checksum}",
                out.records.len(),
                out.trace.len()
            ));
            runs.push(RunResult {
                seed,
                mode,
                trace_checksum: checksum,
                records: out.records,
            });
        }
    }
    if let Some(e) = &failure {
        log.push(format!("failed: {e}"));
    }
    write_file(&log_path, |w| {
        log.iter().try_for_each(|line| writeln!(w, "{line}"))
    })?;
    write_file(&spec.out_dir.join("summary.csv"), |w| write_summary(&runs, w))?;
    if spec.compare {
        write_file(&spec.out_dir.join("comparison.csv"), |w| {
            write_comparison(&runs, w)
        })?;
    }
    Ok(RunReport { runs, failure })
}

const FILTERS: [(&str, Option<SliceType>); 4] = [
    ("total", None),
    ("embb", Some(SliceType::Embb)),
    ("urllc", Some(SliceType::Urllc)),
    ("mmtc", Some(SliceType::Mmtc)),
];

/// Per-run aggregate metrics in summary column order. `None` is undefined.
pub fn summary_metrics(records: &[WindowRecord]) -> Vec<(String, Option<f64>)> {
    let mut out = Vec::new();
    for (name, f) in FILTERS {
        out.push((format!("profit_{name}"), Some(cumulative_profit(records, f))));
    }
    for (name, f) in FILTERS {
        out.push((format!("acceptance_{name}"), compute_acceptance(records, f)));
    }
    for (name, f) in FILTERS {
        out.push((format!("delay_{name}"), compute_delay_metric(records, f)));
    }
    for (name, f) in FILTERS {
        out.push((format!("queue_delay_{name}"), compute_queue_delay(records, f)));
    }
    let consumption = if records.is_empty() {
        None
    } else {
        Some(records.iter().map(|r| r.consumption).sum::<f64>() / records.len() as f64)
    };
    out.push(("consumption_mean".into(), consumption));
    out.push(("reward_mean".into(), mean(records.iter().map(|r| r.r))));
    out
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (n, sum) = values.fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
    (n > 0).then(|| sum / n as f64)
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_summary<W: Write>(runs: &[RunResult], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let names: Vec<String> = summary_metrics(&[]).into_iter().map(|(n, _)| n).collect();
    let mut header = vec!["seed".to_string(), "mode".to_string()];
    header.extend(names);
    w.write_record(&header)?;
    for run in runs {
        let mut row = vec![run.seed.to_string(), run.mode.clone()];
        row.extend(summary_metrics(&run.records).into_iter().map(|(_, v)| cell(v)));
        w.write_record(&row)?;
    }
    w.flush()
}

/// DePSAC minus DSARA per seed for every summary metric.
pub fn write_comparison<W: Write>(runs: &[RunResult], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let names: Vec<String> = summary_metrics(&[]).into_iter().map(|(n, _)| n).collect();
    let mut header = vec!["seed".to_string()];
    header.extend(names.iter().map(|n| format!("{n}_delta")));
    w.write_record(&header)?;
    let find = |seed, mode: &str| runs.iter().find(|r| r.seed == seed && r.mode == mode);
    let mut seeds: Vec<u64> = runs.iter().map(|r| r.seed).collect();
    seeds.dedup();
    for seed in seeds {
        let (Some(a), Some(b)) = (find(seed, "depsac"), find(seed, "dsara")) else {
            continue;
        };
        let mut row = vec![seed.to_string()];
        row.extend(
            summary_metrics(&a.records)
                .into_iter()
                .zip(summary_metrics(&b.records))
                .map(|((_, x), (_, y))| cell(x.zip(y).map(|(x, y)| x - y))),
        );
        w.write_record(&row)?;
    }
    w.flush()
}
