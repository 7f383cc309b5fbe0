//! The end-to-end commands behind the CLI: each writes its outputs under one
//! directory together with a `manifest.json` describing the run.
//!
//! Outputs are a pure function of the command, the resolved configuration,
//! the seed and the input file contents, so reruns are byte-identical. The
//! run id (a hash of exactly those inputs) is stamped into every CSV as a
//! leading `# gaitkit run <id>` line and into every JSON file as `"run"`.
//! Wall-clock timings are written to `timings.json` only on request.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ToolkitConfig;
use crate::export;
use crate::imu_io::{parse_trial, write_trial_csv, AccUnit, GyroUnit, ImuTrial, Sidecar};
use crate::ml::{evaluate, importance_table, ClassificationReport};
use crate::pipeline::{analyze_trial, group_features, labelled, TrialFeatures};
use crate::stats::{compare_groups, radar};
use crate::synth::generate_population;
use crate::{Error, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: ToolkitConfig,
    /// Recorded in the manifest as given.
    pub config_path: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Worker threads for per-trial work; does not affect outputs.
    pub jobs: usize,
    pub timings: bool,
}

impl RunOptions {
    pub fn new(config: ToolkitConfig, out_dir: impl Into<PathBuf>) -> Self {
        Self { config, config_path: None, out_dir: out_dir.into(), jobs: 1, timings: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub run_id: String,
    pub seed: u64,
    pub config_path: Option<String>,
    pub config_sha256: String,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    /// Names of the stages the command ran, in order.
    pub stages: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub manifest: RunManifest,
    pub timings: Vec<StageTiming>,
    pub features: Vec<TrialFeatures>,
    pub classification: Vec<ClassificationReport>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Maps `f` over `items` on up to `jobs` threads, keeping input order.
pub fn par_map<T: Sync, U: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> U + Sync) -> Vec<U> {
    let jobs = jobs.clamp(1, items.len().max(1));
    if jobs == 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<U>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let out = f(&items[i]);
                slots.lock().expect("worker panicked")[i] = Some(out);
            });
        }
    });
    slots.into_inner().expect("worker panicked").into_iter().map(|o| o.expect("every slot filled")).collect()
}

/// Output directory bookkeeping: stamps, hashes and records every file.
struct Outputs {
    dir: PathBuf,
    run_id: String,
    files: Vec<FileDigest>,
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize + ?Sized> {
    run: &'a str,
    data: &'a T,
}

impl Outputs {
    fn stamp(&self) -> String {
        format!("gaitkit run {}", self.run_id)
    }

    fn put(&mut self, rel: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes)?;
        self.files.push(FileDigest { path: rel.to_string(), sha256: sha256_hex(bytes) });
        Ok(path)
    }

    fn csv(&mut self, rel: &str, write: impl FnOnce(&mut Vec<u8>, Option<&str>) -> Result<()>) -> Result<PathBuf> {
        let mut buf = Vec::new();
        write(&mut buf, Some(&self.stamp()))?;
        self.put(rel, &buf)
    }

    fn json<T: Serialize + ?Sized>(&mut self, rel: &str, value: &T) -> Result<PathBuf> {
        let mut buf = Vec::new();
        export::write_json(&mut buf, &Stamped { run: &self.run_id, data: value })?;
        self.put(rel, &buf)
    }
}

struct Run {
    opts: RunOptions,
    command: String,
    inputs: Vec<FileDigest>,
    out: Outputs,
    stages: Vec<String>,
    timings: Vec<StageTiming>,
}

impl Run {
    fn start(opts: RunOptions, command: &str, input_paths: &[PathBuf]) -> Result<Self> {
        opts.config.validate()?;
        let mut inputs = Vec::with_capacity(input_paths.len());
        for p in input_paths {
            let bytes = fs::read(p).map_err(|e| Error::Config(format!("cannot read input {}: {e}", p.display())))?;
            inputs.push(FileDigest { path: p.display().to_string(), sha256: sha256_hex(&bytes) });
        }
        let config_text = opts.config.to_toml();
        let mut h = Sha256::new();
        for part in ["gaitkit", TOOL_VERSION, command, &config_text] {
            h.update(part.as_bytes());
            h.update([0]);
        }
        for d in &inputs {
            h.update(d.sha256.as_bytes());
        }
        let run_id = hex::encode(h.finalize())[..16].to_string();
        fs::create_dir_all(&opts.out_dir)?;
        let out = Outputs { dir: opts.out_dir.clone(), run_id, files: Vec::new() };
        Ok(Self { opts, command: command.to_string(), inputs, out, stages: Vec::new(), timings: Vec::new() })
    }

    fn stage<T>(&mut self, name: &'static str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let t0 = Instant::now();
        let value = f(self).map_err(|e| e.in_stage(name))?;
        self.stages.push(name.to_string());
        self.timings.push(StageTiming { stage: name.to_string(), seconds: t0.elapsed().as_secs_f64() });
        Ok(value)
    }

    fn finish(mut self, features: Vec<TrialFeatures>, classification: Vec<ClassificationReport>) -> Result<RunSummary> {
        let cfg = &self.opts.config;
        let manifest = RunManifest {
            tool: "gaitkit".into(),
            version: TOOL_VERSION.into(),
            command: self.command.clone(),
            run_id: self.out.run_id.clone(),
            seed: cfg.seed,
            config_path: self.opts.config_path.as_ref().map(|p| p.display().to_string()),
            config_sha256: sha256_hex(cfg.to_toml().as_bytes()),
            inputs: self.inputs.clone(),
            outputs: self.out.files.clone(),
            stages: self.stages.clone(),
        };
        let mut buf = Vec::new();
        export::write_json(&mut buf, &manifest)?;
        fs::write(self.out.dir.join("manifest.json"), buf)?;
        if self.opts.timings {
            let mut buf = Vec::new();
            export::write_json(&mut buf, &self.timings)?;
            fs::write(self.out.dir.join("timings.json"), buf)?;
        }
        Ok(RunSummary { manifest, timings: std::mem::take(&mut self.timings), features, classification })
    }

    fn synth(&mut self) -> Result<Vec<(String, ImuTrial)>> {
        self.stage("synth", |run| {
            let cfg = &run.opts.config;
            let pop = generate_population(&cfg.synth, cfg.seed)?;
            let generated = par_map(&pop.trials, run.opts.jobs, |p| p.generate(pop.duration_s));
            let mut trials = Vec::with_capacity(generated.len());
            for (plan, g) in pop.trials.iter().zip(generated) {
                let (trial, truth) = g?;
                let stem = plan.file_stem();
                run.out.csv(&format!("trials/{stem}.csv"), |w, c| write_trial_csv(w, &trial, c))?;
                let meta = Sidecar::render(&trial.meta, AccUnit::MetersPerSecondSquared, GyroUnit::RadPerSec);
                let stamped = format!("# {}\n{meta}", run.out.stamp());
                run.out.put(&format!("trials/{stem}.meta"), stamped.as_bytes())?;
                let t = trial.times();
                run.out
                    .csv(&format!("truth/{stem}.truth.csv"), |w, c| export::write_truth_csv(w, &t, &truth.euler, c))?;
                run.out
                    .csv(&format!("truth/{stem}.events.csv"), |w, c| export::write_events_csv(w, &truth.events, c))?;
                trials.push((stem, trial));
            }
            run.out.json("population.json", &pop)?;
            Ok(trials)
        })
    }

    fn analyze(&mut self, trials: &[(String, ImuTrial)]) -> Result<Vec<TrialFeatures>> {
        self.stage("analyze", |run| {
            let cfg = run.opts.config.analysis();
            let results = par_map(trials, run.opts.jobs, |(name, trial)| {
                analyze_trial(trial, &cfg).map_err(|e| Error::Trial { name: name.clone(), source: Box::new(e) })
            });
            let mut rows = Vec::with_capacity(trials.len());
            for ((name, trial), r) in trials.iter().zip(results) {
                let a = r?;
                run.out
                    .csv(&format!("analysis/{name}.attitude.csv"), |w, c| export::write_attitude_csv(w, &a.euler, c))?;
                run.out
                    .csv(&format!("analysis/{name}.events.csv"), |w, c| export::write_events_csv(w, &a.events, c))?;
                rows.push(TrialFeatures {
                    subject_id: trial.meta.subject_id.clone(),
                    leg: trial.meta.leg,
                    group: trial.meta.group,
                    features: a.features,
                });
            }
            let path = run.out.csv("features.csv", |w, c| export::write_features_csv(w, &rows, c))?;
            // the table must read back to exactly what was analysed
            if export::read_features_csv(fs::File::open(&path)?)? != rows {
                return Err(Error::Validation("features.csv does not read back identically".into()));
            }
            run.out.json("features.json", &rows)?;
            Ok(rows)
        })
    }

    fn stats(&mut self, rows: &[TrialFeatures]) -> Result<()> {
        self.stage("stats", |run| {
            let cfg = &run.opts.config.stats;
            let grouped = group_features(rows);
            let report = compare_groups(&grouped, cfg)?;
            run.out.csv("stats.csv", |w, c| export::write_stats_csv(w, &report, c))?;
            run.out.json("stats.json", &report)?;
            let groups: Vec<String> =
                cfg.summary_groups.iter().filter(|g| grouped.groups.contains_key(*g)).cloned().collect();
            let baseline = "H";
            if groups.iter().any(|g| g == baseline) {
                let r = radar(&grouped, &groups, baseline)?;
                run.out.csv("radar.csv", |w, c| export::write_radar_csv(w, &r, c))?;
                run.out.json("radar.json", &r)?;
            }
            Ok(())
        })
    }

    fn classify(&mut self, rows: &[TrialFeatures]) -> Result<Vec<ClassificationReport>> {
        self.stage("classify", |run| {
            let ml = run.opts.config.ml_seeded();
            let records = labelled(rows);
            let mut reports = Vec::new();
            for &task in &ml.tasks {
                let ds = task.dataset(&records)?;
                let ranking = importance_table(&ds, &ml)?;
                run.out.csv(&format!("importance_{}.csv", task.as_str()), |w, c| {
                    export::write_importance_csv(w, &ranking, c)
                })?;
                let kinds = ml.classifiers.clone();
                let results = par_map(&kinds, run.opts.jobs, |&kind| evaluate(&ds, kind, task, &ml));
                for r in results {
                    reports.push(r?);
                }
            }
            run.out.csv("classification.csv", |w, c| export::write_classification_csv(w, &reports, c))?;
            run.out.json("classification.json", &reports)?;
            Ok(reports)
        })
    }
}

/// Trial CSVs named by `inputs`: files directly, directories by their
/// `*.csv` entries in name order.
pub fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut entries = Vec::new();
            for e in fs::read_dir(p)? {
                let path = e?.path();
                if path.extension().is_some_and(|x| x == "csv") {
                    entries.push(path);
                }
            }
            entries.sort();
            out.extend(entries);
        } else if p.is_file() {
            out.push(p.clone());
        } else {
            return Err(Error::Config(format!("input {} does not exist", p.display())));
        }
    }
    if out.is_empty() {
        return Err(Error::Config("no input trials".into()));
    }
    Ok(out)
}

fn load_features(path: &Path) -> Result<Vec<TrialFeatures>> {
    let file = fs::File::open(path).map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
    export::read_features_csv(file)
}

/// Generates the synthetic population with ground truth.
pub fn cmd_synth(opts: RunOptions) -> Result<RunSummary> {
    let mut run = Run::start(opts, "synth", &[])?;
    run.synth()?;
    run.finish(Vec::new(), Vec::new())
}

/// Attitude, events and features for trial files.
pub fn cmd_analyze(opts: RunOptions, inputs: &[PathBuf]) -> Result<RunSummary> {
    let files = expand_inputs(inputs)?;
    let mut run = Run::start(opts, "analyze", &files)?;
    let schema = run.opts.config.ingest.clone();
    let trials = run.stage("ingest", |_| {
        files
            .iter()
            .map(|f| {
                let name = f.file_stem().map_or_else(|| f.display().to_string(), |s| s.to_string_lossy().into_owned());
                parse_trial(f, &schema)
                    .map(|t| (name, t))
                    .map_err(|e| Error::Trial { name: f.display().to_string(), source: Box::new(e) })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let rows = run.analyze(&trials)?;
    run.finish(rows, Vec::new())
}

/// Group comparison and radar data from a feature table.
pub fn cmd_stats(opts: RunOptions, features: &Path) -> Result<RunSummary> {
    let mut run = Run::start(opts, "stats", &[features.to_path_buf()])?;
    let rows = load_features(features)?;
    run.stats(&rows)?;
    run.finish(rows, Vec::new())
}

/// Importance ranking and cross-validated classification from a feature table.
pub fn cmd_classify(opts: RunOptions, features: &Path) -> Result<RunSummary> {
    let mut run = Run::start(opts, "classify", &[features.to_path_buf()])?;
    let rows = load_features(features)?;
    let reports = run.classify(&rows)?;
    run.finish(rows, reports)
}

/// Synthetic population through every stage.
pub fn cmd_all(opts: RunOptions) -> Result<RunSummary> {
    let mut run = Run::start(opts, "all", &[])?;
    let trials = run.synth()?;
    let rows = run.analyze(&trials)?;
    run.stats(&rows)?;
    let reports = run.classify(&rows)?;
    run.finish(rows, reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_map_keeps_order() {
        let items: Vec<u64> = (0..57).collect();
        let expect: Vec<u64> = items.iter().map(|x| x * x).collect();
        for jobs in [1, 2, 8, 100] {
            assert_eq!(par_map(&items, jobs, |x| x * x), expect);
        }
        assert!(par_map(&Vec::<u8>::new(), 4, |x| *x).is_empty());
    }

    #[test]
    fn missing_input_is_config_error() {
        assert!(matches!(expand_inputs(&[PathBuf::from("/nonexistent/trial.csv")]), Err(Error::Config(_))));
    }
}
