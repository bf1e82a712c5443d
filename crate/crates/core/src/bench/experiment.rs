//! Paired HDS vs Sobol differential-evolution trials.
//!
//! Every (function, D, N, trial) cell is run once per initialization method
//! with seed `base_seed + trial`. Results can be persisted to a directory
//! holding `manifest.json` (the configuration and its hash) and
//! `records.csv`, which is appended as trials complete and rewritten in
//! sorted order at the end, so an interrupted run can be resumed.

use std::collections::BTreeSet;
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bench::functions::{BenchmarkFunction, FunctionId};
use crate::de::{differential_evolution, make_init_population, DeConfig, InitMethod};
use crate::error::{config_err, HdsError, Result};

pub const RECORDS_FILE: &str = "records.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const RECORDS_HEADER: [&str; 8] = [
    "method",
    "function",
    "dims",
    "n",
    "trial",
    "final_error",
    "wall_time",
    "evaluations",
];

/// Outcome of one DE run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub method: InitMethod,
    pub function: FunctionId,
    pub dims: usize,
    pub n: usize,
    pub trial: usize,
    /// `f(x_best) - f*`; `inf` when the objective never returned a finite value.
    pub final_error: f64,
    /// Seconds spent generating the population and running DE.
    pub wall_time: f64,
    pub evaluations: usize,
}

/// Identity of a record; also the sort order of results files.
pub type RecordKey = (FunctionId, usize, usize, usize, InitMethod);

impl TrialRecord {
    pub fn key(&self) -> String {
        format!(
            "method={} function={} dims={} n={} trial={}",
            self.method, self.function, self.dims, self.n, self.trial
        )
    }

    pub fn sort_key(&self) -> RecordKey {
        (self.function, self.dims, self.n, self.trial, self.method)
    }

    /// Equality of everything but the wall time.
    pub fn same_outcome(&self, other: &TrialRecord) -> bool {
        self.sort_key() == other.sort_key()
            && self.final_error.to_bits() == other.final_error.to_bits()
            && self.evaluations == other.evaluations
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub functions: Vec<FunctionId>,
    pub dims: Vec<usize>,
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub base_seed: u64,
    pub f_low: f64,
    pub f_high: f64,
    pub cr: f64,
    pub max_iter: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let de = DeConfig::default();
        Self {
            functions: FunctionId::SHIFTED.to_vec(),
            dims: vec![10, 30],
            sizes: vec![64, 1000],
            trials: 15,
            base_seed: 0,
            f_low: de.f_low,
            f_high: de.f_high,
            cr: de.cr,
            max_iter: de.max_iter,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.functions.is_empty() || self.dims.is_empty() || self.sizes.is_empty() {
            return config_err("functions, dims and sizes must be non-empty");
        }
        if self.trials < 2 {
            return config_err("at least 2 trials are required");
        }
        if self.dims.contains(&0) {
            return config_err("dimensions must be positive");
        }
        if let Some(n) = self.sizes.iter().find(|&&n| n < crate::de::MIN_POPULATION) {
            return config_err(format!(
                "population size {n} is below {}",
                crate::de::MIN_POPULATION
            ));
        }
        self.de_config(0, String::new()).validate()
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.base_seed.wrapping_add(trial as u64)
    }

    fn de_config(&self, seed: u64, stream: String) -> DeConfig {
        DeConfig {
            f_low: self.f_low,
            f_high: self.f_high,
            cr: self.cr,
            max_iter: self.max_iter,
            tol: 0.0,
            seed,
            stream,
        }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    /// Every record key of the experiment, in sorted order.
    pub fn keys(&self) -> Vec<RecordKey> {
        let mut keys = BTreeSet::new();
        for &f in &self.functions {
            for &d in &self.dims {
                for &n in &self.sizes {
                    for t in 0..self.trials {
                        for m in InitMethod::ALL {
                            keys.insert((f, d, n, t, m));
                        }
                    }
                }
            }
        }
        keys.into_iter().collect()
    }
}

/// Runs a single DE trial.
pub fn run_trial(
    function: &BenchmarkFunction,
    method: InitMethod,
    n: usize,
    trial: usize,
    config: &ExperimentConfig,
) -> Result<TrialRecord> {
    let seed = config.trial_seed(trial);
    let bounds = function.default_bounds();
    let d = function.dims();
    let stream = format!("de/{}/{d}/{n}/{method}/{trial}", function.id());
    let start = Instant::now();
    let population = make_init_population(method, n, &bounds, seed)?;
    let outcome = differential_evolution(
        |x| function.evaluate(x),
        &bounds,
        &population,
        &config.de_config(seed, stream),
    )?;
    let wall_time = start.elapsed().as_secs_f64();
    let final_error = if outcome.best_value.is_finite() {
        (outcome.best_value - function.optimum()).max(0.0)
    } else {
        f64::INFINITY
    };
    Ok(TrialRecord {
        method,
        function: function.id(),
        dims: d,
        n,
        trial,
        final_error,
        wall_time,
        evaluations: outcome.evaluations,
    })
}

/// Runs the whole experiment in memory and returns the sorted records.
pub fn run_experiment(config: &ExperimentConfig, workers: usize) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let keys = config.keys();
    let mut records = run_keys(config, &keys, workers, |_| Ok(()))?;
    sort_records(&mut records);
    Ok(records)
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    config_hash: String,
    config: ExperimentConfig,
}

/// Runs the experiment with results persisted under `dir`.
///
/// With `resume`, records already present are kept and only missing keys
/// run; a manifest whose hash differs from `config` is a state error. Without
/// it, any previous results in `dir` are replaced.
pub fn run_experiment_in(
    config: &ExperimentConfig,
    dir: &Path,
    resume: bool,
    workers: usize,
) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    fs::create_dir_all(dir)?;
    let records_path = dir.join(RECORDS_FILE);
    let manifest_path = dir.join(MANIFEST_FILE);
    let hash = config.hash();

    let mut done: Vec<TrialRecord> = Vec::new();
    if resume && manifest_path.exists() {
        let manifest: Manifest =
            serde_json::from_reader(File::open(&manifest_path)?).map_err(|e| {
                HdsError::State(format!(
                    "unreadable manifest {}: {e}",
                    manifest_path.display()
                ))
            })?;
        if manifest.config_hash != hash {
            return Err(HdsError::State(format!(
                "existing results in {} were produced with config hash {}, current config hash is {hash}",
                dir.display(),
                manifest.config_hash
            )));
        }
        if records_path.exists() {
            done = read_records_lenient(&records_path)?;
        }
    } else if resume && records_path.exists() {
        return Err(HdsError::State(format!(
            "{} has records but no manifest; cannot verify the configuration",
            dir.display()
        )));
    }

    let wanted: BTreeSet<RecordKey> = config.keys().into_iter().collect();
    let mut seen = BTreeSet::new();
    done.retain(|r| wanted.contains(&r.sort_key()) && seen.insert(r.sort_key()));
    let manifest = Manifest {
        config_hash: hash,
        config: config.clone(),
    };
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    sort_records(&mut done);
    write_records(&done, &records_path)?;

    let missing: Vec<RecordKey> = wanted.into_iter().filter(|k| !seen.contains(k)).collect();
    let file = OpenOptions::new().append(true).open(&records_path)?;
    let writer = Mutex::new(
        csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(file),
    );
    let fresh = run_keys(config, &missing, workers, |r| {
        let mut w = writer.lock().expect("records writer poisoned");
        w.serialize(r)?;
        w.flush()?;
        Ok(())
    })?;
    drop(writer);

    done.extend(fresh);
    sort_records(&mut done);
    write_records(&done, &records_path)?;
    Ok(done)
}

fn run_keys<F>(
    config: &ExperimentConfig,
    keys: &[RecordKey],
    workers: usize,
    on_record: F,
) -> Result<Vec<TrialRecord>>
where
    F: Fn(&TrialRecord) -> Result<()> + Sync,
{
    let mut instances = Vec::new();
    for &f in &config.functions {
        for &d in &config.dims {
            instances.push(BenchmarkFunction::new(f, d)?);
        }
    }
    let instance = |f: FunctionId, d: usize| {
        instances
            .iter()
            .find(|b| b.id() == f && b.dims() == d)
            .expect("instance")
    };

    let cursor = AtomicUsize::new(0);
    let results = Mutex::new(Vec::with_capacity(keys.len()));
    let failure: Mutex<Option<HdsError>> = Mutex::new(None);
    let work = || loop {
        if failure.lock().expect("poisoned").is_some() {
            return;
        }
        let i = cursor.fetch_add(1, Ordering::Relaxed);
        let Some(&(f, d, n, t, m)) = keys.get(i) else {
            return;
        };
        match run_trial(instance(f, d), m, n, t, config).and_then(|r| on_record(&r).map(|_| r)) {
            Ok(r) => results.lock().expect("poisoned").push(r),
            Err(e) => {
                failure.lock().expect("poisoned").get_or_insert(e);
                return;
            }
        }
    };
    let workers = workers.max(1).min(keys.len().max(1));
    if workers == 1 {
        work();
    } else {
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(work);
            }
        });
    }
    if let Some(e) = failure.into_inner().expect("poisoned") {
        return Err(e);
    }
    Ok(results.into_inner().expect("poisoned"))
}

pub fn sort_records(records: &mut [TrialRecord]) {
    records.sort_by_key(|r| r.sort_key());
}

pub fn write_records(records: &[TrialRecord], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_records_to(records, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_records_to<W: Write>(records: &[TrialRecord], writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    w.write_record(RECORDS_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<TrialRecord>> {
    read_records_from(File::open(path)?)
}

pub fn read_records_from<R: Read>(reader: R) -> Result<Vec<TrialRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    check_header(r.headers()?)?;
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

fn check_header(header: &csv::StringRecord) -> Result<()> {
    if header.iter().ne(RECORDS_HEADER) {
        return Err(HdsError::State(format!(
            "unexpected records header: {}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}

/// Reads a records file that may end in a partially written line.
fn read_records_lenient(path: &Path) -> Result<Vec<TrialRecord>> {
    let text = fs::read_to_string(path)?;
    let complete = match text.rfind('\n') {
        Some(i) => &text[..=i],
        None => "",
    };
    if complete.is_empty() {
        return Ok(Vec::new());
    }
    read_records_from(complete.as_bytes())
}

pub fn records_path(dir: &Path) -> PathBuf {
    dir.join(RECORDS_FILE)
}
