//! End-to-end enhancement: resize, monogenic analysis, LwPA/LPE, transmission
//! solve, ELEA recovery and MF composition, plus the batch runner.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use log::{debug, info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::EnhanceConfig;
use crate::elea::{
    compute_weights, recover_elea, solve_transmission_traced, DiffFilterBank, TraceEntry,
    TransmissionMap,
};
use crate::error::{Error, Result};
use crate::image::{normalize_minmax, resize_bilinear, GrayImage, MultiChannelImage};
use crate::io::{load_image, save_image};
use crate::manifest::{ClassLabel, Manifest};
use crate::phase::{compute_lpe, compute_lwpa, compute_monogenic, relative_guard};
use crate::spectral::{AssdParams, Boundary, SpectralBank};

/// Feature names, in MF channel order followed by the composite.
pub const FEATURES: [&str; 4] = ["lwpa", "lpe", "elea", "mf"];

type SpectralKey = (usize, usize, [u64; 3], usize);

fn spectral_key(width: usize, height: usize, p: &AssdParams) -> SpectralKey {
    (
        width,
        height,
        [
            p.alpha.to_bits(),
            p.s0.to_bits(),
            p.scale_multiplier.to_bits(),
        ],
        p.num_scales,
    )
}

/// Shared cache of filter banks keyed by working shape (and bandpass
/// parameters). Banks are built once and then only read.
#[derive(Default)]
pub struct BankCache {
    spectral: Mutex<HashMap<SpectralKey, Arc<SpectralBank>>>,
    diff: Mutex<HashMap<(usize, usize), Arc<DiffFilterBank>>>,
}

impl BankCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn spectral(
        &self,
        width: usize,
        height: usize,
        params: &AssdParams,
    ) -> Result<Arc<SpectralBank>> {
        let key = spectral_key(width, height, params);
        let mut map = self.spectral.lock().expect("bank cache poisoned");
        if let Some(bank) = map.get(&key) {
            return Ok(Arc::clone(bank));
        }
        debug!("building spectral bank for {width}x{height}");
        let bank = Arc::new(SpectralBank::new(width, height, *params, Boundary::Mirror)?);
        map.insert(key, Arc::clone(&bank));
        Ok(bank)
    }

    pub fn diff(&self, width: usize, height: usize) -> Result<Arc<DiffFilterBank>> {
        let mut map = self.diff.lock().expect("bank cache poisoned");
        if let Some(bank) = map.get(&(width, height)) {
            return Ok(Arc::clone(bank));
        }
        let bank = Arc::new(DiffFilterBank::new(width, height, Boundary::Mirror)?);
        map.insert((width, height), Arc::clone(&bank));
        Ok(bank)
    }

    /// Pre-builds the banks for a fixed working size.
    pub fn warm(&self, config: &EnhanceConfig) -> Result<()> {
        if config.working_size > 0 {
            let n = config.working_size;
            self.spectral(n, n, &config.assd)?;
            self.diff(n, n)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// All feature maps of one image.
#[derive(Clone, Debug)]
pub struct PhaseFeatures {
    /// Local weighted mean phase angle, radians.
    pub lwpa: GrayImage,
    /// Local phase energy, clamped at zero, unnormalized.
    pub lpe: GrayImage,
    /// Enhanced local energy attenuation image in `[0, 1]`.
    pub elea: GrayImage,
    pub transmission: TransmissionMap,
    /// `[LwPA, LPE, ELEA]`, each min-max normalized.
    pub mf: MultiChannelImage,
    pub solver_iterations: usize,
    pub final_objective: f64,
    pub trace: Vec<TraceEntry>,
    pub timings: Vec<StageTiming>,
}

struct Stopwatch {
    last: Instant,
    timings: Vec<StageTiming>,
}

impl Stopwatch {
    fn new() -> Self {
        Self {
            last: Instant::now(),
            timings: Vec::new(),
        }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.timings.push(StageTiming {
            stage: stage.to_owned(),
            seconds: (now - self.last).as_secs_f64(),
        });
        self.last = now;
    }
}

pub fn enhance_image(
    img: &GrayImage,
    config: &EnhanceConfig,
    cache: &BankCache,
) -> Result<PhaseFeatures> {
    enhance_image_traced(img, config, cache, false)
}

/// As [`enhance_image`], optionally recording the solver's per-iteration
/// objective.
pub fn enhance_image_traced(
    img: &GrayImage,
    config: &EnhanceConfig,
    cache: &BankCache,
    record_trace: bool,
) -> Result<PhaseFeatures> {
    config.validate()?;
    img.ensure_finite()?;
    let mut clock = Stopwatch::new();

    let working = match config.working_size {
        0 => img.clone(),
        n => resize_bilinear(img, n, n)?,
    };
    working.ensure_min_size()?;
    let (w, h) = working.shape();
    clock.lap("resize");

    let bank = cache.spectral(w, h, &config.assd)?;
    let responses = compute_monogenic(&working, &bank)?;
    clock.lap("monogenic");

    let guard = relative_guard(&responses, config.guard)?;
    let lwpa = compute_lwpa(&responses, guard)?;
    let lpe = compute_lpe(&responses, &lwpa)?;
    drop(responses);
    clock.lap("phase");

    let lpe_unit = normalize_minmax(&lpe)?;
    let diff = cache.diff(w, h)?;
    let weights = compute_weights(&lpe_unit, &diff)?;
    clock.lap("weights");

    let solution =
        solve_transmission_traced(&lpe_unit, &diff, &weights, &config.elea, record_trace)?;
    clock.lap("transmission");

    let elea = recover_elea(&lpe_unit, &solution.map, &config.elea)?;
    let mf = MultiChannelImage::new([normalize_minmax(&lwpa)?, lpe_unit, elea.clone()])?;
    clock.lap("elea");

    Ok(PhaseFeatures {
        lwpa,
        lpe,
        elea,
        transmission: solution.map,
        mf,
        solver_iterations: solution.iterations,
        final_objective: solution.final_objective,
        trace: solution.trace,
        timings: clock.timings,
    })
}

/// One line of `runs.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub input: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub label: Option<ClassLabel>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub subject: Option<String>,
    pub status: RunStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub config_digest: String,
    pub config: EnhanceConfig,
    pub stage_seconds: BTreeMap<String, f64>,
    pub outputs: BTreeMap<String, PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub solver_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub final_objective: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Failed,
}

impl RunRecord {
    fn failed(input: &Path, config: &EnhanceConfig, err: &Error) -> Self {
        Self {
            input: input.to_owned(),
            label: None,
            subject: None,
            status: RunStatus::Failed,
            error: Some(err.to_string()),
            config_digest: config.digest(),
            config: *config,
            stage_seconds: BTreeMap::new(),
            outputs: BTreeMap::new(),
            solver_iterations: None,
            final_objective: None,
        }
    }
}

/// Output location `<out>/<feature>/<stem>.png`.
pub fn output_path(output_dir: &Path, feature: &str, stem: &str) -> PathBuf {
    output_dir.join(feature).join(format!("{stem}.png"))
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".to_owned())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Loads, enhances and writes one image; failures come back as `Err`.
fn process_file(
    input: &Path,
    stem: &str,
    config: &EnhanceConfig,
    cache: &BankCache,
    output_dir: &Path,
    record_trace: bool,
) -> Result<RunRecord> {
    let start = Instant::now();
    let img = load_image(input)?;
    let load_seconds = start.elapsed().as_secs_f64();
    let features = enhance_image_traced(&img, config, cache, record_trace)?;

    let save_start = Instant::now();
    let depth = config.output_bit_depth;
    let mut outputs = BTreeMap::new();
    let emit = config.emit;
    for (feature, enabled) in FEATURES
        .iter()
        .zip([emit.lwpa, emit.lpe, emit.elea, emit.mf])
    {
        if !enabled {
            continue;
        }
        let path = output_path(output_dir, feature, stem);
        ensure_dir(path.parent().expect("output path has a parent"))?;
        match *feature {
            "mf" => save_image(&features.mf, &path, depth)?,
            other => {
                let channel = FEATURES
                    .iter()
                    .position(|f| *f == other)
                    .expect("known feature");
                save_image(features.mf.channel(channel), &path, depth)?
            }
        }
        outputs.insert((*feature).to_owned(), path);
    }
    if record_trace {
        let path = output_dir.join("trace").join(format!("{stem}.json"));
        ensure_dir(path.parent().expect("trace path has a parent"))?;
        let json = serde_json::to_vec_pretty(&features.trace).expect("trace serializes");
        fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
        outputs.insert("trace".to_owned(), path);
    }

    let mut stage_seconds = BTreeMap::new();
    stage_seconds.insert("load".to_owned(), load_seconds);
    for t in &features.timings {
        stage_seconds.insert(t.stage.clone(), t.seconds);
    }
    stage_seconds.insert("save".to_owned(), save_start.elapsed().as_secs_f64());

    Ok(RunRecord {
        input: input.to_owned(),
        label: None,
        subject: None,
        status: RunStatus::Ok,
        error: None,
        config_digest: config.digest(),
        config: *config,
        stage_seconds,
        outputs,
        solver_iterations: Some(features.solver_iterations),
        final_objective: Some(features.final_objective),
    })
}

/// Enhances a single file into `output_dir`. Errors are returned inside the
/// record rather than as `Err`.
pub fn enhance_file(
    input: &Path,
    config: &EnhanceConfig,
    cache: &BankCache,
    output_dir: &Path,
    record_trace: bool,
) -> RunRecord {
    let stem = file_stem(input);
    process_file(input, &stem, config, cache, output_dir, record_trace)
        .unwrap_or_else(|e| RunRecord::failed(input, config, &e))
}

#[derive(Clone, Debug)]
pub struct BatchReport {
    pub records: Vec<RunRecord>,
    pub runs_path: PathBuf,
}

impl BatchReport {
    pub fn failures(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.status == RunStatus::Failed)
            .count()
    }

    /// 0 when every entry succeeded, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.failures() == 0 {
            0
        } else {
            1
        }
    }
}

#[derive(Clone, Debug)]
pub struct BatchOptions {
    pub parallelism: usize,
    /// Directory that relative manifest paths are resolved against.
    pub base_dir: PathBuf,
    pub record_trace: bool,
}

impl Default for BatchOptions {
    fn default() -> Self {
        Self {
            parallelism: 1,
            base_dir: PathBuf::from("."),
            record_trace: false,
        }
    }
}

/// Enhances every manifest entry, writing `<out>/<feature>/<stem>.png` and
/// one [`RunRecord`] per entry (in manifest order) to `<out>/runs.jsonl`.
/// Per-entry failures are recorded and do not stop the batch.
pub fn run_batch(
    manifest: &Manifest,
    config: &EnhanceConfig,
    output_dir: &Path,
    options: &BatchOptions,
) -> Result<BatchReport> {
    config.validate()?;
    ensure_dir(output_dir)?;
    let cache = BankCache::new();
    cache.warm(config)?;

    let mut seen = HashSet::new();
    let jobs: Vec<(PathBuf, String, bool)> = manifest
        .entries
        .iter()
        .map(|e| {
            let path = if e.path.is_absolute() {
                e.path.clone()
            } else {
                options.base_dir.join(&e.path)
            };
            let stem = file_stem(&e.path);
            let unique = seen.insert(stem.clone());
            (path, stem, unique)
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.parallelism.max(1))
        .build()
        .map_err(|e| Error::config("parallelism", e.to_string()))?;

    info!(
        "enhancing {} images with parallelism {}",
        jobs.len(),
        options.parallelism.max(1)
    );
    let records: Vec<RunRecord> = pool.install(|| {
        jobs.par_iter()
            .zip(manifest.entries.par_iter())
            .map(|((path, stem, unique), entry)| {
                let result = if *unique {
                    process_file(path, stem, config, &cache, output_dir, options.record_trace)
                } else {
                    Err(Error::config(
                        "path",
                        format!("output name {stem:?} collides with an earlier entry"),
                    ))
                };
                let mut record = result.unwrap_or_else(|e| {
                    warn!("{}: {e}", path.display());
                    RunRecord::failed(path, config, &e)
                });
                record.label = Some(entry.label);
                record.subject = Some(entry.subject.clone());
                record
            })
            .collect()
    });

    let runs_path = output_dir.join("runs.jsonl");
    let mut file = fs::File::create(&runs_path).map_err(|e| Error::io(&runs_path, e))?;
    for r in &records {
        let line = serde_json::to_string(r).expect("record serializes");
        writeln!(file, "{line}").map_err(|e| Error::io(&runs_path, e))?;
    }
    Ok(BatchReport { records, runs_path })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> EnhanceConfig {
        EnhanceConfig {
            working_size: 32,
            ..EnhanceConfig::default()
        }
    }

    #[test]
    fn constant_image_gives_zero_mf() {
        let cache = BankCache::new();
        let f = enhance_image(&GrayImage::filled(40, 40, 0.5), &small_config(), &cache).unwrap();
        for c in f.mf.channels() {
            assert_eq!(c.shape(), (32, 32));
            assert!(c.pixels().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn cached_bank_matches_fresh_bank() {
        let img = GrayImage::from_fn(32, 32, |x, y| ((x * y) % 7) as f64 / 7.0);
        let cache = BankCache::new();
        let a = enhance_image(&img, &small_config(), &cache).unwrap();
        let b = enhance_image(&img, &small_config(), &cache).unwrap();
        let c = enhance_image(&img, &small_config(), &BankCache::new()).unwrap();
        assert_eq!(a.mf, b.mf);
        assert_eq!(a.mf, c.mf);
    }

    #[test]
    fn native_resolution_below_minimum_fails() {
        let config = EnhanceConfig {
            working_size: 0,
            ..EnhanceConfig::default()
        };
        let err = enhance_image(&GrayImage::filled(7, 20, 0.1), &config, &BankCache::new());
        assert!(matches!(err, Err(Error::TooSmall { .. })));
    }
}
