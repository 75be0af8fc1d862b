//! Parameter scans over `(k, alpha)` grids.
//!
//! Every cell is an independent task seeded by `seed::derive(root_seed, i, j)`
//! (`i` the alpha row, `j` the k column), so the table does not depend on the
//! number of threads or on how often a run was interrupted and resumed.
//!
//! # Checkpoint format
//!
//! All integers little-endian:
//!
//! | bytes       | content                                        |
//! |-------------|------------------------------------------------|
//! | 8           | magic `KPSCAN\0\0`                             |
//! | 4           | format version (`u32`, currently 1)            |
//! | 32          | SHA-256 of the spec JSON                       |
//! | 8           | spec JSON length `L` (`u64`)                   |
//! | L           | spec JSON                                      |
//! | 8           | cell count `n` (`u64`)                         |
//! | ceil(n/8)   | completion bitmap, cell `c` at bit `c % 8` of byte `c / 8` |
//! | 8n          | values as `f64`, row-major (alpha rows, k columns) |
//! | 32          | SHA-256 of everything above                    |
//!
//! Files are written to a sibling temporary path and renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::chaos::{
    chaotic_area, default_t_max_list, lyapunov_max_over_seeds, phase_space_similarity,
    rotated_fibonacci_seeds, DEFAULT_D_MIN, DEFAULT_SEED_COUNT, DEFAULT_TRANSIENT,
};
use crate::floquet::{eigensystem, spin_operators, FloquetBuilder, SpinRepresentation};
use crate::quantum::{fit_quantum_lyapunov, otoc_series, spectral_statistics, FitOptions};
use crate::{seed, Error, ModelParams, Result};

pub const CHECKPOINT_MAGIC: [u8; 8] = *b"KPSCAN\0\0";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// Largest Lyapunov exponent, maximum over rotated Fibonacci seeds.
    Lyapunov,
    /// Chaotic area in steradians.
    Area,
    /// Mean phase-portrait similarity.
    Similarity,
    /// Normalized ratio statistic.
    Gamma,
    /// Averaged Floquet-eigenvector IPR.
    Delta,
    /// OTOC growth rate; 0 where no exponential window exists.
    QuantumLyapunov,
}

impl Metric {
    pub fn is_quantum(self) -> bool {
        matches!(self, Metric::Gamma | Metric::Delta | Metric::QuantumLyapunov)
    }
}

/// `count` evenly spaced values from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisRange {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        let range = AxisRange { min, max, count };
        range.validate()?;
        Ok(range)
    }

    pub fn single(value: f64) -> Self {
        AxisRange { min: value, max: value, count: 1 }
    }

    fn validate(&self) -> Result<()> {
        if self.count < 1 || !self.min.is_finite() || !self.max.is_finite() || self.min > self.max {
            return Err(Error::InvalidParameter(format!(
                "bad range {}:{}:{} (need finite min <= max and count >= 1)",
                self.min, self.max, self.count
            )));
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.count == 1 {
            self.min
        } else {
            self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

/// Metric-specific settings; each metric reads only its own fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSettings {
    pub n_steps: usize,
    pub n_transient: usize,
    pub n_seeds: usize,
    pub n_tot: usize,
    pub d_min: f64,
    pub t_max_list: Vec<usize>,
    pub d_alpha: f64,
    pub d_k: f64,
    pub kicks: usize,
    pub n_spins: u32,
    pub otoc_steps: usize,
    pub fit: FitOptions,
}

impl Default for MetricSettings {
    fn default() -> Self {
        MetricSettings {
            n_steps: 10_000,
            n_transient: DEFAULT_TRANSIENT,
            n_seeds: DEFAULT_SEED_COUNT,
            n_tot: 10_000,
            d_min: DEFAULT_D_MIN,
            t_max_list: default_t_max_list(),
            d_alpha: 5e-4,
            d_k: 0.0,
            kicks: 200,
            n_spins: 512,
            otoc_steps: 30,
            fit: FitOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub metric: Metric,
    pub p: u32,
    pub k_range: AxisRange,
    pub alpha_range: AxisRange,
    pub settings: MetricSettings,
    pub root_seed: u64,
}

impl ScanSpec {
    pub fn validate(&self) -> Result<()> {
        ModelParams::new(self.p, self.k_range.min.max(0.0), 0.0)?;
        self.k_range.validate()?;
        self.alpha_range.validate()?;
        if self.k_range.min < 0.0 {
            return Err(Error::InvalidParameter("k range must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.k_range.count * self.alpha_range.count
    }

    /// `(alpha row, k column)` of a row-major cell index.
    pub fn cell_position(&self, cell: usize) -> (usize, usize) {
        (cell / self.k_range.count, cell % self.k_range.count)
    }

    pub fn cell_params(&self, cell: usize) -> Result<ModelParams> {
        let (i, j) = self.cell_position(cell);
        ModelParams::new(self.p, self.k_range.value(j), self.alpha_range.value(i))
    }

    fn json(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("scan spec serializes")
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> [u8; 32] {
        sha256(&self.json())
    }
}

pub(crate) fn sha256(bytes: &[u8]) -> [u8; 32] {
    let mut out = [0u8; 32];
    out.copy_from_slice(Sha256::digest(bytes).as_slice());
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub cell: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    pub spec: ScanSpec,
    /// Row-major, alpha rows by k columns; NaN where incomplete.
    pub values: Vec<f64>,
    pub complete: Vec<bool>,
    /// Failures of the most recent run; failed cells stay incomplete.
    pub failures: Vec<CellFailure>,
}

impl ScanTable {
    pub fn empty(spec: ScanSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.n_cells();
        Ok(ScanTable { spec, values: vec![f64::NAN; n], complete: vec![false; n], failures: Vec::new() })
    }

    pub fn is_complete(&self) -> bool {
        self.complete.iter().all(|&c| c)
    }

    pub fn n_complete(&self) -> usize {
        self.complete.iter().filter(|&&c| c).count()
    }

    /// Value at alpha row `i`, k column `j`.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let cell = i * self.spec.k_range.count + j;
        self.complete[cell].then_some(self.values[cell])
    }
}

/// Shared read-only state for evaluating cells.
struct Evaluator {
    builder: Option<FloquetBuilder>,
}

impl Evaluator {
    fn new(spec: &ScanSpec) -> Result<Self> {
        let builder = if spec.metric.is_quantum() {
            Some(FloquetBuilder::new(SpinRepresentation::new(spec.settings.n_spins)?)?)
        } else {
            None
        };
        Ok(Evaluator { builder })
    }

    fn cell(&self, spec: &ScanSpec, cell: usize) -> Result<f64> {
        let params = spec.cell_params(cell)?;
        let (i, j) = spec.cell_position(cell);
        let cell_seed = seed::derive(spec.root_seed, i as u64, j as u64);
        let s = &spec.settings;
        match spec.metric {
            Metric::Lyapunov => {
                let seeds = rotated_fibonacci_seeds(s.n_seeds, cell_seed);
                Ok(lyapunov_max_over_seeds(&params, &seeds, s.n_steps, s.n_transient)?.value)
            }
            Metric::Area => Ok(chaotic_area(&params, s.n_tot, s.d_min, &s.t_max_list)?.area),
            Metric::Similarity => phase_space_similarity(&params, s.d_alpha, s.d_k, s.n_tot, s.kicks)?
                .mean
                .ok_or_else(|| Error::InvalidParameter("every trajectory has a constant component".into())),
            Metric::Gamma => {
                let builder = self.builder.as_ref().expect("quantum metric has a builder");
                Ok(spectral_statistics(&builder.build(&params), builder.basis())?.gamma)
            }
            Metric::Delta => {
                let builder = self.builder.as_ref().expect("quantum metric has a builder");
                let spectral = eigensystem(&builder.build(&params).matrix)?;
                Ok(crate::quantum::floquet_delta(&spectral, builder.basis()))
            }
            Metric::QuantumLyapunov => {
                let builder = self.builder.as_ref().expect("quantum metric has a builder");
                let jz = spin_operators(builder.basis().rep()).jz;
                let series = otoc_series(&builder.build(&params), &jz, &jz, s.otoc_steps)?;
                Ok(fit_quantum_lyapunov(&series, &s.fit).map_or(0.0, |f| f.lambda_q))
            }
        }
    }
}

/// Controls checkpointing and interruption of [`continue_scan`].
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Checkpoint written after every batch when set.
    pub checkpoint: Option<PathBuf>,
    /// Cells per batch; 0 means a single batch.
    pub batch_size: usize,
    /// Stop after evaluating this many cells (the rest stay incomplete).
    pub cell_budget: Option<usize>,
}

fn thread_pool(parallelism: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot build thread pool: {e}")))
}

/// Evaluates every cell of `spec` with `parallelism` worker threads.
pub fn run_scan(spec: &ScanSpec, parallelism: usize) -> Result<ScanTable> {
    let mut table = ScanTable::empty(spec.clone())?;
    continue_scan(&mut table, parallelism, &RunOptions::default())?;
    Ok(table)
}

/// Evaluates the incomplete cells of `table` in index order.
pub fn continue_scan(table: &mut ScanTable, parallelism: usize, opts: &RunOptions) -> Result<()> {
    let spec = table.spec.clone();
    let evaluator = Evaluator::new(&spec)?;
    let pool = thread_pool(parallelism)?;
    let mut pending: Vec<usize> = (0..spec.n_cells()).filter(|&c| !table.complete[c]).collect();
    if let Some(budget) = opts.cell_budget {
        pending.truncate(budget);
    }
    table.failures.clear();
    let batch = if opts.batch_size == 0 { pending.len().max(1) } else { opts.batch_size };
    for chunk in pending.chunks(batch) {
        let results: Vec<Result<f64>> =
            pool.install(|| chunk.par_iter().map(|&c| evaluator.cell(&spec, c)).collect());
        for (&cell, result) in chunk.iter().zip(results) {
            match result {
                Ok(v) if v.is_finite() => {
                    table.values[cell] = v;
                    table.complete[cell] = true;
                }
                Ok(v) => table.failures.push(CellFailure { cell, message: format!("non-finite value {v}") }),
                Err(e) => table.failures.push(CellFailure { cell, message: e.to_string() }),
            }
        }
        if let Some(path) = &opts.checkpoint {
            checkpoint(table, path)?;
        }
    }
    Ok(())
}

/// Atomically writes `table` to `path`.
pub fn checkpoint(table: &ScanTable, path: &Path) -> Result<()> {
    let spec_json = table.spec.json();
    let n = table.values.len();
    let mut buf = Vec::with_capacity(128 + spec_json.len() + n * 9);
    buf.extend_from_slice(&CHECKPOINT_MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    buf.extend_from_slice(&sha256(&spec_json));
    buf.extend_from_slice(&(spec_json.len() as u64).to_le_bytes());
    buf.extend_from_slice(&spec_json);
    buf.extend_from_slice(&(n as u64).to_le_bytes());
    let mut bitmap = vec![0u8; n.div_ceil(8)];
    for (c, _) in table.complete.iter().enumerate().filter(|(_, &done)| done) {
        bitmap[c / 8] |= 1 << (c % 8);
    }
    buf.extend_from_slice(&bitmap);
    for v in &table.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let checksum = sha256(&buf);
    buf.extend_from_slice(&checksum);
    write_atomic(path, &buf)
}

/// Writes through a `.tmp` sibling and renames, so readers never see a
/// partial file.
pub(crate) fn write_atomic(path: &Path, buf: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(buf)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub(crate) struct Reader<'a> {
    pub(crate) bytes: &'a [u8],
    pub(crate) pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Corrupt(format!("truncated while reading {what}")))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    pub(crate) fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    pub(crate) fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }

    pub(crate) fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }
}

/// Reads a checkpoint written by [`checkpoint`].
pub fn resume(path: &Path) -> Result<ScanTable> {
    let bytes = fs::read(path)?;
    let mut r = Reader { bytes: &bytes, pos: 0 };
    if r.take(8, "magic")? != CHECKPOINT_MAGIC {
        return Err(Error::Corrupt("not a scan checkpoint (bad magic)".into()));
    }
    let version = r.u32("version")?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::VersionMismatch { found: version, expected: CHECKPOINT_VERSION });
    }
    if bytes.len() < 32 + r.pos {
        return Err(Error::Corrupt("truncated file".into()));
    }
    let (body, stored) = bytes.split_at(bytes.len() - 32);
    if sha256(body) != stored {
        return Err(Error::Corrupt("checksum mismatch".into()));
    }
    let mut r = Reader { bytes: body, pos: r.pos };
    let digest: [u8; 32] = r.take(32, "spec digest")?.try_into().expect("32 bytes");
    let len = r.u64("spec length")? as usize;
    let spec_json = r.take(len, "spec")?;
    if sha256(spec_json) != digest {
        return Err(Error::Corrupt("spec digest mismatch".into()));
    }
    let spec: ScanSpec = serde_json::from_slice(spec_json)
        .map_err(|e| Error::Corrupt(format!("unreadable spec: {e}")))?;
    let n = r.u64("cell count")? as usize;
    if n != spec.n_cells() {
        return Err(Error::Corrupt(format!("cell count {n} does not match the spec")));
    }
    let bitmap = r.take(n.div_ceil(8), "bitmap")?;
    let complete: Vec<bool> = (0..n).map(|c| bitmap[c / 8] >> (c % 8) & 1 == 1).collect();
    let values: Vec<f64> = r
        .take(8 * n, "values")?
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
        .collect();
    if r.pos != body.len() {
        return Err(Error::Corrupt("trailing bytes".into()));
    }
    Ok(ScanTable { spec, values, complete, failures: Vec::new() })
}

/// [`resume`], additionally requiring the stored spec to equal `expected`.
pub fn resume_matching(path: &Path, expected: &ScanSpec) -> Result<ScanTable> {
    let table = resume(path)?;
    if table.spec.digest() != expected.digest() {
        return Err(Error::SpecMismatch);
    }
    Ok(table)
}
