//! Seeded experiment sweeps over the benchmark families, their summaries,
//! and the normalization stability profile.

use std::collections::HashMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{estimate_from_radii, NmiValue};
use crate::knn::{compute_knn_radii, Dataset};
use crate::scaling::{normalize, Backend};
use crate::synthetic::{generate_gaussian, generate_student_t, GaussianSpec, StudentTSpec};
use crate::truth::{gaussian_truth, student_t_truth};

/// Correlation used to generate data for a requested `rho >= 1`; the
/// ground truth still uses the requested value (capped NMI of 1).
pub const RHO_GENERATION_CAP: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Gaussian,
    StudentT,
}

impl Family {
    fn tag(self) -> u64 {
        match self {
            Family::Gaussian => 1,
            Family::StudentT => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Overflow,
    UndefinedNmi,
    DuplicatePoints,
}

fn default_n() -> usize {
    10_000
}

fn default_k() -> usize {
    5
}

fn default_repetitions() -> usize {
    10
}

fn default_backends() -> Vec<Backend> {
    vec![Backend::Baseline, Backend::Proposed]
}

/// One sweep. Empty `dims` and grids fall back to the defaults of
/// [`ExperimentConfig::default_dims`] and friends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: Family,
    #[serde(default)]
    pub dims: Vec<usize>,
    #[serde(default)]
    pub rho_grid: Vec<f64>,
    #[serde(default)]
    pub nu_grid: Vec<f64>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_backends")]
    pub backends: Vec<Backend>,
    /// Randomly permute the Y rows of every dataset, destroying the
    /// dependence (the true MI and NMI become 0).
    #[serde(default)]
    pub shuffle_y: bool,
    /// Cells evaluated concurrently; 0 uses every core.
    #[serde(default)]
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn new(family: Family) -> Self {
        ExperimentConfig {
            family,
            dims: Vec::new(),
            rho_grid: Vec::new(),
            nu_grid: Vec::new(),
            n: default_n(),
            k: default_k(),
            repetitions: default_repetitions(),
            base_seed: 0,
            backends: default_backends(),
            shuffle_y: false,
            workers: 0,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Powers of two, 1..512 for Gaussian and 1..32 for Student-t.
    pub fn default_dims(family: Family) -> Vec<usize> {
        let max_exp = match family {
            Family::Gaussian => 9,
            Family::StudentT => 5,
        };
        (0..=max_exp).map(|e| 1usize << e).collect()
    }

    /// 0.0, 0.1, ..., 1.0
    pub fn default_rho_grid() -> Vec<f64> {
        (0..=10).map(|i| i as f64 / 10.0).collect()
    }

    pub fn default_nu_grid() -> Vec<f64> {
        vec![0.125, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0]
    }

    pub fn effective_dims(&self) -> Vec<usize> {
        if self.dims.is_empty() {
            Self::default_dims(self.family)
        } else {
            self.dims.clone()
        }
    }

    /// The distribution parameter swept: rho for Gaussian, nu for Student-t.
    pub fn effective_grid(&self) -> Vec<f64> {
        match self.family {
            Family::Gaussian if self.rho_grid.is_empty() => Self::default_rho_grid(),
            Family::Gaussian => self.rho_grid.clone(),
            Family::StudentT if self.nu_grid.is_empty() => Self::default_nu_grid(),
            Family::StudentT => self.nu_grid.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.effective_dims().contains(&0) {
            return Err(Error::config("dims must be positive"));
        }
        if self.k == 0 || self.k >= self.n {
            return Err(Error::config(format!(
                "need 1 <= k < n (k = {}, n = {})",
                self.k, self.n
            )));
        }
        if self.repetitions == 0 {
            return Err(Error::config("repetitions must be positive"));
        }
        if self.backends.is_empty() {
            return Err(Error::config("at least one backend is required"));
        }
        for (i, b) in self.backends.iter().enumerate() {
            if self.backends[..i].contains(b) {
                return Err(Error::config(format!("backend {b} listed twice")));
            }
        }
        match self.family {
            Family::Gaussian => {
                if let Some(r) = self
                    .effective_grid()
                    .into_iter()
                    .find(|r| !(0.0..=1.0).contains(r))
                {
                    return Err(Error::config(format!("rho = {r} outside [0, 1]")));
                }
                if !self.nu_grid.is_empty() {
                    return Err(Error::config("nu_grid given for a gaussian sweep"));
                }
            }
            Family::StudentT => {
                if let Some(v) = self
                    .effective_grid()
                    .into_iter()
                    .find(|v| !(v.is_finite() && *v > 0.0))
                {
                    return Err(Error::config(format!(
                        "nu = {v} must be finite and positive"
                    )));
                }
                if !self.rho_grid.is_empty() {
                    return Err(Error::config("rho_grid given for a student_t sweep"));
                }
            }
        }
        Ok(())
    }
}

/// One (cell, repetition, backend) outcome. Field order is the CSV column
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub family: Family,
    pub d: usize,
    pub rho: Option<f64>,
    pub nu: Option<f64>,
    pub rho_generated: Option<f64>,
    pub shuffled_y: bool,
    pub repetition: usize,
    pub backend: Backend,
    pub seed: u64,
    pub dataset_checksum: String,
    pub n: usize,
    pub k: usize,
    pub status: Status,
    pub ln_v: Option<f64>,
    pub mi_ksg: Option<f64>,
    pub h_x: Option<f64>,
    pub h_y: Option<f64>,
    pub h_xy: Option<f64>,
    pub mi_from_entropies: Option<f64>,
    pub nmi: Option<f64>,
    pub nmi_true: Option<f64>,
    pub wall_time_ms: f64,
}

/// Column names of [`RunRecord`], in order.
pub const RUN_RECORD_COLUMNS: [&str; 22] = [
    "family",
    "d",
    "rho",
    "nu",
    "rho_generated",
    "shuffled_y",
    "repetition",
    "backend",
    "seed",
    "dataset_checksum",
    "n",
    "k",
    "status",
    "ln_v",
    "mi_ksg",
    "h_x",
    "h_y",
    "h_xy",
    "mi_from_entropies",
    "nmi",
    "nmi_true",
    "wall_time_ms",
];

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one cell: SplitMix64 folded over the base seed and the cell
/// coordinates. Independent of backend, so every backend sees one dataset.
pub fn derive_seed(base_seed: u64, family: Family, d: usize, param: f64, repetition: usize) -> u64 {
    [family.tag(), d as u64, param.to_bits(), repetition as u64]
        .iter()
        .fold(splitmix64(base_seed), |h, &c| splitmix64(h ^ c))
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    d: usize,
    param: f64,
    repetition: usize,
}

fn cells(config: &ExperimentConfig) -> Vec<Cell> {
    let grid = config.effective_grid();
    let mut out = Vec::new();
    for d in config.effective_dims() {
        for &param in &grid {
            for repetition in 0..config.repetitions {
                out.push(Cell {
                    d,
                    param,
                    repetition,
                });
            }
        }
    }
    out
}

fn run_cell(config: &ExperimentConfig, cell: Cell) -> Result<Vec<RunRecord>> {
    let seed = derive_seed(
        config.base_seed,
        config.family,
        cell.d,
        cell.param,
        cell.repetition,
    );
    let (data, rho, nu, rho_generated, truth) = match config.family {
        Family::Gaussian => {
            let generated = cell.param.min(RHO_GENERATION_CAP);
            let spec = GaussianSpec {
                d: cell.d,
                rho: generated,
                n: config.n,
                seed,
            };
            let truth = gaussian_truth(cell.d, cell.param)?;
            (
                generate_gaussian(&spec)?,
                Some(cell.param),
                None,
                Some(generated),
                truth,
            )
        }
        Family::StudentT => {
            let spec = StudentTSpec {
                d: cell.d,
                nu: cell.param,
                n: config.n,
                seed,
            };
            let truth = student_t_truth(cell.d, cell.param, 0.0)?;
            (
                generate_student_t(&spec)?,
                None,
                Some(cell.param),
                None,
                truth,
            )
        }
    };
    let (data, nmi_true) = if config.shuffle_y {
        (shuffle_y(&data, seed)?, Some(0.0))
    } else {
        (data, truth.nmi_true)
    };

    let base = RunRecord {
        family: config.family,
        d: cell.d,
        rho,
        nu,
        rho_generated,
        shuffled_y: config.shuffle_y,
        repetition: cell.repetition,
        backend: Backend::Proposed,
        seed,
        dataset_checksum: data.checksum(),
        n: config.n,
        k: config.k,
        status: Status::Ok,
        ln_v: None,
        mi_ksg: None,
        h_x: None,
        h_y: None,
        h_xy: None,
        mi_from_entropies: None,
        nmi: None,
        nmi_true,
        wall_time_ms: 0.0,
    };

    let start = Instant::now();
    let radii = match compute_knn_radii(&data, config.k) {
        Ok(r) => r,
        Err(Error::DuplicatePoint { .. }) => {
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            return Ok(config
                .backends
                .iter()
                .map(|&backend| RunRecord {
                    backend,
                    status: Status::DuplicatePoints,
                    wall_time_ms: elapsed,
                    ..base.clone()
                })
                .collect());
        }
        Err(e) => return Err(e),
    };
    let radii_ms = start.elapsed().as_secs_f64() * 1e3;

    let mut out = Vec::with_capacity(config.backends.len());
    for &backend in &config.backends {
        let start = Instant::now();
        let outcome = estimate_from_radii(&radii, data.d_x(), data.d_y(), backend);
        let wall_time_ms = radii_ms + start.elapsed().as_secs_f64() * 1e3;
        let record = match outcome {
            Ok(report) if report.all_finite() => {
                let status = match report.nmi {
                    NmiValue::Defined(_) => Status::Ok,
                    NmiValue::Undefined { .. } => Status::UndefinedNmi,
                };
                RunRecord {
                    backend,
                    status,
                    ln_v: Some(report.ln_v),
                    mi_ksg: Some(report.mi_ksg),
                    h_x: Some(report.h_x),
                    h_y: Some(report.h_y),
                    h_xy: Some(report.h_xy),
                    mi_from_entropies: Some(report.mi_from_entropies),
                    nmi: report.nmi.value(),
                    wall_time_ms,
                    ..base.clone()
                }
            }
            Ok(_) | Err(Error::NonFiniteNormalization { .. }) if backend == Backend::Baseline => {
                RunRecord {
                    backend,
                    status: Status::Overflow,
                    wall_time_ms,
                    ..base.clone()
                }
            }
            Ok(report) => {
                return Err(Error::Invariant(format!(
                    "{backend} backend produced non-finite estimates (ln V = {})",
                    report.ln_v
                )))
            }
            Err(Error::NonFiniteNormalization { ln_v, .. }) => {
                return Err(Error::Invariant(format!(
                    "{backend} backend produced ln V = {ln_v}"
                )))
            }
            Err(e) => return Err(e),
        };
        out.push(record);
    }
    Ok(out)
}

fn shuffle_y(data: &Dataset, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha20Rng::seed_from_u64(splitmix64(seed ^ 0x5348_5546_464C_4559));
    let mut perm: Vec<usize> = (0..data.n()).collect();
    perm.shuffle(&mut rng);
    data.with_y_permuted(&perm)
}

/// Runs every (dim, grid point, repetition) cell and every configured
/// backend. Records come back ordered by cell coordinate, then backend in
/// config order, regardless of how cells were scheduled. A baseline
/// overflow is recorded as [`Status::Overflow`] and does not stop the
/// sweep.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let cells = cells(config);
    let run = || -> Result<Vec<RunRecord>> {
        let per_cell: Vec<Vec<RunRecord>> = cells
            .par_iter()
            .map(|&cell| run_cell(config, cell))
            .collect::<Result<_>>()?;
        Ok(per_cell.into_iter().flatten().collect())
    };
    if config.workers == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?
            .install(run)
    }
}

/// Aggregate of one (family, d, parameter, backend) cell over repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub family: Family,
    pub d: usize,
    pub rho: Option<f64>,
    pub nu: Option<f64>,
    pub shuffled_y: bool,
    pub backend: Backend,
    pub n_ok: usize,
    pub mean_nmi: Option<f64>,
    /// Sample standard deviation (divisor n - 1); needs two ok runs.
    pub std_nmi: Option<f64>,
    pub overflow_count: usize,
    pub undefined_nmi_count: usize,
    pub duplicate_points_count: usize,
    pub nmi_true: Option<f64>,
}

type SummaryKey = (Family, usize, Option<u64>, Option<u64>, bool, Backend);

/// Mean and sample standard deviation of NMI over the ok runs of each
/// cell, with per-status failure counts. Cells keep first-appearance order.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut index: HashMap<SummaryKey, usize> = HashMap::new();
    let mut groups: Vec<(SummaryRow, Vec<f64>)> = Vec::new();
    for r in records {
        let key = (
            r.family,
            r.d,
            r.rho.map(f64::to_bits),
            r.nu.map(f64::to_bits),
            r.shuffled_y,
            r.backend,
        );
        let slot = *index.entry(key).or_insert_with(|| {
            groups.push((
                SummaryRow {
                    family: r.family,
                    d: r.d,
                    rho: r.rho,
                    nu: r.nu,
                    shuffled_y: r.shuffled_y,
                    backend: r.backend,
                    n_ok: 0,
                    mean_nmi: None,
                    std_nmi: None,
                    overflow_count: 0,
                    undefined_nmi_count: 0,
                    duplicate_points_count: 0,
                    nmi_true: r.nmi_true,
                },
                Vec::new(),
            ));
            groups.len() - 1
        });
        let (row, values) = &mut groups[slot];
        match r.status {
            Status::Ok => {
                if let Some(v) = r.nmi {
                    values.push(v);
                }
            }
            Status::Overflow => row.overflow_count += 1,
            Status::UndefinedNmi => row.undefined_nmi_count += 1,
            Status::DuplicatePoints => row.duplicate_points_count += 1,
        }
    }
    groups
        .into_iter()
        .map(|(mut row, values)| {
            row.n_ok = values.len();
            if !values.is_empty() {
                let n = values.len() as f64;
                // shifted by the first value, so identical inputs return it exactly
                let pivot = values[0];
                let mean = pivot + values.iter().map(|v| v - pivot).sum::<f64>() / n;
                row.mean_nmi = Some(mean);
                if values.len() > 1 {
                    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
                    row.std_nmi = Some((ss / (n - 1.0)).sqrt());
                }
            }
            row
        })
        .collect()
}

/// `ln V` of one backend at one joint dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub d_joint: usize,
    pub backend: Backend,
    /// Missing when the backend produced a non-finite value.
    pub ln_v: Option<f64>,
    pub finite: bool,
}

/// Evaluates all three backends on fixed radii at every joint dimension.
pub fn stability_profile(epsilon: &[f64], dims: &[usize]) -> Result<Vec<StabilityRow>> {
    let mut rows = Vec::with_capacity(dims.len() * Backend::ALL.len());
    for &d_joint in dims {
        for backend in Backend::ALL {
            let r = normalize(backend, epsilon, d_joint)?;
            rows.push(StabilityRow {
                d_joint,
                backend,
                ln_v: r.finite.then_some(r.ln_v),
                finite: r.finite,
            });
        }
    }
    Ok(rows)
}

/// `n` radii log-uniform on `[lo, hi]`.
pub fn log_uniform_radii(n: usize, lo: f64, hi: f64, seed: u64) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::config(format!("invalid radius range [{lo}, {hi}]")));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n).map(|_| rng.random_range(a..=b).exp()).collect())
}

/// Parses dimension lists like `"1,2,8"` or `"2:4096:2,1000000"`
/// (`start:stop:step`, inclusive).
pub fn parse_dims(spec: &str) -> Result<Vec<usize>> {
    let bad = |s: &str| Error::config(format!("bad dimension list entry '{s}'"));
    let mut dims = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let fields: Vec<&str> = part.split(':').collect();
        let nums: Vec<usize> = fields
            .iter()
            .map(|f| f.trim().parse::<usize>().map_err(|_| bad(part)))
            .collect::<Result<_>>()?;
        match nums.as_slice() {
            [d] => dims.push(*d),
            [start, stop] => dims.extend(*start..=*stop),
            [start, stop, step] if *step > 0 => dims.extend((*start..=*stop).step_by(*step)),
            _ => return Err(bad(part)),
        }
    }
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::config(
            "dimension list must be non-empty and positive",
        ));
    }
    Ok(dims)
}
