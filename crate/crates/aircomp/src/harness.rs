//! Monte Carlo sweeps over i.i.d. Rayleigh channels for two contiguous
//! groups `D₁ = [0, d1)`, `D₂ = [d1, K)`.

use std::collections::BTreeMap;

use aircomp_core::mse::equalized_worst_case;
use aircomp_core::{is_feasible, solve_two_sum, ChannelVector, Instance, TxPolicy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "AIRCOMP_THREADS";

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("d1 + d2 = {0} does not match K = {1}")]
    SizeMismatch(usize, usize),
    #[error("both groups need at least one sensor")]
    EmptyGroup,
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("no SNR points")]
    NoSnr,
    #[error("sigma2 and sigma_h2 must be positive")]
    NonPositiveVariance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub k: usize,
    pub d1: usize,
    pub d2: usize,
    pub snr_db: Vec<f64>,
    pub sigma2: f64,
    pub sigma_h2: f64,
    pub trials: usize,
    pub base_seed: u64,
    /// Reuse the channel draw of trial `t` at every SNR point.
    pub paired: bool,
}

impl SweepConfig {
    pub fn new(d1: usize, d2: usize, snr_db: Vec<f64>) -> Self {
        Self {
            k: d1 + d2,
            d1,
            d2,
            snr_db,
            sigma2: 1.0,
            sigma_h2: 1.0,
            trials: 7500,
            base_seed: 0,
            paired: false,
        }
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.base_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.d1 + self.d2 != self.k {
            return Err(ConfigError::SizeMismatch(self.d1 + self.d2, self.k));
        }
        if self.d1 == 0 || self.d2 == 0 {
            return Err(ConfigError::EmptyGroup);
        }
        if self.trials == 0 {
            return Err(ConfigError::NoTrials);
        }
        if self.snr_db.is_empty() {
            return Err(ConfigError::NoSnr);
        }
        if !(self.sigma2 > 0.0 && self.sigma_h2 > 0.0) {
            return Err(ConfigError::NonPositiveVariance);
        }
        Ok(())
    }

    pub fn power(&self, snr_index: usize) -> f64 {
        self.sigma2 * 10f64.powf(self.snr_db[snr_index] / 10.0)
    }

    fn normalizer(&self) -> f64 {
        self.d1.max(self.d2) as f64
    }

    pub fn trial_seed(&self, snr_index: usize, trial_index: usize) -> u64 {
        let snr_tag = if self.paired { u64::MAX } else { snr_index as u64 };
        mix_seed(self.base_seed, trial_index as u64, snr_tag)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn mix_seed(base: u64, trial: u64, snr: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ trial) ^ snr)
}

/// `K` i.i.d. Rayleigh magnitudes with variance `sigma_h2`.
pub fn sample_channels(k: usize, sigma_h2: f64, seed: u64) -> ChannelVector {
    let scale = (2.0 * sigma_h2 / (4.0 - std::f64::consts::PI)).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = (0..k)
        .map(|_| {
            // (0, 1]: keeps the logarithm finite
            let u = 1.0 - rng.random::<f64>();
            scale * (-2.0 * u.ln()).sqrt()
        })
        .collect();
    ChannelVector::new(h).expect("Rayleigh draws are positive")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub snr_db: f64,
    pub feasible: bool,
    pub p1_star: Option<usize>,
    pub p2_star: Option<usize>,
    pub mse_star: Option<f64>,
    pub mse_fullpower: Option<f64>,
    /// 1 or 2.
    pub weakest_sensor_group: u8,
    pub failure: Option<String>,
}

pub fn run_trial(config: &SweepConfig, snr_index: usize, trial_index: usize) -> TrialRecord {
    let channels = sample_channels(config.k, config.sigma_h2, config.trial_seed(snr_index, trial_index));
    let h = channels.magnitudes();
    let weakest = (0..h.len()).min_by(|&a, &b| h[a].total_cmp(&h[b])).unwrap_or(0);
    let mut rec = TrialRecord {
        trial_index,
        snr_db: config.snr_db[snr_index],
        feasible: false,
        p1_star: None,
        p2_star: None,
        mse_star: None,
        mse_fullpower: None,
        weakest_sensor_group: if weakest < config.d1 { 1 } else { 2 },
        failure: None,
    };
    let instance = match Instance::two_sum(h.to_vec(), config.d1, config.power(snr_index), config.sigma2) {
        Ok(i) => i,
        Err(e) => {
            rec.failure = Some(e.to_string());
            return rec;
        }
    };
    match is_feasible(&instance) {
        Ok(r) => rec.feasible = r.feasible,
        Err(e) => {
            rec.failure = Some(e.to_string());
            return rec;
        }
    }
    if !rec.feasible {
        return rec;
    }
    match solve_two_sum(&instance) {
        Ok(c) => {
            rec.p1_star = Some(c.pair.p1);
            rec.p2_star = Some(c.pair.p2);
            rec.mse_star = Some(c.worst_mse);
            rec.mse_fullpower = equalized_worst_case(&instance, &TxPolicy::full_power(&instance)).ok();
        }
        Err(e) => rec.failure = Some(e.to_string()),
    }
    rec
}

fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0);
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

/// All trials at one SNR point, ordered by trial index.
pub fn run_trials(config: &SweepConfig, snr_index: usize) -> Vec<TrialRecord> {
    with_pool(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|t| run_trial(config, snr_index, t))
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityCount {
    pub snr_db: f64,
    pub feasible_count: usize,
    pub infeasible_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramRow {
    pub snr_db: f64,
    pub p1: usize,
    pub p2: usize,
    pub count: usize,
    /// `count` over the trials with a solution.
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MseRow {
    pub snr_db: f64,
    pub d1: usize,
    pub d2: usize,
    pub solved: usize,
    pub normalized_avg_mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkRow {
    pub snr_db: f64,
    pub solved: usize,
    pub robust: f64,
    pub full_power: f64,
    pub relative_gain: f64,
}

fn solved(records: &[TrialRecord]) -> impl Iterator<Item = &TrialRecord> {
    records.iter().filter(|r| r.mse_star.is_some())
}

pub fn feasibility_sweep(config: &SweepConfig) -> Vec<FeasibilityCount> {
    (0..config.snr_db.len())
        .map(|s| {
            let recs = run_trials(config, s);
            let feasible = recs.iter().filter(|r| r.feasible).count();
            FeasibilityCount {
                snr_db: config.snr_db[s],
                feasible_count: feasible,
                infeasible_count: recs.len() - feasible,
            }
        })
        .collect()
}

pub fn cardinality_histogram(config: &SweepConfig) -> Vec<HistogramRow> {
    let mut rows = Vec::new();
    for s in 0..config.snr_db.len() {
        let recs = run_trials(config, s);
        let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for r in solved(&recs) {
            if let (Some(p1), Some(p2)) = (r.p1_star, r.p2_star) {
                *counts.entry((p1, p2)).or_default() += 1;
            }
        }
        let total: usize = counts.values().sum();
        rows.extend(counts.into_iter().map(|((p1, p2), count)| HistogramRow {
            snr_db: config.snr_db[s],
            p1,
            p2,
            count,
            frequency: count as f64 / total as f64,
        }));
    }
    rows
}

/// Averages over trials in index order; `NaN` when none solved.
fn mean(values: impl Iterator<Item = f64>) -> (usize, f64) {
    let (n, sum) = values.fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
    (n, if n == 0 { f64::NAN } else { sum / n as f64 })
}

pub fn mse_sweep(config: &SweepConfig) -> Vec<MseRow> {
    (0..config.snr_db.len())
        .map(|s| {
            let recs = run_trials(config, s);
            let (n, avg) = mean(solved(&recs).filter_map(|r| r.mse_star));
            MseRow {
                snr_db: config.snr_db[s],
                d1: config.d1,
                d2: config.d2,
                solved: n,
                normalized_avg_mse: avg / config.normalizer(),
            }
        })
        .collect()
}

pub fn benchmark(config: &SweepConfig) -> Vec<BenchmarkRow> {
    (0..config.snr_db.len())
        .map(|s| {
            let recs = run_trials(config, s);
            let both: Vec<(f64, f64)> = solved(&recs)
                .filter_map(|r| Some((r.mse_star?, r.mse_fullpower?)))
                .collect();
            let (n, robust) = mean(both.iter().map(|p| p.0));
            let (_, full) = mean(both.iter().map(|p| p.1));
            let norm = config.normalizer();
            BenchmarkRow {
                snr_db: config.snr_db[s],
                solved: n,
                robust: robust / norm,
                full_power: full / norm,
                relative_gain: (full - robust) / robust,
            }
        })
        .collect()
}
