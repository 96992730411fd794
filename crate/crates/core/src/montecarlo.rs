//! Trial-level simulation of block outage and mean SNR.
//!
//! Trials run in batches of [`BATCH_TRIALS`]; batch `k` draws from substream
//! `k` of the seed, so serial and parallel runs (and nested trial counts)
//! see the same channel realisations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::PowerAllocation;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sysmodel::{snr_end_to_end, ChannelDraw, ChannelSampler, SapCodec, SystemParams};

pub const BATCH_TRIALS: u64 = 10_000;
/// Two-sided 99% standard-normal quantile.
pub const Z99: f64 = 2.575_829_303_548_900_4;
/// Below this many observed outages the Wilson interval replaces the normal one.
const WILSON_BELOW: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SapMode {
    /// Always the first pattern of the codec.
    FixedSap,
    /// A uniformly drawn pattern index per block.
    RandomSap,
}

/// Monte Carlo outage probability with its sampling uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageEstimate<F> {
    pub p_hat: F,
    pub outages: u64,
    pub trials: u64,
    /// `sqrt(p̂(1 − p̂)/trials)`.
    pub std_err: F,
    pub ci99_low: F,
    pub ci99_high: F,
    pub seed: u64,
}

impl<F: Scalar> OutageEstimate<F> {
    pub fn from_counts(outages: u64, trials: u64, seed: u64) -> Self {
        let n = trials as f64;
        let p = outages as f64 / n;
        let std_err = (p * (1.0 - p) / n).sqrt();
        let (lo, hi) = if (outages as f64) < WILSON_BELOW {
            let z2 = Z99 * Z99;
            let denom = 1.0 + z2 / n;
            let centre = (p + z2 / (2.0 * n)) / denom;
            let half = Z99 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
            (centre - half, centre + half)
        } else {
            (p - Z99 * std_err, p + Z99 * std_err)
        };
        OutageEstimate {
            p_hat: F::lit(p),
            outages,
            trials,
            std_err: F::lit(std_err),
            ci99_low: F::lit(lo.max(0.0)),
            ci99_high: F::lit(hi.min(1.0)),
            seed,
        }
    }

    /// Whether the two 99% intervals intersect.
    pub fn overlaps(&self, other: &Self) -> bool {
        self.ci99_low <= other.ci99_high && other.ci99_low <= self.ci99_high
    }
}

fn batches(trials: u64) -> impl ParallelIterator<Item = (u64, u64)> {
    let count = trials.div_ceil(BATCH_TRIALS);
    (0..count)
        .into_par_iter()
        .map(move |b| (b, BATCH_TRIALS.min(trials - b * BATCH_TRIALS)))
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        Err(Error::param("trials", "must be >= 1"))
    } else {
        Ok(())
    }
}

/// Fraction of blocks in which some active subcarrier has SNR below `s`.
pub fn estimate_outage<F: Scalar>(
    params: &SystemParams<F>,
    alloc: &PowerAllocation<F>,
    s: F,
    trials: u64,
    seed: u64,
    mode: SapMode,
) -> Result<OutageEstimate<F>> {
    params.validate()?;
    check_trials(trials)?;
    let codec = SapCodec::for_params(params)?;
    let fixed = codec.encode(0)?;

    let outages: u64 = batches(trials)
        .map(|(batch, n)| {
            let mut sampler = ChannelSampler::new(params, seed, batch);
            let mut draw = ChannelDraw {
                g1: Vec::with_capacity(params.n),
                g2: Vec::with_capacity(params.n),
            };
            let mut random_pattern: Vec<usize>;
            let mut count = 0u64;
            for _ in 0..n {
                sampler.fill(&mut draw);
                let active = match mode {
                    SapMode::FixedSap => &fixed,
                    SapMode::RandomSap => {
                        let idx = sampler.uniform_index(codec.capacity());
                        random_pattern = codec.encode(idx).expect("index below capacity");
                        &random_pattern
                    }
                };
                let outage = active
                    .iter()
                    .any(|&k| snr_end_to_end(params, alloc, draw.g1[k - 1], draw.g2[k - 1]) < s);
                count += outage as u64;
            }
            count
        })
        .sum();
    Ok(OutageEstimate::from_counts(outages, trials, seed))
}

/// Sample mean of the per-subcarrier end-to-end SNR and its standard error.
pub fn estimate_mean_snr<F: Scalar>(
    params: &SystemParams<F>,
    alloc: &PowerAllocation<F>,
    trials: u64,
    seed: u64,
) -> Result<(F, F)> {
    params.validate()?;
    check_trials(trials)?;
    // per batch: (count, mean, sum of squared deviations)
    let parts: Vec<(f64, f64, f64)> = batches(trials)
        .map(|(batch, n)| {
            let mut sampler = ChannelSampler::new(params, seed, batch);
            let (mut mean, mut m2) = (0.0_f64, 0.0_f64);
            for k in 0..n {
                let g1 = sampler.gain_hop1();
                let g2 = sampler.gain_hop2();
                let x = snr_end_to_end(params, alloc, g1, g2).to_f64_lossy();
                let d = x - mean;
                mean += d / (k + 1) as f64;
                m2 += d * (x - mean);
            }
            (n as f64, mean, m2)
        })
        .collect();
    let (n, mean, m2) = parts.into_iter().fold((0.0, 0.0, 0.0), |(na, ma, qa), (nb, mb, qb)| {
        let n = na + nb;
        let d = mb - ma;
        (n, ma + d * nb / n, qa + qb + d * d * na * nb / n)
    });
    let var = if n > 1.0 { m2 / (n - 1.0) } else { 0.0 };
    Ok((F::lit(mean), F::lit((var / n).sqrt())))
}
