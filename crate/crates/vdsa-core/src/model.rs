//! Channel and sensing data model.
//!
//! A channel is described by its true Channel Busy Ratio (CBR), the
//! probability that a sensing sample finds it busy. Sensing outcomes are
//! recorded per iteration in a [`SensingLedger`]; the maximum-likelihood
//! CBR estimate is the ratio of cumulative busy counts to cumulative
//! samples, kept as an exact integer pair so that equality between
//! estimates from different channels is decidable.

use rand::Rng;

use crate::rational::Frac;
use crate::{Error, Result};

/// The set of candidate channels with their true CBR values.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    betas: Vec<f64>,
}

impl ChannelSet {
    /// At least two channels, every CBR in [0, 1].
    pub fn new(betas: Vec<f64>) -> Result<Self> {
        if betas.len() < 2 {
            return Err(Error::TooFewChannels {
                min: 2,
                got: betas.len(),
            });
        }
        for (channel, &value) in betas.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidCbr { channel, value });
            }
        }
        Ok(ChannelSet { betas })
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// Indices attaining the minimum true CBR (the channels worth finding).
    pub fn optimal_set(&self) -> Vec<usize> {
        let min = self.betas.iter().copied().fold(f64::INFINITY, f64::min);
        (0..self.betas.len())
            .filter(|&l| self.betas[l] == min)
            .collect()
    }

    /// Complement of [`ChannelSet::optimal_set`].
    pub fn wrong_set(&self) -> Vec<usize> {
        let min = self.betas.iter().copied().fold(f64::INFINITY, f64::min);
        (0..self.betas.len())
            .filter(|&l| self.betas[l] != min)
            .collect()
    }

    /// `mask[l]` is true iff channel `l` is optimal.
    pub fn optimal_mask(&self) -> Vec<bool> {
        let min = self.betas.iter().copied().fold(f64::INFINITY, f64::min);
        self.betas.iter().map(|&b| b == min).collect()
    }

    /// Draw one iteration of sensing outcomes against the true CBRs.
    pub fn sample(&self, plan: &[u64], rng: &mut impl Rng) -> Result<Vec<u64>> {
        if plan.len() != self.betas.len() {
            return Err(Error::LengthMismatch {
                expected: self.betas.len(),
                got: plan.len(),
            });
        }
        Ok(sample_busy_counts(&self.betas, plan, rng))
    }
}

/// Busy counts `k_l ~ Binomial(plan[l], betas[l])`, one draw per slot.
///
/// Per-iteration budgets are small, so the direct Bernoulli loop is both
/// the simplest and a perfectly adequate sampler; it is reproducible for
/// a given RNG state.
pub fn sample_busy_counts(betas: &[f64], plan: &[u64], rng: &mut impl Rng) -> Vec<u64> {
    debug_assert_eq!(betas.len(), plan.len());
    betas
        .iter()
        .zip(plan)
        .map(|(&beta, &slots)| {
            let mut busy = 0u64;
            for _ in 0..slots {
                if rng.random_bool(beta) {
                    busy += 1;
                }
            }
            busy
        })
        .collect()
}

/// One recorded sensing iteration: per-channel slots and busy outcomes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensingRound {
    busy: Vec<u64>,
    samples: Vec<u64>,
}

impl SensingRound {
    pub fn busy(&self) -> &[u64] {
        &self.busy
    }

    pub fn samples(&self) -> &[u64] {
        &self.samples
    }
}

/// Per-iteration sensing history with cumulative snapshots.
///
/// Invariants: `0 <= k_l <= N_l` per (channel, iteration), every recorded
/// iteration spends exactly the budget `N`, and cumulative counts are
/// non-decreasing (sums of non-negative entries).
#[derive(Debug, Clone)]
pub struct SensingLedger {
    channels: usize,
    budget: u64,
    rounds: Vec<SensingRound>,
    // cumulative (busy, samples) per channel after each round
    cumulative: Vec<(Vec<u64>, Vec<u64>)>,
}

impl SensingLedger {
    pub fn new(channels: usize, budget: u64) -> Self {
        SensingLedger {
            channels,
            budget,
            rounds: Vec::new(),
            cumulative: Vec::new(),
        }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// Number of recorded iterations.
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn round(&self, iteration: usize) -> Option<&SensingRound> {
        self.rounds.get(iteration)
    }

    /// Record one iteration of sensing outcomes.
    pub fn record(&mut self, samples: Vec<u64>, busy: Vec<u64>) -> Result<()> {
        if samples.len() != self.channels || busy.len() != self.channels {
            return Err(Error::LengthMismatch {
                expected: self.channels,
                got: samples.len().max(busy.len()),
            });
        }
        let spent: u64 = samples.iter().sum();
        if spent != self.budget {
            return Err(Error::BudgetMismatch {
                got: spent,
                budget: self.budget,
            });
        }
        for (l, (&k, &n)) in busy.iter().zip(&samples).enumerate() {
            if k > n {
                return Err(Error::ConfigMismatch(format!(
                    "channel {l}: busy count {k} exceeds sample count {n}"
                )));
            }
        }
        let (mut cum_busy, mut cum_samples) = match self.cumulative.last() {
            Some((b, s)) => (b.clone(), s.clone()),
            None => (vec![0; self.channels], vec![0; self.channels]),
        };
        for l in 0..self.channels {
            cum_busy[l] += busy[l];
            cum_samples[l] += samples[l];
        }
        self.cumulative.push((cum_busy, cum_samples));
        self.rounds.push(SensingRound { busy, samples });
        Ok(())
    }

    /// Cumulative (busy, samples) per channel after `iteration`.
    pub fn cumulative(&self, iteration: usize) -> Result<(&[u64], &[u64])> {
        self.cumulative
            .get(iteration)
            .map(|(b, s)| (b.as_slice(), s.as_slice()))
            .ok_or(Error::IterationOutOfRange {
                iteration,
                recorded: self.rounds.len(),
            })
    }

    /// Sum of per-round counts over the window `[from, to]` inclusive.
    pub fn window_sums(&self, from: usize, to: usize) -> Result<(Vec<u64>, Vec<u64>)> {
        if to >= self.rounds.len() || from > to {
            return Err(Error::IterationOutOfRange {
                iteration: to,
                recorded: self.rounds.len(),
            });
        }
        let (end_b, end_s) = &self.cumulative[to];
        let (mut busy, mut samples) = (end_b.clone(), end_s.clone());
        if from > 0 {
            let (start_b, start_s) = &self.cumulative[from - 1];
            for l in 0..self.channels {
                busy[l] -= start_b[l];
                samples[l] -= start_s[l];
            }
        }
        Ok((busy, samples))
    }

    /// One channel's window sum, allocation-free.
    pub fn window_sums_channel(&self, channel: usize, from: usize, to: usize) -> (u64, u64) {
        let (end_b, end_s) = &self.cumulative[to];
        let (mut busy, mut samples) = (end_b[channel], end_s[channel]);
        if from > 0 {
            let (start_b, start_s) = &self.cumulative[from - 1];
            busy -= start_b[channel];
            samples -= start_s[channel];
        }
        (busy, samples)
    }
}

/// One channel's estimate: an exact count pair.
///
/// A channel that was never sampled carries the neutral sentinel 1/2,
/// flagged as unobserved; the sentinel neither attracts nor repels the
/// lowest-estimate selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EstimatePoint {
    busy: u64,
    samples: u64,
}

impl EstimatePoint {
    pub fn new(busy: u64, samples: u64) -> Self {
        debug_assert!(samples == 0 || busy <= samples);
        EstimatePoint { busy, samples }
    }

    pub fn observed(&self) -> bool {
        self.samples > 0
    }

    pub fn busy(&self) -> u64 {
        self.busy
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    /// Exact value used for comparisons; sentinel 1/2 when unobserved.
    pub fn frac(&self) -> Frac {
        if self.samples == 0 {
            Frac::unobserved_sentinel()
        } else {
            Frac::new(self.busy, self.samples)
        }
    }

    pub fn value(&self) -> f64 {
        self.frac().to_f64()
    }
}

/// Per-channel CBR estimates, all backed by exact count pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CbrEstimate {
    points: Vec<EstimatePoint>,
}

impl CbrEstimate {
    pub fn new(points: Vec<EstimatePoint>) -> Self {
        CbrEstimate { points }
    }

    pub fn from_counts(busy: &[u64], samples: &[u64]) -> Self {
        let points = busy
            .iter()
            .zip(samples)
            .map(|(&k, &n)| EstimatePoint::new(k, n))
            .collect();
        CbrEstimate { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[EstimatePoint] {
        &self.points
    }

    pub fn point(&self, channel: usize) -> EstimatePoint {
        self.points[channel]
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value()).collect()
    }

    pub fn any_observed(&self) -> bool {
        self.points.iter().any(|p| p.observed())
    }
}

/// Maximum-likelihood CBR estimate from cumulative counts at `iteration`.
pub fn estimate_cbr(ledger: &SensingLedger, iteration: usize) -> Result<CbrEstimate> {
    if ledger.is_empty() {
        return Err(Error::EmptyLedger);
    }
    let (busy, samples) = ledger.cumulative(iteration)?;
    Ok(CbrEstimate::from_counts(busy, samples))
}

/// Indices of the exact minimum estimate.
pub fn min_estimate_indices(estimate: &CbrEstimate) -> Vec<usize> {
    let mut best: Option<Frac> = None;
    let mut indices = Vec::new();
    for (l, point) in estimate.points().iter().enumerate() {
        let value = point.frac();
        match best {
            None => {
                best = Some(value);
                indices.push(l);
            }
            Some(current) => {
                if value < current {
                    best = Some(value);
                    indices.clear();
                    indices.push(l);
                } else if value == current {
                    indices.push(l);
                }
            }
        }
    }
    indices
}

/// Pick the channel with the lowest estimated CBR.
///
/// Exact ties are broken uniformly at random. Errors if no channel was
/// ever observed.
pub fn select_channel(estimate: &CbrEstimate, rng: &mut impl Rng) -> Result<usize> {
    if estimate.is_empty() || !estimate.any_observed() {
        return Err(Error::NoObservedChannel);
    }
    let minima = min_estimate_indices(estimate);
    Ok(minima[rng.random_range(0..minima.len())])
}
