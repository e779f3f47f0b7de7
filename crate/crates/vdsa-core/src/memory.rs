//! Windowed CBR estimation and smoothing.
//!
//! In a time-varying environment outdated sensing samples must be
//! forgotten: the raw estimate at iteration `i` uses only the last `J+1`
//! sensing rounds. On top of the raw estimate, an optional sliding-window
//! average (SWA) or exponentially weighted moving average (EWMA) produces
//! the value the switching decision actually consumes.

use std::collections::VecDeque;

use crate::model::{CbrEstimate, EstimatePoint, SensingLedger};
use crate::{Error, Result};

/// Smoothing applied on top of the windowed raw estimate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MemoryModel {
    /// No smoothing: the decision sees the raw windowed estimate.
    None,
    /// Arithmetic mean of the most recent `window` raw estimates.
    Swa { window: usize },
    /// `alpha * current + (1 - alpha) * previous`, seeded with the first
    /// raw estimate.
    Ewma { alpha: f64 },
}

/// Window length for the raw estimate plus the smoothing model.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MemoryConfig {
    /// The raw estimate at iteration `i` sums counts over iterations
    /// `i-J ..= i`.
    pub window_j: usize,
    pub model: MemoryModel,
}

impl MemoryConfig {
    pub fn validate(&self) -> Result<()> {
        match self.model {
            MemoryModel::None => Ok(()),
            MemoryModel::Swa { window } => {
                if window >= 1 {
                    Ok(())
                } else {
                    Err(Error::InvalidWindow)
                }
            }
            MemoryModel::Ewma { alpha } => {
                if alpha > 0.0 && alpha <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidAlpha(alpha))
                }
            }
        }
    }
}

/// Raw windowed estimate at `iteration`: window counts summed over
/// `[iteration - J, iteration]`, clipped at the first recorded round.
///
/// A channel with no samples anywhere in the window carries its most
/// recent defined estimate forward; a channel never sampled at all up to
/// `iteration` stays at the unobserved sentinel.
pub fn windowed_estimate(
    ledger: &SensingLedger,
    iteration: usize,
    window_j: usize,
) -> Result<CbrEstimate> {
    if ledger.is_empty() {
        return Err(Error::EmptyLedger);
    }
    if iteration >= ledger.len() {
        return Err(Error::IterationOutOfRange {
            iteration,
            recorded: ledger.len(),
        });
    }
    let channels = ledger.channels();
    // per channel, the estimate from the most recent iteration i' <= i
    // whose window [i'-J, i'] contains samples; sentinel if none exists
    let mut points: Vec<EstimatePoint> = Vec::with_capacity(channels);
    for l in 0..channels {
        let mut point = EstimatePoint::new(0, 0);
        let mut i = iteration;
        loop {
            let from = i.saturating_sub(window_j);
            let (busy, samples) = ledger.window_sums_channel(l, from, i);
            if samples > 0 {
                point = EstimatePoint::new(busy, samples);
                break;
            }
            if i == 0 {
                break;
            }
            i -= 1;
        }
        points.push(point);
    }
    Ok(CbrEstimate::new(points))
}

/// Mean of the most recent `window` raw estimates; during warm-up, the
/// mean of whatever exists.
pub fn swa_smooth(history: &[f64], window: usize) -> f64 {
    assert!(window >= 1);
    assert!(!history.is_empty(), "need at least one raw estimate");
    let tail = &history[history.len().saturating_sub(window)..];
    tail.iter().sum::<f64>() / tail.len() as f64
}

/// One EWMA update; the first call passes `previous = None` and returns
/// the current value unchanged.
pub fn ewma_smooth(previous: Option<f64>, current: f64, alpha: f64) -> f64 {
    debug_assert!(alpha > 0.0 && alpha <= 1.0);
    match previous {
        None => current,
        Some(prev) => alpha * current + (1.0 - alpha) * prev,
    }
}

/// Per-channel smoothing state owned by one decision engine.
#[derive(Debug, Clone)]
pub enum ChannelSmoother {
    None,
    Swa { window: usize, history: VecDeque<f64> },
    Ewma { alpha: f64, state: Option<f64> },
}

impl ChannelSmoother {
    pub fn new(model: MemoryModel) -> Self {
        match model {
            MemoryModel::None => ChannelSmoother::None,
            MemoryModel::Swa { window } => ChannelSmoother::Swa {
                window,
                history: VecDeque::with_capacity(window),
            },
            MemoryModel::Ewma { alpha } => ChannelSmoother::Ewma { alpha, state: None },
        }
    }

    /// Feed the raw windowed estimate for this iteration, get the
    /// smoothed value the decision rule uses.
    pub fn push(&mut self, raw: f64) -> f64 {
        match self {
            ChannelSmoother::None => raw,
            ChannelSmoother::Swa { window, history } => {
                if history.len() == *window {
                    history.pop_front();
                }
                history.push_back(raw);
                let values: Vec<f64> = history.iter().copied().collect();
                swa_smooth(&values, *window)
            }
            ChannelSmoother::Ewma { alpha, state } => {
                let smoothed = ewma_smooth(*state, raw, *alpha);
                *state = Some(smoothed);
                smoothed
            }
        }
    }
}

/// Raw and smoothed per-channel values for one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedEstimate {
    pub raw: Vec<f64>,
    pub smoothed: Vec<f64>,
}
