//! Bumblebee switching rule and the per-iteration sensing/decision loop.
//!
//! The engine stays on its current channel unless the best candidate's
//! smoothed CBR undercuts the current channel's by at least the switching
//! cost; the hysteresis suppresses ping-pong between nearly equal
//! channels. Each iteration allocates the sensing budget (exponential
//! heuristic, or an equal split in uniform mode), senses, refreshes the
//! windowed estimate, smooths it, and applies the switching rule.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::alloc::{equal_allocation, heuristic_allocation, AllocationPlan};
use crate::memory::{windowed_estimate, ChannelSmoother, MemoryConfig};
use crate::model::{sample_busy_counts, CbrEstimate, EstimatePoint, SensingLedger};
use crate::{Error, Result};

/// Static parameters of one decision engine.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DecisionConfig {
    /// Hysteresis margin a candidate must beat (chi >= 0).
    pub switching_cost: f64,
    /// Allocation exponent; 0 selects the uniform baseline with a
    /// randomly placed remainder.
    pub gamma: f64,
    pub memory: MemoryConfig,
    /// Sensing slots per iteration.
    pub budget: u64,
    /// Diagnostic mode: the raw estimate equals the true CBR, no sensing
    /// noise. Used to isolate the decision rule from the estimator.
    #[serde(default)]
    pub exact_estimates: bool,
}

impl DecisionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.switching_cost < 0.0 || !self.switching_cost.is_finite() {
            return Err(Error::ConfigMismatch(format!(
                "switching cost must be finite and non-negative, got {}",
                self.switching_cost
            )));
        }
        if self.gamma > 0.0 {
            return Err(Error::InvalidGamma(self.gamma));
        }
        self.memory.validate()
    }
}

/// Stay-or-switch rule: move to the best candidate `l*` only when the
/// current channel's smoothed CBR is at least `l*`'s plus the switching
/// cost. Candidate ties break uniformly at random.
pub fn switching_decision(
    current: usize,
    smoothed: &[f64],
    switching_cost: f64,
    rng: &mut impl Rng,
) -> usize {
    let mut best: Option<f64> = None;
    let mut tied: Vec<usize> = Vec::new();
    for (l, &value) in smoothed.iter().enumerate() {
        if l == current {
            continue;
        }
        match best {
            None => {
                best = Some(value);
                tied.push(l);
            }
            Some(current_best) => {
                if value < current_best {
                    best = Some(value);
                    tied.clear();
                    tied.push(l);
                } else if value == current_best {
                    tied.push(l);
                }
            }
        }
    }
    let Some(best_value) = best else {
        return current; // single channel: nothing to switch to
    };
    if smoothed[current] >= best_value + switching_cost {
        tied[rng.random_range(0..tied.len())]
    } else {
        current
    }
}

/// Everything one iteration produced.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub selected: usize,
    pub switched: bool,
    pub plan: AllocationPlan,
    pub raw: Vec<f64>,
    pub smoothed: Vec<f64>,
}

/// One platoon's sensing and channel-selection state.
#[derive(Debug, Clone)]
pub struct DecisionEngine {
    config: DecisionConfig,
    channels: usize,
    ledger: SensingLedger,
    smoothers: Vec<ChannelSmoother>,
    /// Raw windowed estimate of the previous iteration, driving the
    /// allocation of the next one.
    previous_raw: CbrEstimate,
    current: usize,
    switches: u64,
    rng: StdRng,
    initialized: bool,
}

impl DecisionEngine {
    pub fn new(config: DecisionConfig, channels: usize, seed: u64) -> Result<Self> {
        config.validate()?;
        if channels < 2 {
            return Err(Error::TooFewChannels {
                min: 2,
                got: channels,
            });
        }
        Ok(DecisionEngine {
            config,
            channels,
            ledger: SensingLedger::new(channels, config.budget),
            smoothers: (0..channels)
                .map(|_| ChannelSmoother::new(config.memory.model))
                .collect(),
            previous_raw: CbrEstimate::new(vec![EstimatePoint::new(0, 0); channels]),
            current: 0,
            switches: 0,
            rng: StdRng::seed_from_u64(seed),
            initialized: false,
        })
    }

    pub fn config(&self) -> &DecisionConfig {
        &self.config
    }

    pub fn current_channel(&self) -> usize {
        self.current
    }

    pub fn switch_count(&self) -> u64 {
        self.switches
    }

    pub fn ledger(&self) -> &SensingLedger {
        &self.ledger
    }

    fn raw_estimate(&mut self, betas: &[f64], plan: &AllocationPlan) -> Result<CbrEstimate> {
        if self.config.exact_estimates {
            // exact mode: pin each estimate to the true CBR on a fixed
            // denominator large enough to be exact for trace values
            let points = betas
                .iter()
                .map(|&beta| {
                    let den = 1u64 << 32;
                    EstimatePoint::new((beta * den as f64).round() as u64, den)
                })
                .collect();
            return Ok(CbrEstimate::new(points));
        }
        let busy = sample_busy_counts(betas, plan.counts(), &mut self.rng);
        self.ledger.record(plan.counts().to_vec(), busy)?;
        windowed_estimate(
            &self.ledger,
            self.ledger.len() - 1,
            self.config.memory.window_j,
        )
    }

    /// Iteration 0: sense uniformly, estimate, pick the raw minimum.
    pub fn initialize(&mut self, betas: &[f64]) -> Result<usize> {
        if betas.len() != self.channels {
            return Err(Error::LengthMismatch {
                expected: self.channels,
                got: betas.len(),
            });
        }
        let plan = equal_allocation(self.config.budget, self.channels, &mut self.rng);
        let raw = self.raw_estimate(betas, &plan)?;
        let smoothed: Vec<f64> = raw
            .values()
            .iter()
            .zip(&mut self.smoothers)
            .map(|(&value, smoother)| smoother.push(value))
            .collect();
        let minima = crate::model::min_estimate_indices(&raw);
        self.current = minima[self.rng.random_range(0..minima.len())];
        self.previous_raw = raw;
        self.initialized = true;
        let _ = smoothed;
        Ok(self.current)
    }

    /// One full iteration against the instantaneous true CBRs:
    /// allocate, sense, window, smooth, decide.
    pub fn step(&mut self, betas: &[f64]) -> Result<StepOutcome> {
        if !self.initialized {
            return Err(Error::ConfigMismatch(
                "engine must be initialized before stepping".into(),
            ));
        }
        if betas.len() != self.channels {
            return Err(Error::LengthMismatch {
                expected: self.channels,
                got: betas.len(),
            });
        }
        let plan = if self.config.gamma == 0.0 {
            equal_allocation(self.config.budget, self.channels, &mut self.rng)
        } else {
            heuristic_allocation(&self.previous_raw, self.config.gamma, self.config.budget)?
        };
        let raw = self.raw_estimate(betas, &plan)?;
        let raw_values = raw.values();
        let smoothed: Vec<f64> = raw_values
            .iter()
            .zip(&mut self.smoothers)
            .map(|(&value, smoother)| smoother.push(value))
            .collect();
        let next = switching_decision(
            self.current,
            &smoothed,
            self.config.switching_cost,
            &mut self.rng,
        );
        let switched = next != self.current;
        if switched {
            self.switches += 1;
        }
        self.current = next;
        self.previous_raw = raw;
        Ok(StepOutcome {
            selected: next,
            switched,
            plan,
            raw: raw_values,
            smoothed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::memory::MemoryModel;
    use crate::seed::stream_rng;

    fn config(chi: f64, gamma: f64, model: MemoryModel) -> DecisionConfig {
        DecisionConfig {
            switching_cost: chi,
            gamma,
            memory: MemoryConfig {
                window_j: 100,
                model,
            },
            budget: 8,
            exact_estimates: false,
        }
    }

    #[test]
    fn switches_when_gain_exceeds_cost() {
        // current 0.30, best candidate 0.15, chi 0.1: 0.30 >= 0.25.
        let mut rng = stream_rng(1, &[]);
        let next = switching_decision(0, &[0.30, 0.15, 0.60], 0.1, &mut rng);
        assert_eq!(next, 1);
    }

    #[test]
    fn stays_when_gain_is_below_cost() {
        // current 0.30, best candidate 0.25, chi 0.1: 0.30 < 0.35.
        let mut rng = stream_rng(1, &[]);
        let next = switching_decision(0, &[0.30, 0.25, 0.60], 0.1, &mut rng);
        assert_eq!(next, 0);
    }

    #[test]
    fn zero_cost_reduces_to_candidate_argmin() {
        let mut rng = stream_rng(2, &[]);
        for _ in 0..50 {
            let next = switching_decision(2, &[0.5, 0.2, 0.9, 0.4], 0.0, &mut rng);
            assert_eq!(next, 1);
        }
    }

    #[test]
    fn hysteresis_never_switches_below_cost() {
        let mut rng = stream_rng(3, &[]);
        for _ in 0..200 {
            use rand::Rng;
            let current = rng.random_range(0..4usize);
            let smoothed: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
            let chi = rng.random_range(0.0..0.5);
            let next = switching_decision(current, &smoothed, chi, &mut rng);
            if next != current {
                assert!(smoothed[current] - smoothed[next] >= chi - 1e-12);
            }
        }
    }

    #[test]
    fn constant_betas_fixate_on_best_channel() {
        let betas = [0.1, 0.9];
        let mut engine = config(0.1, -2.0, MemoryModel::Ewma { alpha: 0.7 });
        engine.budget = 8;
        let mut engine = DecisionEngine::new(engine, 2, 0xFEED).unwrap();
        engine.initialize(&betas).unwrap();
        let mut last_switch_iteration = None;
        for i in 0..100 {
            let outcome = engine.step(&betas).unwrap();
            if outcome.switched {
                last_switch_iteration = Some(i);
            }
        }
        assert_eq!(engine.current_channel(), 0);
        // once on channel 0 it never leaves: 0.1 < 0.9 + 0.1 always
        if let Some(last) = last_switch_iteration {
            assert!(last <= 1, "late switch at iteration {last}");
        }
    }

    #[test]
    fn unit_switching_cost_freezes_the_initial_choice() {
        let betas = [0.8, 0.3, 0.5];
        let mut engine =
            DecisionEngine::new(config(1.0, -2.0, MemoryModel::None), 3, 0x1CE).unwrap();
        let initial = engine.initialize(&betas).unwrap();
        for _ in 0..50 {
            let outcome = engine.step(&betas).unwrap();
            assert_eq!(outcome.selected, initial);
        }
        assert_eq!(engine.switch_count(), 0);
    }

    #[test]
    fn ping_pong_is_suppressed() {
        // alternating (0.4, 0.5) <-> (0.5, 0.4) with chi 0.2 and exact
        // estimates: the 0.1 swing never justifies the 0.2 cost.
        let mut cfg = config(0.2, -2.0, MemoryModel::None);
        cfg.exact_estimates = true;
        let mut engine = DecisionEngine::new(cfg, 2, 7).unwrap();
        engine.initialize(&[0.4, 0.5]).unwrap();
        assert_eq!(engine.current_channel(), 0);
        for i in 0..60 {
            let betas = if i % 2 == 0 { [0.5, 0.4] } else { [0.4, 0.5] };
            engine.step(&betas).unwrap();
        }
        assert_eq!(engine.switch_count(), 0);
        assert_eq!(engine.current_channel(), 0);
    }

    #[test]
    fn identical_seeds_give_identical_sequences() {
        let betas_at = |i: usize| {
            let wave = (i as f64 / 7.0).sin().abs() * 0.5;
            vec![0.2 + wave * 0.5, 0.6 - wave, 0.5, 0.9]
        };
        let run = || {
            let mut engine =
                DecisionEngine::new(config(0.1, -2.0, MemoryModel::Swa { window: 4 }), 4, 99)
                    .unwrap();
            engine.initialize(&betas_at(0)).unwrap();
            (1..80)
                .map(|i| engine.step(&betas_at(i)).unwrap().selected)
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn switch_count_non_increasing_in_cost_with_exact_estimates() {
        // exact-estimate mode removes sensing noise, the only regime
        // where monotonicity in chi is guaranteed
        let trace: Vec<Vec<f64>> = (0..120)
            .map(|i| {
                let t = i as f64 / 10.0;
                vec![
                    0.35 + 0.25 * (t * 0.8).sin(),
                    0.35 + 0.25 * (t * 0.8 + 2.0).sin(),
                    0.7,
                ]
            })
            .collect();
        let mut previous_switches = None;
        for &chi in &[0.0, 0.05, 0.1, 0.2, 0.4, 0.8] {
            let mut cfg = config(chi, -2.0, MemoryModel::None);
            cfg.exact_estimates = true;
            let mut engine = DecisionEngine::new(cfg, 3, 5).unwrap();
            engine.initialize(&trace[0]).unwrap();
            for row in &trace[1..] {
                engine.step(row).unwrap();
            }
            let switches = engine.switch_count();
            if let Some(previous) = previous_switches {
                assert!(
                    switches <= previous,
                    "chi {chi}: {switches} switches after {previous}"
                );
            }
            previous_switches = Some(switches);
        }
    }

    #[test]
    fn uniform_mode_spends_the_budget_equally() {
        let mut cfg = config(0.1, 0.0, MemoryModel::None);
        cfg.budget = 10;
        let mut engine = DecisionEngine::new(cfg, 4, 21).unwrap();
        engine.initialize(&[0.2, 0.4, 0.6, 0.8]).unwrap();
        for _ in 0..20 {
            let outcome = engine.step(&[0.2, 0.4, 0.6, 0.8]).unwrap();
            assert_eq!(outcome.plan.budget(), 10);
            let max = outcome.plan.counts().iter().max().unwrap();
            let min = outcome.plan.counts().iter().min().unwrap();
            assert!(max - min <= 1);
        }
    }
}
