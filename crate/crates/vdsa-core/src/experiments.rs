//! Reproducible experiment drivers.
//!
//! Four drivers cover the study: selection-probability curves with
//! analytic bounds and Monte Carlo strategies, the gamma sweep over
//! random system configurations, memory-model tuning on a synthetic
//! trace, and the platoon comparison of uniform vs non-uniform sampling.
//! Every driver takes one base seed, derives per-unit streams (see
//! [`crate::seed`]) and accumulates Monte Carlo tallies as exact integer
//! tie credits, so results are independent of the worker count.
//!
//! [`emit`] functions write CSV curve files plus a JSON manifest carrying
//! the experiment id, a hash of the configuration and the build string.

use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alloc::{
    committed_path, global_optimal, heuristic_fill, iterative_optimal, SearchConfig,
    SearchFrontier,
};
use crate::bounds::SuccessBounds;
use crate::bumblebee::{DecisionConfig, DecisionEngine};
use crate::memory::{MemoryConfig, MemoryModel};
use crate::model::ChannelSet;
use crate::scenario::{run_platoon, synth_trace, ReceptionReport, TrafficScenario};
use crate::seed::{derive_seed, stream_rng};
use crate::{Error, Result};

/// Exact tie credit denominator: lcm(1..=10). A selection tied among `m`
/// channels of which `t` are optimal scores `t * (TIE_DENOM / m)`, an
/// integer for every channel count up to [`MAX_MC_CHANNELS`], so Monte
/// Carlo tallies sum exactly in any order.
const TIE_DENOM: u64 = 2520;

/// Largest channel count the Monte Carlo drivers accept.
pub const MAX_MC_CHANNELS: usize = 10;

// ---------------------------------------------------------------------
// Monte Carlo core
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
enum McStrategy<'a> {
    /// Equal split, remainder on random distinct channels each iteration.
    Equal,
    /// Exponential-weight allocation from the previous cumulative
    /// estimates; the first iteration is an equal split.
    Heuristic { gamma: f64 },
    /// A precomputed cumulative schedule (per-iteration increments).
    FixedPath { cumulative: &'a [Vec<u64>] },
}

/// Fill `plan` with an equal split, remainder via Floyd's sampling of
/// distinct channels (no allocation).
fn equal_fill(plan: &mut [u64], budget: u64, rng: &mut impl rand::Rng) {
    let channels = plan.len();
    let base = budget / channels as u64;
    let remainder = (budget % channels as u64) as usize;
    plan.fill(base);
    let mut chosen: u16 = 0;
    for j in channels - remainder..channels {
        let t = rng.random_range(0..=j);
        let pick = if chosen & (1 << t) != 0 { j } else { t };
        chosen |= 1 << pick;
        plan[pick] += 1;
    }
}

/// `t * (TIE_DENOM / m)` for the exact-minimum tie at the cumulative
/// counts; channels with zero samples compete at the sentinel 1/2.
fn success_credit(cum_busy: &[u64], cum_samples: &[u64], optimal: &[bool]) -> u64 {
    let mut best_num = 0u64;
    let mut best_den = 0u64; // empty marker
    let mut tied = 0u64;
    let mut tied_optimal = 0u64;
    for l in 0..cum_busy.len() {
        let (num, den) = if cum_samples[l] == 0 {
            (1u64, 2u64)
        } else {
            (cum_busy[l], cum_samples[l])
        };
        if best_den == 0 {
            (best_num, best_den) = (num, den);
            tied = 1;
            tied_optimal = u64::from(optimal[l]);
            continue;
        }
        let lhs = num as u128 * best_den as u128;
        let rhs = best_num as u128 * den as u128;
        if lhs < rhs {
            (best_num, best_den) = (num, den);
            tied = 1;
            tied_optimal = u64::from(optimal[l]);
        } else if lhs == rhs {
            tied += 1;
            tied_optimal += u64::from(optimal[l]);
        }
    }
    tied_optimal * (TIE_DENOM / tied)
}

struct McTally {
    /// Per-iteration success credits (units of 1/TIE_DENOM per run).
    success: Vec<u64>,
    /// Per-iteration per-channel cumulative sample sums across runs.
    cumulative: Vec<u64>,
}

/// Simulate `runs` independent runs of `horizon` iterations and tally
/// per-iteration success credits (and cumulative sample counts when
/// `track_cumulative`). Deterministic in (seed path, run index) only.
fn mc_tally(
    channels: &ChannelSet,
    budget: u64,
    horizon: usize,
    runs: usize,
    strategy: McStrategy,
    base_seed: u64,
    seed_path: &[u64],
    track_cumulative: bool,
) -> McTally {
    let l = channels.len();
    assert!(l <= MAX_MC_CHANNELS);
    let betas = channels.betas().to_vec();
    let optimal = channels.optimal_mask();

    let per_run = |run: usize| -> McTally {
        let mut parts = seed_path.to_vec();
        parts.push(run as u64);
        let mut rng = stream_rng(base_seed, &parts);
        let mut tally = McTally {
            success: vec![0; horizon],
            cumulative: vec![0; if track_cumulative { horizon * l } else { 0 }],
        };
        let mut plan = vec![0u64; l];
        let mut cum_busy = vec![0u64; l];
        let mut cum_samples = vec![0u64; l];
        let mut values = vec![0.0f64; l];
        let mut raw = vec![0.0f64; l];
        let mut order = vec![0usize; l];
        for iteration in 0..horizon {
            match strategy {
                McStrategy::Equal => equal_fill(&mut plan, budget, &mut rng),
                McStrategy::Heuristic { gamma } => {
                    if iteration == 0 {
                        equal_fill(&mut plan, budget, &mut rng);
                    } else {
                        for ch in 0..l {
                            values[ch] = if cum_samples[ch] == 0 {
                                0.5
                            } else {
                                cum_busy[ch] as f64 / cum_samples[ch] as f64
                            };
                        }
                        heuristic_fill(&values, gamma, budget, &mut plan, &mut raw, &mut order);
                    }
                }
                McStrategy::FixedPath { cumulative } => {
                    for ch in 0..l {
                        let now = cumulative[iteration][ch];
                        let before = if iteration == 0 {
                            0
                        } else {
                            cumulative[iteration - 1][ch]
                        };
                        plan[ch] = now - before;
                    }
                }
            }
            for ch in 0..l {
                let mut busy = 0u64;
                for _ in 0..plan[ch] {
                    if rng.random_bool(betas[ch]) {
                        busy += 1;
                    }
                }
                cum_busy[ch] += busy;
                cum_samples[ch] += plan[ch];
            }
            tally.success[iteration] = success_credit(&cum_busy, &cum_samples, &optimal);
            if track_cumulative {
                for ch in 0..l {
                    tally.cumulative[iteration * l + ch] = cum_samples[ch];
                }
            }
        }
        tally
    };

    (0..runs)
        .into_par_iter()
        .map(per_run)
        .reduce(
            || McTally {
                success: vec![0; horizon],
                cumulative: vec![0; if track_cumulative { horizon * l } else { 0 }],
            },
            |mut a, b| {
                for (x, y) in a.success.iter_mut().zip(&b.success) {
                    *x += y;
                }
                for (x, y) in a.cumulative.iter_mut().zip(&b.cumulative) {
                    *x += y;
                }
                a
            },
        )
}

fn tally_to_curve(tally: &[u64], runs: usize) -> Vec<f64> {
    tally
        .iter()
        .map(|&credit| credit as f64 / (TIE_DENOM as f64 * runs as f64))
        .collect()
}

/// First iteration (1-based) from which the curve stays at or above the
/// threshold through the horizon.
pub fn sustained_crossing(curve: &[f64], threshold: f64) -> Option<usize> {
    let last_below = curve.iter().rposition(|&p| p < threshold);
    match last_below {
        None => Some(1),
        Some(i) if i + 1 < curve.len() => Some(i + 2),
        Some(_) => None,
    }
}

/// Binomial standard error of a Monte Carlo estimate, floored at 1/runs.
pub fn mc_sigma(p: f64, runs: usize) -> f64 {
    (p * (1.0 - p) / runs as f64).sqrt().max(1.0 / runs as f64)
}

// ---------------------------------------------------------------------
// Bounds experiment
// ---------------------------------------------------------------------

/// Selection-probability curves for one (betas, N) system.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundsExperimentConfig {
    pub id: String,
    pub betas: Vec<f64>,
    pub budget: u64,
    pub horizon: usize,
    pub mc_runs: usize,
    /// Heuristic strategies to simulate; gamma 0 maps to the equal baseline.
    pub gammas: Vec<f64>,
    pub enumeration_cap: u64,
    pub frontier_cap: usize,
    pub base_seed: u64,
}

impl BoundsExperimentConfig {
    pub fn search_config(&self) -> SearchConfig {
        SearchConfig {
            enumeration_cap: self.enumeration_cap as u128,
            frontier_cap: self.frontier_cap,
            ..SearchConfig::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoundsCurves {
    /// Analytic bounds of the unconstrained search, per iteration.
    pub global: Vec<SuccessBounds>,
    /// Lexicographically chosen global cumulative tuple, per iteration.
    pub global_choice: Vec<Vec<u64>>,
    /// Analytic bounds of the history-constrained search, per iteration.
    pub iterative: Vec<SuccessBounds>,
    /// Committed cumulative path of the constrained search.
    pub iterative_path: Vec<Vec<u64>>,
    /// Monte Carlo success per iteration, sensing along the committed path.
    pub mc_iterative: Vec<f64>,
    pub mc_equal: Vec<f64>,
    /// Per gamma: Monte Carlo success curve.
    pub mc_heuristic: Vec<(f64, Vec<f64>)>,
    /// Per gamma: mean cumulative samples [iteration][channel].
    pub heuristic_cumulative: Vec<(f64, Vec<Vec<f64>>)>,
    pub mc_runs: usize,
}

/// Compute analytic bound curves and Monte Carlo strategy curves.
pub fn run_bounds_experiment(config: &BoundsExperimentConfig) -> Result<BoundsCurves> {
    let channels = ChannelSet::new(config.betas.clone())?;
    if channels.len() > MAX_MC_CHANNELS {
        return Err(Error::ConfigMismatch(format!(
            "Monte Carlo drivers support up to {MAX_MC_CHANNELS} channels"
        )));
    }
    let search = config.search_config();

    let mut iterative = Vec::with_capacity(config.horizon);
    let mut frontiers = Vec::with_capacity(config.horizon);
    let mut frontier = SearchFrontier::initial(channels.len());
    for _ in 0..config.horizon {
        frontier = iterative_optimal(&channels, config.budget, &frontier, &search)?;
        iterative.push(frontier.bounds().expect("bounds set after a step"));
        frontiers.push(frontier.clone());
    }
    let iterative_path = committed_path(&frontiers);

    let mut global = Vec::with_capacity(config.horizon);
    let mut global_choice = Vec::with_capacity(config.horizon);
    for iteration in 1..=config.horizon {
        let optimum = global_optimal(&channels, config.budget, iteration, &search)?;
        global.push(optimum.bounds);
        global_choice.push(optimum.cumulative);
    }

    let mc = |strategy: McStrategy, stream: u64, track: bool| {
        mc_tally(
            &channels,
            config.budget,
            config.horizon,
            config.mc_runs,
            strategy,
            config.base_seed,
            &[stream],
            track,
        )
    };
    let mc_equal = tally_to_curve(&mc(McStrategy::Equal, 0, false).success, config.mc_runs);
    let mc_iterative = tally_to_curve(
        &mc(
            McStrategy::FixedPath {
                cumulative: &iterative_path,
            },
            1,
            false,
        )
        .success,
        config.mc_runs,
    );
    let mut mc_heuristic = Vec::new();
    let mut heuristic_cumulative = Vec::new();
    for (index, &gamma) in config.gammas.iter().enumerate() {
        let strategy = if gamma == 0.0 {
            McStrategy::Equal
        } else {
            McStrategy::Heuristic { gamma }
        };
        let tally = mc(strategy, 2 + index as u64, true);
        mc_heuristic.push((gamma, tally_to_curve(&tally.success, config.mc_runs)));
        let l = channels.len();
        let mean: Vec<Vec<f64>> = (0..config.horizon)
            .map(|i| {
                (0..l)
                    .map(|ch| tally.cumulative[i * l + ch] as f64 / config.mc_runs as f64)
                    .collect()
            })
            .collect();
        heuristic_cumulative.push((gamma, mean));
    }

    Ok(BoundsCurves {
        global,
        global_choice,
        iterative,
        iterative_path,
        mc_iterative,
        mc_equal,
        mc_heuristic,
        heuristic_cumulative,
        mc_runs: config.mc_runs,
    })
}

// ---------------------------------------------------------------------
// Gamma sweep
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub id: String,
    /// (budget N, channels L) systems to sweep.
    pub nl_configs: Vec<(u64, usize)>,
    /// Random CBR vectors per system, drawn from the 0.1 grid.
    pub beta_sets: usize,
    pub mc_runs: usize,
    pub gammas: Vec<f64>,
    pub threshold: f64,
    pub horizon: usize,
    pub base_seed: u64,
}

impl SweepConfig {
    /// Reduced sweep sized for a desk run.
    pub fn desk_scale(base_seed: u64) -> Self {
        SweepConfig {
            id: "sweep_desk".into(),
            nl_configs: vec![(3, 3), (5, 3), (6, 4), (8, 4), (8, 5), (9, 6)],
            beta_sets: 20,
            mc_runs: 10_000,
            gammas: vec![-2.0],
            threshold: 0.95,
            horizon: 200,
            base_seed,
        }
    }

    /// The full 26-configuration sweep with 200 beta sets and 1e5 runs.
    pub fn paper_scale(base_seed: u64) -> Self {
        let mut nl_configs = Vec::new();
        for n in [3u64, 4, 5, 6, 9] {
            nl_configs.push((n, 3));
        }
        for n in [4u64, 5, 6, 7, 8, 12] {
            nl_configs.push((n, 4));
        }
        for n in [5u64, 6, 7, 8, 9, 10, 15] {
            nl_configs.push((n, 5));
        }
        for n in [6u64, 7, 8, 9, 10, 11, 12, 18] {
            nl_configs.push((n, 6));
        }
        SweepConfig {
            id: "sweep_full".into(),
            nl_configs,
            beta_sets: 200,
            mc_runs: 100_000,
            gammas: vec![-1.0, -2.0, -4.0, -8.0, -16.0],
            threshold: 0.95,
            horizon: 200,
            base_seed,
        }
    }
}

/// One (system, beta set, gamma) outcome.
#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub budget: u64,
    pub channels: usize,
    pub set_index: usize,
    pub betas: Vec<f64>,
    pub gamma: f64,
    /// Sustained-crossing iteration of the gamma strategy (horizon if
    /// never reached).
    pub iterations: usize,
    pub reached: bool,
    /// Same for the equal-allocation baseline.
    pub equal_iterations: usize,
    pub equal_reached: bool,
    /// iterations / equal_iterations.
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub entries: Vec<SweepEntry>,
    /// Per gamma: sorted (ratio, cumulative fraction) CDF points.
    pub cdf: Vec<(f64, Vec<(f64, f64)>)>,
}

impl SweepResult {
    pub fn entries_for(&self, gamma: f64) -> impl Iterator<Item = &SweepEntry> {
        self.entries.iter().filter(move |e| e.gamma == gamma)
    }

    /// Fraction of configurations where the gamma strategy needed more
    /// iterations than equal allocation.
    pub fn outperformed_fraction(&self, gamma: f64) -> f64 {
        let mut total = 0usize;
        let mut worse = 0usize;
        for entry in self.entries_for(gamma) {
            total += 1;
            if entry.ratio > 1.0 {
                worse += 1;
            }
        }
        worse as f64 / total as f64
    }

    pub fn median_ratio(&self, gamma: f64) -> f64 {
        let mut ratios: Vec<f64> = self.entries_for(gamma).map(|e| e.ratio).collect();
        ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = ratios.len();
        if n % 2 == 1 {
            ratios[n / 2]
        } else {
            0.5 * (ratios[n / 2 - 1] + ratios[n / 2])
        }
    }
}

/// Draw a beta vector from the 0.1 grid.
fn grid_betas(channels: usize, rng: &mut impl rand::Rng) -> Vec<f64> {
    (0..channels)
        .map(|_| f64::from(rng.random_range(0..=10u32)) / 10.0)
        .collect()
}

/// Iterations-to-threshold for every (system, beta set, gamma), with the
/// ratio to the equal-allocation baseline and the aggregate ratio CDF.
pub fn run_gamma_sweep(config: &SweepConfig) -> Result<SweepResult> {
    for &(_, l) in &config.nl_configs {
        if l > MAX_MC_CHANNELS || l < 2 {
            return Err(Error::ConfigMismatch(format!(
                "sweep channel count {l} outside 2..={MAX_MC_CHANNELS}"
            )));
        }
    }
    if !(0.0..1.0).contains(&config.threshold) || config.threshold == 0.0 {
        return Err(Error::ConfigMismatch(format!(
            "threshold {} outside (0, 1)",
            config.threshold
        )));
    }

    let units: Vec<(usize, usize)> = (0..config.nl_configs.len())
        .flat_map(|c| (0..config.beta_sets).map(move |s| (c, s)))
        .collect();

    let entries: Vec<Vec<SweepEntry>> = units
        .par_iter()
        .map(|&(config_index, set_index)| {
            let (budget, l) = config.nl_configs[config_index];
            let mut rng = stream_rng(
                config.base_seed,
                &[1, config_index as u64, set_index as u64],
            );
            let betas = grid_betas(l, &mut rng);
            let channels = ChannelSet::new(betas.clone()).expect("grid betas are valid");

            let equal_curve = tally_to_curve(
                &mc_tally(
                    &channels,
                    budget,
                    config.horizon,
                    config.mc_runs,
                    McStrategy::Equal,
                    config.base_seed,
                    &[2, config_index as u64, set_index as u64, 0],
                    false,
                )
                .success,
                config.mc_runs,
            );
            let equal_cross = sustained_crossing(&equal_curve, config.threshold);
            let (equal_iterations, equal_reached) = match equal_cross {
                Some(i) => (i, true),
                None => (config.horizon, false),
            };

            config
                .gammas
                .iter()
                .enumerate()
                .map(|(gamma_index, &gamma)| {
                    let (iterations, reached) = if gamma == 0.0 {
                        // the equal baseline itself: ratio 1 by construction
                        (equal_iterations, equal_reached)
                    } else {
                        let curve = tally_to_curve(
                            &mc_tally(
                                &channels,
                                budget,
                                config.horizon,
                                config.mc_runs,
                                McStrategy::Heuristic { gamma },
                                config.base_seed,
                                &[
                                    2,
                                    config_index as u64,
                                    set_index as u64,
                                    1 + gamma_index as u64,
                                ],
                                false,
                            )
                            .success,
                            config.mc_runs,
                        );
                        match sustained_crossing(&curve, config.threshold) {
                            Some(i) => (i, true),
                            None => (config.horizon, false),
                        }
                    };
                    SweepEntry {
                        budget,
                        channels: l,
                        set_index,
                        betas: betas.clone(),
                        gamma,
                        iterations,
                        reached,
                        equal_iterations,
                        equal_reached,
                        ratio: iterations as f64 / equal_iterations as f64,
                    }
                })
                .collect()
        })
        .collect();

    let entries: Vec<SweepEntry> = entries.into_iter().flatten().collect();
    let cdf = config
        .gammas
        .iter()
        .map(|&gamma| {
            let mut ratios: Vec<f64> = entries
                .iter()
                .filter(|e| e.gamma == gamma)
                .map(|e| e.ratio)
                .collect();
            ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = ratios.len() as f64;
            let points = ratios
                .iter()
                .enumerate()
                .map(|(i, &x)| (x, (i + 1) as f64 / n))
                .collect();
            (gamma, points)
        })
        .collect();

    Ok(SweepResult { entries, cdf })
}

// ---------------------------------------------------------------------
// Memory experiment
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MemoryExperimentConfig {
    pub id: String,
    pub scenario: TrafficScenario,
    pub duration_s: f64,
    pub seeds: usize,
    pub budget: u64,
    pub switching_cost: f64,
    pub gamma: f64,
    pub window_j: usize,
    pub swa_windows: Vec<usize>,
    pub ewma_alphas: Vec<f64>,
    pub base_seed: u64,
}

/// One engine's selection performance across seeds.
#[derive(Debug, Clone, Serialize)]
pub struct EngineOutcome {
    pub label: String,
    pub gamma: f64,
    pub model: MemoryModel,
    /// Fraction of iterations whose selection was a true best channel,
    /// per seed.
    pub rates: Vec<f64>,
    pub mean_rate: f64,
    pub std_rate: f64,
}

impl EngineOutcome {
    fn from_rates(label: String, gamma: f64, model: MemoryModel, rates: Vec<f64>) -> Self {
        let n = rates.len() as f64;
        let mean = rates.iter().sum::<f64>() / n;
        let var = rates.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
        EngineOutcome {
            label,
            gamma,
            model,
            rates,
            mean_rate: mean,
            std_rate: var.sqrt(),
        }
    }

    /// Mean paired gain over `other` in percentage points.
    pub fn gain_pp_over(&self, other: &EngineOutcome) -> f64 {
        100.0 * (self.mean_rate - other.mean_rate)
    }

    /// Paired per-seed differences to `other`: (mean, standard error).
    pub fn paired_difference(&self, other: &EngineOutcome) -> (f64, f64) {
        let diffs: Vec<f64> = self
            .rates
            .iter()
            .zip(&other.rates)
            .map(|(a, b)| a - b)
            .collect();
        let n = diffs.len() as f64;
        let mean = diffs.iter().sum::<f64>() / n;
        let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    }
}

#[derive(Debug, Clone)]
pub struct MemoryExperimentResult {
    pub engines: Vec<EngineOutcome>,
}

impl MemoryExperimentResult {
    pub fn engine(&self, label: &str) -> Option<&EngineOutcome> {
        self.engines.iter().find(|e| e.label == label)
    }

    /// Label of the best engine among those whose label starts with `prefix`.
    pub fn best_among(&self, prefix: &str) -> Option<&EngineOutcome> {
        self.engines
            .iter()
            .filter(|e| e.label.starts_with(prefix))
            .max_by(|a, b| a.mean_rate.partial_cmp(&b.mean_rate).unwrap())
    }
}

/// Fraction of trace steps where the engine's selection is a true best
/// channel.
fn selection_rate(
    trace: &crate::scenario::ScenarioTrace,
    engine_config: &DecisionConfig,
    seed: u64,
) -> Result<f64> {
    let mut engine = DecisionEngine::new(*engine_config, trace.channels(), seed)?;
    let mut hits = 0usize;
    for step in 0..trace.len() {
        let row = trace.row(step);
        let selected = if step == 0 {
            engine.initialize(row)?
        } else {
            engine.step(row)?.selected
        };
        if trace.best_channels(step).contains(&selected) {
            hits += 1;
        }
    }
    Ok(hits as f64 / trace.len() as f64)
}

/// Compare equal/heuristic allocation and SWA/EWMA memory models by
/// best-channel selection rate over seeded synthetic traces.
pub fn run_memory_experiment(config: &MemoryExperimentConfig) -> Result<MemoryExperimentResult> {
    config.scenario.validate()?;
    let mut engines: Vec<(String, f64, MemoryModel)> = vec![
        ("equal memoryless".into(), 0.0, MemoryModel::None),
        ("heuristic memoryless".into(), config.gamma, MemoryModel::None),
    ];
    for &window in &config.swa_windows {
        engines.push((
            format!("heuristic swa K={window}"),
            config.gamma,
            MemoryModel::Swa { window },
        ));
    }
    for &alpha in &config.ewma_alphas {
        engines.push((
            format!("heuristic ewma a={alpha}"),
            config.gamma,
            MemoryModel::Ewma { alpha },
        ));
    }

    let units: Vec<(usize, usize)> = (0..engines.len())
        .flat_map(|e| (0..config.seeds).map(move |s| (e, s)))
        .collect();
    let rates: Vec<((usize, usize), f64)> = units
        .par_iter()
        .map(|&(engine_index, seed_index)| {
            let trace_seed = derive_seed(config.base_seed, &[3, seed_index as u64]);
            let trace = synth_trace(&config.scenario, config.duration_s, trace_seed)
                .expect("scenario validated");
            let (_, gamma, model) = &engines[engine_index];
            let engine_config = DecisionConfig {
                switching_cost: config.switching_cost,
                gamma: *gamma,
                memory: MemoryConfig {
                    window_j: config.window_j,
                    model: *model,
                },
                budget: config.budget,
                exact_estimates: false,
            };
            let seed = derive_seed(
                config.base_seed,
                &[4, engine_index as u64, seed_index as u64],
            );
            let rate = selection_rate(&trace, &engine_config, seed).expect("validated engine");
            ((engine_index, seed_index), rate)
        })
        .collect();

    let outcomes = engines
        .into_iter()
        .enumerate()
        .map(|(engine_index, (label, gamma, model))| {
            let mut per_seed = vec![0.0; config.seeds];
            for ((e, s), rate) in &rates {
                if *e == engine_index {
                    per_seed[*s] = *rate;
                }
            }
            EngineOutcome::from_rates(label, gamma, model, per_seed)
        })
        .collect();
    Ok(MemoryExperimentResult { engines: outcomes })
}

// ---------------------------------------------------------------------
// Platoon experiment
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlatoonExperimentConfig {
    pub id: String,
    pub scenario: TrafficScenario,
    pub duration_s: f64,
    pub runs: usize,
    /// Allocation exponents to compare (0 = uniform sampling).
    pub gammas: Vec<f64>,
    pub switching_cost: f64,
    pub window_j: usize,
    pub ewma_alpha: f64,
    pub base_seed: u64,
}

#[derive(Debug)]
pub struct PlatoonRun {
    pub gamma: f64,
    pub run: usize,
    pub report: ReceptionReport,
}

#[derive(Debug)]
pub struct PlatoonExperimentResult {
    pub runs: Vec<PlatoonRun>,
}

impl PlatoonExperimentResult {
    pub fn report(&self, gamma: f64, run: usize) -> Option<&ReceptionReport> {
        self.runs
            .iter()
            .find(|r| r.gamma == gamma && r.run == run)
            .map(|r| &r.report)
    }

    pub fn reports_for(&self, gamma: f64) -> Vec<&ReceptionReport> {
        let mut runs: Vec<&PlatoonRun> = self.runs.iter().filter(|r| r.gamma == gamma).collect();
        runs.sort_by_key(|r| r.run);
        runs.into_iter().map(|r| &r.report).collect()
    }
}

/// Run the platoon comparison: shared trace per run index, one engine per
/// gamma, paired by run.
pub fn run_platoon_experiment(
    config: &PlatoonExperimentConfig,
) -> Result<PlatoonExperimentResult> {
    config.scenario.validate()?;
    let engine_for = |gamma: f64| DecisionConfig {
        switching_cost: config.switching_cost,
        gamma,
        memory: MemoryConfig {
            window_j: config.window_j,
            model: MemoryModel::Ewma {
                alpha: config.ewma_alpha,
            },
        },
        budget: config.scenario.platoon_size as u64,
        exact_estimates: false,
    };
    let units: Vec<(usize, usize)> = (0..config.gammas.len())
        .flat_map(|g| (0..config.runs).map(move |r| (g, r)))
        .collect();
    let runs: Vec<PlatoonRun> = units
        .par_iter()
        .map(|&(gamma_index, run)| {
            let trace_seed = derive_seed(config.base_seed, &[6, run as u64]);
            let trace = synth_trace(&config.scenario, config.duration_s, trace_seed)
                .expect("scenario validated");
            let gamma = config.gammas[gamma_index];
            let seed = derive_seed(config.base_seed, &[7, gamma_index as u64, run as u64]);
            let report = run_platoon(&trace, &engine_for(gamma), &config.scenario, seed)
                .expect("validated scenario");
            PlatoonRun { gamma, run, report }
        })
        .collect();
    Ok(PlatoonExperimentResult { runs })
}

// ---------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------

/// FNV-1a over the canonical JSON of a config; enough to detect any
/// field change in a manifest.
fn config_hash(config_json: &str) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in config_json.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    format!("{hash:016x}")
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub experiment_id: String,
    pub config_hash: String,
    pub base_seed: u64,
    pub build: String,
    pub outputs: Vec<String>,
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn write_manifest<C: Serialize>(
    dir: &Path,
    id: &str,
    config: &C,
    base_seed: u64,
    build: &str,
    outputs: &[String],
) -> Result<PathBuf> {
    let config_json = serde_json::to_string(config).expect("configs serialize");
    let manifest = Manifest {
        experiment_id: id.to_string(),
        config_hash: config_hash(&config_json),
        base_seed,
        build: build.to_string(),
        outputs: outputs.to_vec(),
    };
    let path = dir.join(format!("{id}_manifest.json"));
    let body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(&path, &body)?;
    Ok(path)
}

/// Write `{id}_curves.csv`, `{id}_allocation.csv` and the manifest.
pub fn emit_bounds_report(
    curves: &BoundsCurves,
    config: &BoundsExperimentConfig,
    dir: &Path,
    build: &str,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut body = String::from("iteration,global_lb,global_ub,iterative_lb,iterative_ub");
    body.push_str(",mc_iterative,mc_equal");
    for (gamma, _) in &curves.mc_heuristic {
        body.push_str(&format!(",mc_heuristic_g{gamma}"));
    }
    body.push('\n');
    for i in 0..curves.global.len() {
        body.push_str(&format!(
            "{},{},{},{},{},{},{}",
            i + 1,
            curves.global[i].lower,
            curves.global[i].upper,
            curves.iterative[i].lower,
            curves.iterative[i].upper,
            curves.mc_iterative[i],
            curves.mc_equal[i]
        ));
        for (_, curve) in &curves.mc_heuristic {
            body.push_str(&format!(",{}", curve[i]));
        }
        body.push('\n');
    }
    let curves_path = dir.join(format!("{}_curves.csv", config.id));
    write_file(&curves_path, &body)?;

    let mut alloc_body = String::from("iteration,strategy,channel,cumulative_samples\n");
    for (i, tuple) in curves.global_choice.iter().enumerate() {
        for (ch, &count) in tuple.iter().enumerate() {
            alloc_body.push_str(&format!("{},global,{},{}\n", i + 1, ch + 1, count));
        }
    }
    for (i, tuple) in curves.iterative_path.iter().enumerate() {
        for (ch, &count) in tuple.iter().enumerate() {
            alloc_body.push_str(&format!("{},iterative,{},{}\n", i + 1, ch + 1, count));
        }
    }
    for (gamma, per_iteration) in &curves.heuristic_cumulative {
        for (i, row) in per_iteration.iter().enumerate() {
            for (ch, &mean) in row.iter().enumerate() {
                alloc_body.push_str(&format!(
                    "{},heuristic_g{gamma},{},{mean}\n",
                    i + 1,
                    ch + 1
                ));
            }
        }
    }
    let alloc_path = dir.join(format!("{}_allocation.csv", config.id));
    write_file(&alloc_path, &alloc_body)?;

    let outputs = vec![
        curves_path.file_name().unwrap().to_string_lossy().into_owned(),
        alloc_path.file_name().unwrap().to_string_lossy().into_owned(),
    ];
    let manifest = write_manifest(dir, &config.id, config, config.base_seed, build, &outputs)?;
    Ok(vec![curves_path, alloc_path, manifest])
}

/// Write `{id}_entries.csv`, `{id}_cdf.csv` and the manifest.
pub fn emit_sweep_report(
    result: &SweepResult,
    config: &SweepConfig,
    dir: &Path,
    build: &str,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut body =
        String::from("budget,channels,set_index,gamma,iterations,reached,equal_iterations,equal_reached,ratio,betas\n");
    for e in &result.entries {
        let betas = e
            .betas
            .iter()
            .map(|b| format!("{b}"))
            .collect::<Vec<_>>()
            .join(";");
        body.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            e.budget,
            e.channels,
            e.set_index,
            e.gamma,
            e.iterations,
            e.reached,
            e.equal_iterations,
            e.equal_reached,
            e.ratio,
            betas
        ));
    }
    let entries_path = dir.join(format!("{}_entries.csv", config.id));
    write_file(&entries_path, &body)?;

    let mut cdf_body = String::from("gamma,ratio,cdf\n");
    for (gamma, points) in &result.cdf {
        for (x, f) in points {
            cdf_body.push_str(&format!("{gamma},{x},{f}\n"));
        }
    }
    let cdf_path = dir.join(format!("{}_cdf.csv", config.id));
    write_file(&cdf_path, &cdf_body)?;

    let outputs = vec![
        entries_path.file_name().unwrap().to_string_lossy().into_owned(),
        cdf_path.file_name().unwrap().to_string_lossy().into_owned(),
    ];
    let manifest = write_manifest(dir, &config.id, config, config.base_seed, build, &outputs)?;
    Ok(vec![entries_path, cdf_path, manifest])
}

/// Write `{id}_engines.csv` and the manifest.
pub fn emit_memory_report(
    result: &MemoryExperimentResult,
    config: &MemoryExperimentConfig,
    dir: &Path,
    build: &str,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let memoryless = result.engine("heuristic memoryless");
    let mut body = String::from("label,gamma,model,mean_rate,std_rate,gain_pp_vs_memoryless,rates\n");
    for engine in &result.engines {
        let gain = memoryless
            .map(|m| engine.gain_pp_over(m))
            .unwrap_or(f64::NAN);
        let model = match engine.model {
            MemoryModel::None => "none".to_string(),
            MemoryModel::Swa { window } => format!("swa_{window}"),
            MemoryModel::Ewma { alpha } => format!("ewma_{alpha}"),
        };
        let rates = engine
            .rates
            .iter()
            .map(|r| format!("{r}"))
            .collect::<Vec<_>>()
            .join(";");
        body.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            engine.label, engine.gamma, model, engine.mean_rate, engine.std_rate, gain, rates
        ));
    }
    let engines_path = dir.join(format!("{}_engines.csv", config.id));
    write_file(&engines_path, &body)?;
    let outputs = vec![engines_path
        .file_name()
        .unwrap()
        .to_string_lossy()
        .into_owned()];
    let manifest = write_manifest(dir, &config.id, config, config.base_seed, build, &outputs)?;
    Ok(vec![engines_path, manifest])
}

/// Write one reception CSV per (gamma, run), a summary CSV and the
/// manifest.
pub fn emit_platoon_report(
    result: &PlatoonExperimentResult,
    config: &PlatoonExperimentConfig,
    dir: &Path,
    build: &str,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    let mut summary =
        String::from("gamma,run,best_match_fraction,mean_success_last_follower,switches,switches_first_60s\n");
    for run in &result.runs {
        let label = format!("g{}", run.gamma).replace('-', "m");
        let path = dir.join(format!("{}_{}_run{}.csv", config.id, label, run.run));
        run.report.save(&path)?;
        let last = run.report.followers() - 1;
        summary.push_str(&format!(
            "{},{},{},{},{},{}\n",
            run.gamma,
            run.run,
            run.report.best_match_fraction(),
            run.report.mean_success(last),
            run.report.switch_times.len(),
            run.report.switches_before(60.0)
        ));
        paths.push(path);
    }
    let summary_path = dir.join(format!("{}_summary.csv", config.id));
    write_file(&summary_path, &summary)?;
    paths.push(summary_path);
    let outputs: Vec<String> = paths
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    let manifest = write_manifest(dir, &config.id, config, config.base_seed, build, &outputs)?;
    paths.push(manifest);
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_bounds_config() -> BoundsExperimentConfig {
        BoundsExperimentConfig {
            id: "test_bounds".into(),
            betas: vec![0.2, 0.35, 0.6, 0.8],
            budget: 8,
            horizon: 6,
            mc_runs: 2000,
            gammas: vec![-4.0],
            enumeration_cap: 10_000_000,
            frontier_cap: 64,
            base_seed: 42,
        }
    }

    #[test]
    fn mc_curves_stay_within_three_sigma_of_bounds() {
        let config = small_bounds_config();
        let curves = run_bounds_experiment(&config).unwrap();
        for i in 0..config.horizon {
            let p = curves.mc_iterative[i];
            let sigma = mc_sigma(p, config.mc_runs);
            assert!(
                curves.iterative[i].lower - 3.0 * sigma <= p
                    && p <= curves.iterative[i].upper + 3.0 * sigma,
                "iteration {}: mc {p} outside [{}, {}] +- 3s",
                i + 1,
                curves.iterative[i].lower,
                curves.iterative[i].upper
            );
        }
    }

    #[test]
    fn global_upper_dominates_iterative_upper() {
        let curves = run_bounds_experiment(&small_bounds_config()).unwrap();
        for i in 0..curves.global.len() {
            assert!(curves.global[i].upper >= curves.iterative[i].upper - 1e-9);
        }
    }

    #[test]
    fn sustained_crossing_ignores_transient_spikes() {
        let curve = [0.1, 0.96, 0.94, 0.97, 0.98];
        assert_eq!(sustained_crossing(&curve, 0.95), Some(4));
        assert_eq!(sustained_crossing(&[0.99, 0.99], 0.95), Some(1));
        assert_eq!(sustained_crossing(&[0.9, 0.94], 0.95), None);
    }

    #[test]
    fn bounds_experiment_is_deterministic() {
        let config = BoundsExperimentConfig {
            mc_runs: 500,
            horizon: 4,
            ..small_bounds_config()
        };
        let a = run_bounds_experiment(&config).unwrap();
        let b = run_bounds_experiment(&config).unwrap();
        assert_eq!(a.mc_equal, b.mc_equal);
        assert_eq!(a.mc_iterative, b.mc_iterative);
        assert_eq!(a.iterative_path, b.iterative_path);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let config = BoundsExperimentConfig {
            mc_runs: 2000,
            horizon: 3,
            ..small_bounds_config()
        };
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_bounds_experiment(&config).unwrap());
        let several = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| run_bounds_experiment(&config).unwrap());
        assert_eq!(single.mc_equal, several.mc_equal);
        assert_eq!(single.mc_heuristic, several.mc_heuristic);
    }

    #[test]
    fn degenerate_beta_set_reaches_threshold_immediately() {
        let config = SweepConfig {
            id: "degenerate".into(),
            nl_configs: vec![(3, 3)],
            beta_sets: 1,
            mc_runs: 200,
            gammas: vec![0.0, -2.0],
            threshold: 0.95,
            horizon: 20,
            base_seed: 9,
        };
        // Force the degenerate set by running the strategies directly.
        let channels = ChannelSet::new(vec![0.0, 1.0, 1.0]).unwrap();
        for strategy in [McStrategy::Equal, McStrategy::Heuristic { gamma: -2.0 }] {
            let curve = tally_to_curve(
                &mc_tally(&channels, 3, 5, 200, strategy, 1, &[0], false).success,
                200,
            );
            assert_eq!(sustained_crossing(&curve, config.threshold), Some(1));
        }
    }

    #[test]
    fn gamma_zero_ratio_is_exactly_one() {
        let config = SweepConfig {
            id: "zero".into(),
            nl_configs: vec![(4, 3)],
            beta_sets: 3,
            mc_runs: 300,
            gammas: vec![0.0],
            threshold: 0.9,
            horizon: 50,
            base_seed: 11,
        };
        let result = run_gamma_sweep(&config).unwrap();
        for entry in &result.entries {
            assert_eq!(entry.ratio, 1.0);
        }
    }

    #[test]
    fn sweep_cdf_is_monotone() {
        let config = SweepConfig {
            id: "cdf".into(),
            nl_configs: vec![(3, 3), (4, 4)],
            beta_sets: 4,
            mc_runs: 500,
            gammas: vec![-2.0],
            threshold: 0.95,
            horizon: 60,
            base_seed: 5,
        };
        let result = run_gamma_sweep(&config).unwrap();
        for (_, points) in &result.cdf {
            assert!(!points.is_empty());
            for pair in points.windows(2) {
                assert!(pair[0].0 <= pair[1].0);
                assert!(pair[0].1 <= pair[1].1);
            }
            assert!((points.last().unwrap().1 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn static_trace_converges_memory_and_memoryless() {
        // on a constant trace the selection rate differences wash out
        let scenario = TrafficScenario {
            vehicle_density_per_km_lane: 0.0,
            rsu_positions_km: vec![],
            rsu_channels: vec![],
            channel_baselines: vec![0.1, 0.6, 0.8],
            channel_choice_probs: vec![0.3, 0.3, 0.4],
            platoon_size: 4,
            ..TrafficScenario::default()
        };
        let config = MemoryExperimentConfig {
            id: "static".into(),
            scenario,
            duration_s: 200.0,
            seeds: 4,
            budget: 8,
            switching_cost: 0.1,
            gamma: -2.0,
            window_j: 10,
            swa_windows: vec![],
            ewma_alphas: vec![0.7],
            base_seed: 3,
        };
        let result = run_memory_experiment(&config).unwrap();
        let memoryless = result.engine("heuristic memoryless").unwrap();
        let ewma = result.engine("heuristic ewma a=0.7").unwrap();
        assert!((memoryless.mean_rate - ewma.mean_rate).abs() < 0.02);
        assert!(memoryless.mean_rate > 0.95);
    }

    #[test]
    fn manifest_hash_tracks_config_changes() {
        let a = serde_json::to_string(&small_bounds_config()).unwrap();
        let mut changed = small_bounds_config();
        changed.mc_runs += 1;
        let b = serde_json::to_string(&changed).unwrap();
        assert_ne!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a), config_hash(&a));
    }

    #[test]
    fn reports_are_byte_identical_across_runs() {
        let config = BoundsExperimentConfig {
            mc_runs: 300,
            horizon: 3,
            ..small_bounds_config()
        };
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let curves_a = run_bounds_experiment(&config).unwrap();
        let curves_b = run_bounds_experiment(&config).unwrap();
        emit_bounds_report(&curves_a, &config, dir_a.path(), "test").unwrap();
        emit_bounds_report(&curves_b, &config, dir_b.path(), "test").unwrap();
        for name in [
            format!("{}_curves.csv", config.id),
            format!("{}_allocation.csv", config.id),
            format!("{}_manifest.json", config.id),
        ] {
            let a = std::fs::read(dir_a.path().join(&name)).unwrap();
            let b = std::fs::read(dir_b.path().join(&name)).unwrap();
            assert_eq!(a, b, "{name} differs");
        }
    }

    #[test]
    fn platoon_experiment_pairs_runs_by_trace() {
        let scenario = TrafficScenario {
            platoon_size: 4,
            ..TrafficScenario::default()
        };
        let config = PlatoonExperimentConfig {
            id: "pair".into(),
            scenario,
            duration_s: 20.0,
            runs: 2,
            gammas: vec![0.0, -2.0],
            switching_cost: 0.1,
            window_j: 10,
            ewma_alpha: 0.7,
            base_seed: 8,
        };
        let result = run_platoon_experiment(&config).unwrap();
        assert_eq!(result.runs.len(), 4);
        // same run index means the same trace, so the reference sequences agree
        let a = result.report(0.0, 1).unwrap();
        let b = result.report(-2.0, 1).unwrap();
        assert_eq!(a.reference, b.reference);
    }
}
