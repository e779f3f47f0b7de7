//! Sensing-sample allocation strategies.
//!
//! Each iteration spends a budget of `N` sensing slots across `L`
//! channels. Strategies:
//!
//! - [`equal_allocation`]: floor split plus a randomly placed remainder.
//! - [`heuristic_allocation`]: exponential weighting `exp(gamma * est)`
//!   that concentrates slots on low-estimate channels; the best channel
//!   is weighted by the second-best estimate so the two leaders receive
//!   equal weight.
//! - [`global_optimal`]: exhaustive search over cumulative allocations
//!   maximizing the selection upper bound, unconstrained by history.
//! - [`iterative_optimal`]: the same search constrained to add exactly
//!   `N` new samples on top of the previous iteration's committed counts,
//!   carrying all tied maximizers forward in a [`SearchFrontier`].
//!
//! Both searches require the true CBRs and exist to compute reference
//! curves, not to run online.

use rayon::prelude::*;

use crate::bounds::{
    estimate_distribution_or_sentinel, min_distribution, success_bounds, DiscreteDistribution,
    MinDistributionPair, SuccessBounds,
};
use crate::model::{CbrEstimate, ChannelSet};
use crate::numeric::composition_count;
use crate::{Error, Result};

/// Per-iteration sample counts, summing exactly to the budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationPlan {
    counts: Vec<u64>,
}

impl AllocationPlan {
    pub fn new(counts: Vec<u64>, budget: u64) -> Result<Self> {
        let got: u64 = counts.iter().sum();
        if got != budget {
            return Err(Error::BudgetMismatch { got, budget });
        }
        Ok(AllocationPlan { counts })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn budget(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn into_counts(self) -> Vec<u64> {
        self.counts
    }
}

/// All weak compositions of `total` into `parts` non-negative parts.
///
/// Yields exactly `C(total + parts - 1, parts - 1)` tuples, starting from
/// `(total, 0, ..., 0)` and repeatedly moving one unit rightward.
pub struct Compositions {
    current: Vec<u64>,
    started: bool,
    done: bool,
}

impl Compositions {
    pub fn new(total: u64, parts: usize) -> Self {
        assert!(parts >= 1, "need at least one part");
        let mut current = vec![0; parts];
        current[0] = total;
        Compositions {
            current,
            started: false,
            done: false,
        }
    }

    fn advance(&mut self) -> bool {
        let parts = self.current.len();
        // rightmost position before the last that still has mass to move
        let Some(pivot) = (0..parts - 1).rev().find(|&j| self.current[j] > 0) else {
            return false;
        };
        self.current[pivot] -= 1;
        let tail: u64 = self.current[pivot + 1..].iter().sum();
        for slot in &mut self.current[pivot + 1..] {
            *slot = 0;
        }
        self.current[pivot + 1] = tail + 1;
        true
    }
}

impl Iterator for Compositions {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.current.clone());
        }
        if self.current.len() == 1 || !self.advance() {
            self.done = true;
            return None;
        }
        Some(self.current.clone())
    }
}

/// Every tuple `base + composition` distributing `total` extra samples.
pub fn enumerate_allocations(total: u64, base: Vec<u64>) -> impl Iterator<Item = Vec<u64>> {
    Compositions::new(total, base.len()).map(move |comp| {
        base.iter()
            .zip(&comp)
            .map(|(&b, &c)| b + c)
            .collect::<Vec<u64>>()
    })
}

/// Floor split of the budget with the remainder placed on distinct
/// channels chosen uniformly at random.
pub fn equal_allocation(budget: u64, channels: usize, rng: &mut impl rand::Rng) -> AllocationPlan {
    assert!(channels >= 1);
    let per_channel = budget / channels as u64;
    let remainder = (budget % channels as u64) as usize;
    let mut counts = vec![per_channel; channels];
    if remainder > 0 {
        for lucky in rand::seq::index::sample(rng, channels, remainder) {
            counts[lucky] += 1;
        }
    }
    AllocationPlan { counts }
}

/// Exponentially weighted allocation from the previous iteration's
/// estimates.
///
/// Weight `exp(gamma * est_l)` for every channel except the current best,
/// which gets the second-best channel's weight; raw shares are rounded by
/// largest remainder (ties to the lower channel index) so the counts sum
/// exactly to the budget. `gamma = 0` degenerates to an equal split.
pub fn heuristic_allocation(
    estimate: &CbrEstimate,
    gamma: f64,
    budget: u64,
) -> Result<AllocationPlan> {
    if gamma > 0.0 || !gamma.is_finite() {
        return Err(Error::InvalidGamma(gamma));
    }
    if estimate.is_empty() {
        return Err(Error::NoObservedChannel);
    }
    let values = estimate.values();
    let mut counts = vec![0u64; values.len()];
    let mut raw = vec![0.0; values.len()];
    let mut order = vec![0usize; values.len()];
    heuristic_fill(&values, gamma, budget, &mut counts, &mut raw, &mut order);
    Ok(AllocationPlan { counts })
}

/// Core of [`heuristic_allocation`] writing into caller-owned buffers;
/// hot Monte Carlo loops reuse the scratch across iterations.
pub(crate) fn heuristic_fill(
    values: &[f64],
    gamma: f64,
    budget: u64,
    counts: &mut [u64],
    raw: &mut [f64],
    order: &mut [usize],
) {
    let channels = values.len();
    if channels == 1 {
        counts[0] = budget;
        return;
    }
    let best = (0..channels)
        .min_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap())
        .unwrap();
    let second = (0..channels)
        .filter(|&l| l != best)
        .min_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap())
        .unwrap();
    // shift exponents by the maximum so extreme gamma cannot underflow
    // every weight at once
    let mut shift = f64::NEG_INFINITY;
    for l in 0..channels {
        let exponent = gamma * if l == best { values[second] } else { values[l] };
        raw[l] = exponent;
        shift = shift.max(exponent);
    }
    let mut weight_sum = 0.0;
    for slot in raw.iter_mut() {
        *slot = (*slot - shift).exp();
        weight_sum += *slot;
    }
    let mut assigned: u64 = 0;
    for l in 0..channels {
        raw[l] = budget as f64 * raw[l] / weight_sum;
        counts[l] = raw[l].floor() as u64;
        assigned += counts[l];
        order[l] = l;
    }
    order.sort_by(|&a, &b| {
        let ra = raw[a] - raw[a].floor();
        let rb = raw[b] - raw[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for &l in order.iter().take((budget - assigned) as usize) {
        counts[l] += 1;
    }
}

/// Caps and tolerances for the exhaustive searches.
#[derive(Debug, Clone, Copy)]
pub struct SearchConfig {
    /// Maximum number of tuples an exhaustive search may enumerate.
    pub enumeration_cap: u128,
    /// Maximum number of tied maximizers carried between iterations.
    pub frontier_cap: usize,
    /// Absolute tolerance for counting two upper bounds as tied.
    pub tie_tolerance: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            enumeration_cap: 10_000_000,
            frontier_cap: 64,
            tie_tolerance: 1e-12,
        }
    }
}

/// Per-channel estimate distributions for every count a search can touch.
struct DistCache {
    min_counts: Vec<u64>,
    dists: Vec<Vec<DiscreteDistribution>>,
}

impl DistCache {
    fn build(betas: &[f64], min_counts: &[u64], max_counts: &[u64]) -> Self {
        let dists = betas
            .iter()
            .enumerate()
            .map(|(l, &beta)| {
                (min_counts[l]..=max_counts[l])
                    .map(|n| {
                        estimate_distribution_or_sentinel(beta, n)
                            .expect("beta validated by ChannelSet")
                    })
                    .collect()
            })
            .collect();
        DistCache {
            min_counts: min_counts.to_vec(),
            dists,
        }
    }

    fn get(&self, channel: usize, count: u64) -> &DiscreteDistribution {
        &self.dists[channel][(count - self.min_counts[channel]) as usize]
    }

    fn eval(&self, optimal: &[usize], wrong: &[usize], counts: &[u64]) -> SuccessBounds {
        if wrong.is_empty() {
            return SuccessBounds::certain();
        }
        let gather = |idx: &[usize]| -> DiscreteDistribution {
            let refs: Vec<&DiscreteDistribution> =
                idx.iter().map(|&l| self.get(l, counts[l])).collect();
            min_distribution(&refs).expect("non-empty channel set")
        };
        let pair = MinDistributionPair {
            dist_b: gather(optimal),
            dist_c: gather(wrong),
        };
        success_bounds(&pair, optimal.len(), wrong.len())
    }
}

/// Result of the unconstrained cumulative search.
#[derive(Debug, Clone)]
pub struct GlobalOptimum {
    /// Lexicographically smallest bound-maximizing cumulative tuple.
    pub cumulative: Vec<u64>,
    /// The lexicographically smallest maximizers, capped at
    /// `SearchConfig::frontier_cap`.
    pub maximizers: Vec<Vec<u64>>,
    /// Total number of tuples tied for the maximum upper bound.
    pub tie_count: u64,
    /// Bounds of the chosen tuple.
    pub bounds: SuccessBounds,
}

/// Walk every composition of `free` extras over `base`, in parallel over
/// the first channel's share; `visit` maps each tuple, `fold`/`merge`
/// combine results associatively so the outcome is schedule-independent.
fn par_scan_allocations<T, FVisit, FMerge>(
    base: &[u64],
    free: u64,
    identity: T,
    visit: FVisit,
    merge: FMerge,
) -> T
where
    T: Clone + Send + Sync,
    FVisit: Fn(&[u64], T) -> T + Send + Sync,
    FMerge: Fn(T, T) -> T + Send + Sync,
{
    let channels = base.len();
    (0..=free)
        .into_par_iter()
        .map(|first_extra| {
            let mut acc = identity.clone();
            let mut tuple = base.to_vec();
            tuple[0] = base[0] + first_extra;
            if channels == 1 {
                if first_extra == free {
                    acc = visit(&tuple, acc);
                }
                return acc;
            }
            for comp in Compositions::new(free - first_extra, channels - 1) {
                for (slot, (&b, &c)) in tuple[1..].iter_mut().zip(base[1..].iter().zip(&comp)) {
                    *slot = b + c;
                }
                acc = visit(&tuple, acc);
            }
            acc
        })
        .reduce(|| identity.clone(), merge)
}

/// Exhaustive search for the cumulative allocation maximizing the upper
/// bound after `iteration` iterations of budget `budget`.
///
/// The first-iteration equal split `floor(budget/L)` per channel is kept
/// as a fixed base; only the remaining `iteration * budget - L * base`
/// samples are free. Ties within `tie_tolerance` are all maximizers; the
/// lexicographically smallest is the chosen one.
pub fn global_optimal(
    channels: &ChannelSet,
    budget: u64,
    iteration: usize,
    config: &SearchConfig,
) -> Result<GlobalOptimum> {
    assert!(iteration >= 1, "iterations are counted from 1");
    let l = channels.len();
    let per_channel = budget / l as u64;
    let base = vec![per_channel; l];
    let free = iteration as u64 * budget - l as u64 * per_channel;

    let count = composition_count(free, l);
    if count > config.enumeration_cap {
        return Err(Error::EnumerationCap {
            count,
            cap: config.enumeration_cap,
        });
    }

    let optimal = channels.optimal_set();
    let wrong = channels.wrong_set();
    let max_counts: Vec<u64> = base.iter().map(|&b| b + free).collect();
    let cache = DistCache::build(channels.betas(), &base, &max_counts);

    // pass 1: the exact maximum upper bound
    let max_upper = par_scan_allocations(
        &base,
        free,
        f64::NEG_INFINITY,
        |tuple, best: f64| best.max(cache.eval(&optimal, &wrong, tuple).upper),
        f64::max,
    );

    // pass 2: lexicographically smallest maximizers within tolerance
    let cap = config.frontier_cap;
    let tolerance = config.tie_tolerance;
    let (maximizers, tie_count) = par_scan_allocations(
        &base,
        free,
        (Vec::<Vec<u64>>::new(), 0u64),
        |tuple, (mut kept, ties)| {
            if cache.eval(&optimal, &wrong, tuple).upper >= max_upper - tolerance {
                let position = kept
                    .binary_search_by(|probe| probe.as_slice().cmp(tuple))
                    .unwrap_or_else(|p| p);
                if position < cap {
                    kept.insert(position, tuple.to_vec());
                    kept.truncate(cap);
                }
                (kept, ties + 1)
            } else {
                (kept, ties)
            }
        },
        |(a, ta), (b, tb)| {
            let mut merged = a;
            merged.extend(b);
            merged.sort_unstable();
            merged.truncate(cap);
            (merged, ta + tb)
        },
    );

    let cumulative = maximizers[0].clone();
    let bounds = cache.eval(&optimal, &wrong, &cumulative);
    Ok(GlobalOptimum {
        cumulative,
        maximizers,
        tie_count,
        bounds,
    })
}

/// The set of cumulative allocations currently tied for the best upper
/// bound, carried between iterations of the constrained search.
#[derive(Debug, Clone)]
pub struct SearchFrontier {
    iteration: usize,
    tuples: Vec<Vec<u64>>,
    parents: Vec<usize>,
    bounds: Option<SuccessBounds>,
    truncated: bool,
}

impl SearchFrontier {
    /// The state before any sensing iteration.
    pub fn initial(channels: usize) -> Self {
        SearchFrontier {
            iteration: 0,
            tuples: vec![vec![0; channels]],
            parents: vec![0],
            bounds: None,
            truncated: false,
        }
    }

    /// Number of committed iterations.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// The committed cumulative allocation: the lexicographically
    /// smallest of the tied maximizers.
    pub fn chosen(&self) -> &[u64] {
        &self.tuples[0]
    }

    pub fn tuples(&self) -> &[Vec<u64>] {
        &self.tuples
    }

    /// For each tuple, the index of its parent in the previous frontier.
    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    /// Bounds shared (within the tie tolerance) by all retained tuples.
    pub fn bounds(&self) -> Option<SuccessBounds> {
        self.bounds
    }

    /// True when the frontier cap forced dropping tied maximizers.
    pub fn truncated(&self) -> bool {
        self.truncated
    }
}

/// One iteration of the history-constrained search.
///
/// Each retained cumulative tuple is extended by every distribution of
/// `budget` new samples (the first iteration instead distributes the
/// remainder on top of the fixed `floor(budget/L)` base); all extensions
/// tied for the best upper bound are kept, capped at
/// `SearchConfig::frontier_cap` lexicographically smallest (a cap hit is
/// reported via [`SearchFrontier::truncated`]).
pub fn iterative_optimal(
    channels: &ChannelSet,
    budget: u64,
    frontier: &SearchFrontier,
    config: &SearchConfig,
) -> Result<SearchFrontier> {
    let l = channels.len();
    let optimal = channels.optimal_set();
    let wrong = channels.wrong_set();

    // (cumulative tuple, parent index) candidates
    let mut candidates: Vec<(Vec<u64>, usize)> = Vec::new();
    if frontier.iteration == 0 {
        let per_channel = budget / l as u64;
        let free = budget - l as u64 * per_channel;
        let base = vec![per_channel; l];
        for tuple in enumerate_allocations(free, base) {
            candidates.push((tuple, 0));
        }
    } else {
        let per_parent = composition_count(budget, l);
        let count = per_parent.saturating_mul(frontier.tuples.len() as u128);
        if count > config.enumeration_cap {
            return Err(Error::EnumerationCap {
                count,
                cap: config.enumeration_cap,
            });
        }
        for (parent, previous) in frontier.tuples.iter().enumerate() {
            for tuple in enumerate_allocations(budget, previous.clone()) {
                candidates.push((tuple, parent));
            }
        }
    }
    // identical cumulative tuples reachable from several parents collapse
    // to the lowest parent index
    candidates.sort_unstable();
    candidates.dedup_by(|a, b| a.0 == b.0);

    let evaluated: Vec<(SuccessBounds, usize)> = candidates
        .par_iter()
        .map(|(tuple, parent)| (DistCacheFree::eval(channels, &optimal, &wrong, tuple), *parent))
        .collect();

    let max_upper = evaluated
        .iter()
        .map(|(b, _)| b.upper)
        .fold(f64::NEG_INFINITY, f64::max);

    let mut tuples = Vec::new();
    let mut parents = Vec::new();
    let mut bounds = None;
    let mut truncated = false;
    for (candidate, (candidate_bounds, parent)) in candidates.iter().zip(&evaluated) {
        if candidate_bounds.upper >= max_upper - config.tie_tolerance {
            if tuples.len() == config.frontier_cap {
                truncated = true;
                break;
            }
            if bounds.is_none() {
                bounds = Some(*candidate_bounds);
            }
            tuples.push(candidate.0.clone());
            parents.push(*parent);
        }
    }
    Ok(SearchFrontier {
        iteration: frontier.iteration + 1,
        tuples,
        parents,
        bounds,
        truncated,
    })
}

/// Cache-free single evaluation used by the iterative search, where each
/// candidate count vector is distinct and caching buys little.
struct DistCacheFree;

impl DistCacheFree {
    fn eval(
        channels: &ChannelSet,
        optimal: &[usize],
        wrong: &[usize],
        counts: &[u64],
    ) -> SuccessBounds {
        if wrong.is_empty() {
            return SuccessBounds::certain();
        }
        let betas = channels.betas();
        let gather = |idx: &[usize]| -> DiscreteDistribution {
            let dists: Vec<DiscreteDistribution> = idx
                .iter()
                .map(|&l| {
                    estimate_distribution_or_sentinel(betas[l], counts[l])
                        .expect("beta validated by ChannelSet")
                })
                .collect();
            let refs: Vec<&DiscreteDistribution> = dists.iter().collect();
            min_distribution(&refs).expect("non-empty channel set")
        };
        let pair = MinDistributionPair {
            dist_b: gather(optimal),
            dist_c: gather(wrong),
        };
        success_bounds(&pair, optimal.len(), wrong.len())
    }
}

/// Reconstruct the committed cumulative path from a forward sweep of
/// frontiers: the ancestry of the lexicographically smallest final tuple.
/// Every ancestor is a maximizer of its own iteration, so the path
/// attains the frontier bound everywhere while adding exactly one budget
/// of samples per step.
pub fn committed_path(frontiers: &[SearchFrontier]) -> Vec<Vec<u64>> {
    let mut path = Vec::with_capacity(frontiers.len());
    let mut index = 0usize;
    for frontier in frontiers.iter().rev() {
        path.push(frontier.tuples[index].clone());
        index = frontier.parents[index];
    }
    path.reverse();
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::stream_rng;
    use rand::Rng;

    #[test]
    fn equal_split_exact_division() {
        let mut rng = stream_rng(1, &[]);
        let plan = equal_allocation(8, 4, &mut rng);
        assert_eq!(plan.counts(), &[2, 2, 2, 2]);
    }

    #[test]
    fn equal_split_remainder_properties() {
        for seed in 0..10_000u64 {
            let mut rng = stream_rng(seed, &[7]);
            let plan = equal_allocation(6, 4, &mut rng);
            assert_eq!(plan.budget(), 6);
            let max = plan.counts().iter().max().unwrap();
            let min = plan.counts().iter().min().unwrap();
            assert!(max - min <= 1, "plan {:?}", plan.counts());
            assert_eq!(plan.counts().iter().filter(|&&c| c == 2).count(), 2);
        }
    }

    #[test]
    fn equal_split_budget_below_channels() {
        let mut rng = stream_rng(3, &[]);
        let plan = equal_allocation(3, 4, &mut rng);
        assert_eq!(plan.budget(), 3);
        assert_eq!(plan.counts().iter().filter(|&&c| c == 1).count(), 3);
        assert_eq!(plan.counts().iter().filter(|&&c| c == 0).count(), 1);
    }

    #[test]
    fn compositions_count_and_uniqueness() {
        let tuples: Vec<Vec<u64>> = enumerate_allocations(2, vec![1, 1, 1, 1]).collect();
        assert_eq!(tuples.len(), 10);
        let mut unique = tuples.clone();
        unique.sort();
        unique.dedup();
        assert_eq!(unique.len(), 10);
        for t in &tuples {
            assert_eq!(t.iter().sum::<u64>(), 6);
        }
    }

    #[test]
    fn compositions_degenerate_cases() {
        let only: Vec<Vec<u64>> = enumerate_allocations(0, vec![2, 3]).collect();
        assert_eq!(only, vec![vec![2, 3]]);
        let mut pair: Vec<Vec<u64>> = enumerate_allocations(1, vec![0, 0]).collect();
        pair.sort();
        assert_eq!(pair, vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn composition_count_matches_enumeration() {
        for total in 0..6u64 {
            for parts in 1..5usize {
                let listed = Compositions::new(total, parts).count();
                assert_eq!(listed as u128, composition_count(total, parts));
            }
        }
    }

    #[test]
    fn heuristic_gamma_zero_is_equal_shape() {
        let est = CbrEstimate::from_counts(&[1, 9, 4, 2], &[10, 10, 10, 10]);
        let plan = heuristic_allocation(&est, 0.0, 10).unwrap();
        assert_eq!(plan.budget(), 10);
        let max = plan.counts().iter().max().unwrap();
        let min = plan.counts().iter().min().unwrap();
        assert!(max - min <= 1);
    }

    #[test]
    fn heuristic_worked_rounding_example() {
        // estimates (0.2, 0.35, 0.6, 0.8), gamma -2, budget 8:
        // weights (e^-0.7, e^-0.7, e^-1.2, e^-1.6), largest remainder.
        let est = CbrEstimate::from_counts(&[20, 35, 60, 80], &[100, 100, 100, 100]);
        let plan = heuristic_allocation(&est, -2.0, 8).unwrap();
        assert_eq!(plan.counts(), &[3, 3, 1, 1]);
    }

    #[test]
    fn heuristic_extreme_gamma_concentrates_on_two_leaders() {
        let est = CbrEstimate::from_counts(&[20, 35, 60, 80], &[100, 100, 100, 100]);
        let plan = heuristic_allocation(&est, -50.0, 9).unwrap();
        assert_eq!(plan.counts()[2], 0);
        assert_eq!(plan.counts()[3], 0);
        assert_eq!(plan.counts()[0] + plan.counts()[1], 9);
        // equal leader weights: counts differ by at most one
        assert!(plan.counts()[0].abs_diff(plan.counts()[1]) <= 1);
    }

    #[test]
    fn heuristic_rejects_positive_gamma() {
        let est = CbrEstimate::from_counts(&[1, 2], &[4, 4]);
        assert!(matches!(
            heuristic_allocation(&est, 0.5, 4),
            Err(Error::InvalidGamma(_))
        ));
    }

    #[test]
    fn heuristic_budget_conservation_property() {
        let mut rng = stream_rng(0xA110C, &[]);
        for _ in 0..500 {
            let l = rng.random_range(2..7);
            let busy: Vec<u64> = (0..l).map(|_| rng.random_range(0..=10)).collect();
            let est = CbrEstimate::from_counts(&busy, &vec![10; l]);
            let gamma = -rng.random_range(0.0..16.0);
            let budget = rng.random_range(1..=18);
            let plan = heuristic_allocation(&est, gamma, budget).unwrap();
            assert_eq!(plan.budget(), budget);
        }
    }

    #[test]
    fn global_first_iteration_has_single_tuple() {
        let channels = ChannelSet::new(vec![0.2, 0.35, 0.6, 0.8]).unwrap();
        let result = global_optimal(&channels, 8, 1, &SearchConfig::default()).unwrap();
        assert_eq!(result.cumulative, vec![2, 2, 2, 2]);
        assert_eq!(result.tie_count, 1);
    }

    #[test]
    fn global_enumeration_cap_is_enforced() {
        let channels = ChannelSet::new(vec![0.2, 0.35, 0.6, 0.8]).unwrap();
        let config = SearchConfig {
            enumeration_cap: 10,
            ..SearchConfig::default()
        };
        assert!(matches!(
            global_optimal(&channels, 8, 5, &config),
            Err(Error::EnumerationCap { .. })
        ));
    }

    #[test]
    fn iterative_trivial_betas_saturate_immediately() {
        let channels = ChannelSet::new(vec![0.0, 1.0, 1.0]).unwrap();
        let frontier = SearchFrontier::initial(3);
        let next = iterative_optimal(&channels, 6, &frontier, &SearchConfig::default()).unwrap();
        let bounds = next.bounds().unwrap();
        assert!((bounds.upper - 1.0).abs() < 1e-12);
        assert!((bounds.lower - 1.0).abs() < 1e-12);
    }

    #[test]
    fn frontier_tuples_never_shrink() {
        let mut rng = stream_rng(0xF408, &[]);
        for _ in 0..10 {
            let l = rng.random_range(2..=4);
            let betas: Vec<f64> = (0..l)
                .map(|_| f64::from(rng.random_range(0..=10u32)) / 10.0)
                .collect();
            let channels = ChannelSet::new(betas).unwrap();
            let budget = rng.random_range(2..=5);
            let mut frontier = SearchFrontier::initial(l);
            for _ in 0..4 {
                let next =
                    iterative_optimal(&channels, budget, &frontier, &SearchConfig::default())
                        .unwrap();
                for (tuple, &parent) in next.tuples().iter().zip(next.parents()) {
                    let previous = &frontier.tuples()[parent];
                    assert!(
                        tuple.iter().zip(previous.iter()).all(|(t, p)| t >= p),
                        "tuple {tuple:?} shrank below parent {previous:?}"
                    );
                    let added: u64 =
                        tuple.iter().sum::<u64>() - previous.iter().sum::<u64>();
                    if frontier.iteration() > 0 {
                        assert_eq!(added, budget);
                    }
                }
                frontier = next;
            }
        }
    }

    #[test]
    fn committed_path_is_monotone_and_budgeted() {
        let channels = ChannelSet::new(vec![0.2, 0.35, 0.6, 0.8]).unwrap();
        let budget = 6;
        let mut frontier = SearchFrontier::initial(4);
        let mut frontiers = Vec::new();
        for _ in 0..6 {
            frontier =
                iterative_optimal(&channels, budget, &frontier, &SearchConfig::default()).unwrap();
            frontiers.push(frontier.clone());
        }
        let path = committed_path(&frontiers);
        assert_eq!(path.len(), 6);
        for (i, tuple) in path.iter().enumerate() {
            assert_eq!(tuple.iter().sum::<u64>(), (i as u64 + 1) * budget);
            if i > 0 {
                assert!(tuple.iter().zip(&path[i - 1]).all(|(t, p)| t >= p));
            }
        }
    }

    #[test]
    fn global_bound_dominates_iterative() {
        let channels = ChannelSet::new(vec![0.2, 0.5, 0.8]).unwrap();
        let budget = 5;
        let config = SearchConfig::default();
        let mut frontier = SearchFrontier::initial(3);
        for iteration in 1..=5 {
            frontier = iterative_optimal(&channels, budget, &frontier, &config).unwrap();
            let global = global_optimal(&channels, budget, iteration, &config).unwrap();
            let iter_upper = frontier.bounds().unwrap().upper;
            assert!(
                global.bounds.upper >= iter_upper - 1e-12,
                "iteration {iteration}: global {} < iterative {iter_upper}",
                global.bounds.upper
            );
        }
    }
}
