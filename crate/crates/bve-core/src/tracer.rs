//! Boundary refinement: prioritize archive cells by validity group, box a
//! local search region around each seed, and spread a fixed-size population
//! along the boundary inside it.

use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::archive::Archive;
use crate::budget::EvalGate;
use crate::derivative::{BoundaryCandidate, OutputDistanceKind};
use crate::descriptors::{validity_group, ValidityGroup};
use crate::error::{Error, Result};
use crate::explorer::{mutate, ExplorerConfig};
use crate::sut::{InputPoint, SutSpec};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TracerConfig {
    /// Seeds refined per tracer phase.
    pub n_top: usize,
    /// Validity-group shares of `n_top`: VV, VE, EE.
    pub group_quota: (f64, f64, f64),
    pub population_size: usize,
    /// Consecutive pd-sorted candidates used for bound estimation.
    pub window: usize,
}

impl Default for TracerConfig {
    fn default() -> Self {
        TracerConfig {
            n_top: 100,
            group_quota: (0.5, 0.4, 0.1),
            population_size: 30,
            window: 30,
        }
    }
}

/// Per-flattened-argument closed interval around a seed candidate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBounds {
    pub low: Vec<i64>,
    pub high: Vec<i64>,
}

impl SearchBounds {
    pub fn dims(&self) -> usize {
        self.low.len()
    }

    pub fn contains(&self, flat: &[i64]) -> bool {
        flat.len() == self.dims()
            && flat
                .iter()
                .enumerate()
                .all(|(k, &v)| self.low[k] <= v && v <= self.high[k])
    }

    fn clamp(&self, flat: &mut [i64]) {
        for (k, v) in flat.iter_mut().enumerate() {
            *v = (*v).clamp(self.low[k], self.high[k]);
        }
    }
}

/// One accepted replacement, kept for replaying the accept test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AcceptEvent {
    pub parent: BoundaryCandidate,
    pub child: BoundaryCandidate,
    pub comparison: BoundaryCandidate,
    pub f_parent: f64,
    pub f_child: f64,
}

/// Outcome of refining one seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TracePopulation {
    pub seed: BoundaryCandidate,
    pub bounds: SearchBounds,
    pub members: Vec<BoundaryCandidate>,
    pub accepts: Vec<AcceptEvent>,
}

/// Archive candidates sorted by pd descending; ties keep cell order so the
/// ranking is deterministic.
pub fn pd_sorted_candidates(archive: &Archive) -> Vec<BoundaryCandidate> {
    let mut all: Vec<BoundaryCandidate> = archive.entries().map(|e| e.candidate.clone()).collect();
    all.sort_by(|x, y| y.pd.partial_cmp(&x.pd).expect("pd is never NaN"));
    all
}

fn quota_take(config: &TracerConfig) -> [usize; 3] {
    let (vv, ve, ee) = config.group_quota;
    let mut take = [
        (vv * config.n_top as f64).ceil() as usize,
        (ve * config.n_top as f64).ceil() as usize,
        (ee * config.n_top as f64).ceil() as usize,
    ];
    // Ceiling can oversubscribe an odd n_top; trim lowest-priority groups.
    let mut total: usize = take.iter().sum();
    for slot in [2, 1, 0] {
        while total > config.n_top && take[slot] > 0 {
            take[slot] -= 1;
            total -= 1;
        }
    }
    take
}

/// Indices into the pd-sorted list selected for tracing: per-group pd-ranked
/// quota takes, shortfall refilled from the remaining best candidates, output
/// grouped VV, VE, EE.
pub fn prioritize_indices(pd_sorted: &[BoundaryCandidate], config: &TracerConfig) -> Vec<usize> {
    let group_of = |c: &BoundaryCandidate| match validity_group(c) {
        ValidityGroup::VV => 0usize,
        ValidityGroup::VE => 1,
        ValidityGroup::EE => 2,
    };
    let take = quota_take(config);
    let target = config.n_top.min(pd_sorted.len());

    let mut selected: [Vec<usize>; 3] = Default::default();
    let mut leftovers: Vec<usize> = Vec::new();
    for (idx, c) in pd_sorted.iter().enumerate() {
        let g = group_of(c);
        if selected[g].len() < take[g] {
            selected[g].push(idx);
        } else {
            leftovers.push(idx);
        }
    }
    let mut shortfall = target - selected.iter().map(Vec::len).sum::<usize>();
    // leftovers are already in pd order; greedily refill the shortfall
    for idx in leftovers {
        if shortfall == 0 {
            break;
        }
        selected[group_of(&pd_sorted[idx])].push(idx);
        shortfall -= 1;
    }
    for group in &mut selected {
        group.sort_unstable(); // pd order within the group
    }
    let mut out = Vec::with_capacity(target);
    for group in selected {
        out.extend(group);
    }
    out
}

/// The candidates selected for tracing, in VV, VE, EE block order.
pub fn prioritize(archive: &Archive, config: &TracerConfig) -> Vec<BoundaryCandidate> {
    let sorted = pd_sorted_candidates(archive);
    prioritize_indices(&sorted, config)
        .into_iter()
        .map(|i| sorted[i].clone())
        .collect()
}

fn median_round_half_up(sorted: &[u64]) -> u64 {
    let n = sorted.len();
    debug_assert!(n > 0);
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        let (a, b) = (sorted[n / 2 - 1] as u128, sorted[n / 2] as u128);
        (a + b).div_ceil(2) as u64
    }
}

/// Median offsets from the differences between consecutive pd-sorted
/// candidates, windowed starting at the seed and extended backward when the
/// tail is short; offsets floor at 1 so the region is never empty.
pub fn search_bounds(
    seed_index: usize,
    pd_sorted: &[BoundaryCandidate],
    window: usize,
) -> Result<SearchBounds> {
    let n = pd_sorted.len();
    if n < 2 {
        return Err(Error::InsufficientCandidates(n));
    }
    assert!(seed_index < n, "seed index out of range");
    let dims = pd_sorted[0].a.arity() * 2;

    // consecutive pairs (i, i+1) forward from the seed, then backward
    let mut pair_starts: Vec<usize> = Vec::with_capacity(window);
    let mut i = seed_index;
    while i + 1 < n && pair_starts.len() < window {
        pair_starts.push(i);
        i += 1;
    }
    let mut j = seed_index;
    while j > 0 && pair_starts.len() < window {
        j -= 1;
        pair_starts.push(j);
    }

    let seed_args = pd_sorted[seed_index].flat_args();
    let mut low = Vec::with_capacity(dims);
    let mut high = Vec::with_capacity(dims);
    for (k, &seed_arg) in seed_args.iter().enumerate() {
        let mut diffs: Vec<u64> = pair_starts
            .iter()
            .map(|&s| {
                let x = pd_sorted[s].flat_args()[k] as i128;
                let y = pd_sorted[s + 1].flat_args()[k] as i128;
                (x - y).unsigned_abs().min(u64::MAX as u128) as u64
            })
            .collect();
        diffs.sort_unstable();
        let offset = median_round_half_up(&diffs).max(1).min(i64::MAX as u64) as i64;
        low.push(seed_arg.saturating_sub(offset));
        high.push(seed_arg.saturating_add(offset));
    }
    Ok(SearchBounds { low, high })
}

/// Maximum Euclidean distance within the search region.
pub fn weight_w(bounds: &SearchBounds) -> f64 {
    bounds
        .low
        .iter()
        .zip(&bounds.high)
        .map(|(&lo, &hi)| {
            let w = (hi as i128 - lo as i128) as f64;
            w * w
        })
        .sum::<f64>()
        .sqrt()
}

fn candidate_distance(x: &BoundaryCandidate, y: &BoundaryCandidate) -> f64 {
    x.flat_args()
        .iter()
        .zip(y.flat_args())
        .map(|(&a, b)| {
            let d = (a as i128 - b as i128) as f64;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Two-candidate approximation of the spread-plus-quality objective:
/// `W * (pd(child) + pd(other)) + distance(child, other)`.
pub fn pair_objective(child: &BoundaryCandidate, other: &BoundaryCandidate, w: f64) -> f64 {
    w * (child.pd + other.pd) + candidate_distance(child, other)
}

fn sample_in_bounds<R: Rng + ?Sized>(
    rng: &mut R,
    bounds: &SearchBounds,
    range: std::ops::Range<usize>,
) -> InputPoint {
    InputPoint::new(
        range
            .map(|k| rng.gen_range(bounds.low[k]..=bounds.high[k]))
            .collect(),
    )
}

fn repair_identical(pair: &mut (InputPoint, InputPoint), bounds: &SearchBounds) {
    if pair.0 != pair.1 {
        return;
    }
    let arity = pair.0.arity();
    for k in 0..arity {
        if bounds.low[k] < bounds.high[k] {
            let v = pair.0.args()[k];
            pair.0 .0[k] = if v < bounds.high[k] { v + 1 } else { v - 1 };
            return;
        }
    }
    for k in arity..bounds.dims() {
        if bounds.low[k] < bounds.high[k] {
            let v = pair.1.args()[k - arity];
            pair.1 .0[k - arity] = if v < bounds.high[k] { v + 1 } else { v - 1 };
            return;
        }
    }
}

fn evaluate_pair(
    sut: &SutSpec,
    pair: (InputPoint, InputPoint),
    dist: OutputDistanceKind,
) -> Result<BoundaryCandidate> {
    let outcome_a = sut.evaluate(&pair.0)?;
    let outcome_b = sut.evaluate(&pair.1)?;
    BoundaryCandidate::new(pair.0, pair.1, outcome_a, outcome_b, dist)
}

/// Refines one seed: initialize a random population inside the bounds, then
/// replace uniformly chosen parents with mutated children whenever the child
/// scores higher against a shared comparison candidate. The population stays
/// exactly `population_size` members; results never feed back into the archive.
pub fn trace<R: Rng + ?Sized>(
    seed: &BoundaryCandidate,
    bounds: &SearchBounds,
    sut: &SutSpec,
    config: &TracerConfig,
    dist: OutputDistanceKind,
    gate: &mut EvalGate,
    rng: &mut R,
) -> Result<TracePopulation> {
    if config.population_size < 2 {
        // the comparison candidate must exclude the parent
        return Err(Error::InvalidConfig(
            "tracer population_size must be at least 2".into(),
        ));
    }
    let arity = sut.arity;
    let w = weight_w(bounds);

    let mut members = Vec::with_capacity(config.population_size);
    for _ in 0..config.population_size {
        let mut pair = (
            sample_in_bounds(rng, bounds, 0..arity),
            sample_in_bounds(rng, bounds, arity..2 * arity),
        );
        for _ in 0..64 {
            if pair.0 != pair.1 {
                break;
            }
            pair.1 = sample_in_bounds(rng, bounds, arity..2 * arity);
        }
        repair_identical(&mut pair, bounds);
        gate.force_spend(2);
        members.push(evaluate_pair(sut, pair, dist)?);
    }

    let mutate_config = ExplorerConfig::new(crate::archive::SelectionWeight::Uniform);
    let mut accepts = Vec::new();
    while gate.try_spend(2) {
        let parent_idx = rng.gen_range(0..members.len());
        let mut pair = mutate(&members[parent_idx], &mutate_config, rng)?;
        {
            let mut flat: Vec<i64> = pair.0.args().to_vec();
            flat.extend_from_slice(pair.1.args());
            bounds.clamp(&mut flat);
            pair = (
                InputPoint::new(flat[..arity].to_vec()),
                InputPoint::new(flat[arity..].to_vec()),
            );
        }
        repair_identical(&mut pair, bounds);
        let child = evaluate_pair(sut, pair, dist)?;

        // same comparison candidate for both sides, never the parent itself
        let mut comparison_idx = rng.gen_range(0..members.len() - 1);
        if comparison_idx >= parent_idx {
            comparison_idx += 1;
        }
        let comparison = &members[comparison_idx];
        let f_parent = pair_objective(&members[parent_idx], comparison, w);
        let f_child = pair_objective(&child, comparison, w);
        if f_child > f_parent {
            accepts.push(AcceptEvent {
                parent: members[parent_idx].clone(),
                child: child.clone(),
                comparison: comparison.clone(),
                f_parent,
                f_child,
            });
            members[parent_idx] = child;
        }
    }

    Ok(TracePopulation {
        seed: seed.clone(),
        bounds: bounds.clone(),
        members,
        accepts,
    })
}

/// Tracer phase budget: evaluations or wall-clock time, divided equally
/// across the selected seeds.
#[derive(Debug, Clone, Copy)]
pub enum TracerBudget {
    Evaluations(u64),
    Duration(Duration),
}

/// Prioritizes seeds and traces each with an equal share of the phase budget.
/// Returns the populations and the number of evaluations spent.
pub fn run_tracer<R: Rng + ?Sized>(
    archive: &Archive,
    sut: &SutSpec,
    config: &TracerConfig,
    dist: OutputDistanceKind,
    budget: TracerBudget,
    rng: &mut R,
) -> Result<(Vec<TracePopulation>, u64)> {
    if archive.is_empty() {
        return Err(Error::EmptyArchive);
    }
    let pd_sorted = pd_sorted_candidates(archive);
    let seed_indices = prioritize_indices(&pd_sorted, config);
    if pd_sorted.len() < 2 {
        return Err(Error::InsufficientCandidates(pd_sorted.len()));
    }

    let n_seeds = seed_indices.len() as u64;
    let init_cost = 2 * config.population_size as u64;
    let mut populations = Vec::with_capacity(seed_indices.len());
    let mut spent = 0u64;
    match budget {
        TracerBudget::Evaluations(total) => {
            let share = total / n_seeds;
            for &seed_idx in &seed_indices {
                let remaining = total - spent;
                // a seed only starts if its population can be fully evaluated
                if remaining < init_cost {
                    break;
                }
                let allowance = share.max(init_cost).min(remaining);
                let mut gate = EvalGate::evaluations(allowance);
                let bounds = search_bounds(seed_idx, &pd_sorted, config.window)?;
                let pop = trace(
                    &pd_sorted[seed_idx],
                    &bounds,
                    sut,
                    config,
                    dist,
                    &mut gate,
                    rng,
                )?;
                spent += gate.used();
                populations.push(pop);
            }
        }
        TracerBudget::Duration(total) => {
            let share = total / n_seeds.max(1) as u32;
            let end = Instant::now() + total;
            for &seed_idx in &seed_indices {
                if Instant::now() >= end {
                    break;
                }
                let deadline = (Instant::now() + share).min(end);
                let mut gate = EvalGate::deadline(deadline);
                let bounds = search_bounds(seed_idx, &pd_sorted, config.window)?;
                let pop = trace(
                    &pd_sorted[seed_idx],
                    &bounds,
                    sut,
                    config,
                    dist,
                    &mut gate,
                    rng,
                )?;
                spent += gate.used();
                populations.push(pop);
            }
        }
    }
    Ok((populations, spent))
}
