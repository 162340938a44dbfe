//! Archive evolution: select a parent, pull its input pair closer through a
//! random midpoint, then shift one argument by a random step and offer the
//! child back.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::archive::{Archive, Phase, SelectionWeight};
use crate::budget::EvalGate;
use crate::derivative::{input_distance, BoundaryCandidate, OutputDistanceKind};
use crate::error::{Error, Result};
use crate::sampler::PhaseStats;
use crate::sut::{InputPoint, SutSpec};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExplorerConfig {
    pub selection: SelectionWeight,
    /// Fraction range for the midpoint draw; strictly inside (0, 1).
    pub midpoint_range: (f64, f64),
}

impl ExplorerConfig {
    pub fn new(selection: SelectionWeight) -> Self {
        ExplorerConfig {
            selection,
            midpoint_range: (0.25, 0.75),
        }
    }
}

/// The random choices one mutation consumes, separated from the arithmetic so
/// the operator can be exercised with pinned draws.
#[derive(Debug, Clone, Copy)]
pub(crate) struct MutationDraw {
    /// Midpoint fraction along the segment from a to b.
    pub t: f64,
    /// Which original input the child pair keeps.
    pub keep_first: bool,
    /// Step size as a fraction of the parent pair distance, in (0, 1].
    pub step_fraction: f64,
    pub step_negative: bool,
    /// Flattened argument index (over both points) the step lands on.
    pub target_index: usize,
}

fn midpoint_component(a: i64, b: i64, t: f64) -> i64 {
    let delta = (b as i128 - a as i128) as f64;
    let shifted = a as i128 + (t * delta).round() as i128;
    shifted.clamp(a.min(b) as i128, a.max(b) as i128) as i64
}

fn flat_get(pair: &(InputPoint, InputPoint), idx: usize) -> i64 {
    let arity = pair.0.arity();
    if idx < arity {
        pair.0.args()[idx]
    } else {
        pair.1.args()[idx - arity]
    }
}

fn flat_set(pair: &mut (InputPoint, InputPoint), idx: usize, value: i64) {
    let arity = pair.0.arity();
    if idx < arity {
        pair.0 .0[idx] = value;
    } else {
        pair.1 .0[idx - arity] = value;
    }
}

pub(crate) fn apply_mutation(
    parent_a: &InputPoint,
    parent_b: &InputPoint,
    draw: MutationDraw,
) -> (InputPoint, InputPoint) {
    let mid = InputPoint::new(
        parent_a
            .args()
            .iter()
            .zip(parent_b.args())
            .map(|(&x, &y)| midpoint_component(x, y, draw.t))
            .collect(),
    );
    let kept = if draw.keep_first {
        parent_a.clone()
    } else {
        parent_b.clone()
    };
    let mut pair = (mid, kept);

    let distance = input_distance(parent_a, parent_b).expect("parents share arity");
    let magnitude = ((draw.step_fraction * distance).round() as i64).max(1);
    let step = if draw.step_negative {
        -magnitude
    } else {
        magnitude
    };

    // Re-apply to another argument (then with the sign flipped) if the step
    // cancels the pair into identity or saturates into a no-op.
    let dims = pair.0.arity() * 2;
    for flip in [false, true] {
        for offset in 0..dims {
            let idx = (draw.target_index + offset) % dims;
            let s = if flip { -step } else { step };
            let before = flat_get(&pair, idx);
            flat_set(&mut pair, idx, before.saturating_add(s));
            if pair.0 != pair.1 {
                return pair;
            }
            flat_set(&mut pair, idx, before);
        }
    }
    // Unreachable for a distinct parent pair: some coordinate always admits a
    // move in one of the two directions.
    pair
}

/// Mutates a parent pair per the midpoint-plus-step operator. All arithmetic
/// saturates at the i64 bounds and the result is never an identical pair.
pub fn mutate<R: Rng + ?Sized>(
    parent: &BoundaryCandidate,
    config: &ExplorerConfig,
    rng: &mut R,
) -> Result<(InputPoint, InputPoint)> {
    if parent.a == parent.b {
        return Err(Error::DegenerateParent);
    }
    let (lo, hi) = config.midpoint_range;
    let draw = MutationDraw {
        t: rng.gen_range(lo..=hi),
        keep_first: rng.gen_bool(0.5),
        step_fraction: 1.0 - rng.gen::<f64>(), // (0, 1]
        step_negative: rng.gen_bool(0.5),
        target_index: rng.gen_range(0..parent.a.arity() * 2),
    };
    Ok(apply_mutation(&parent.a, &parent.b, draw))
}

/// Mutation loop: select, mutate, evaluate, offer, update curiosity, until the
/// gate runs out. Children with pd == 0 still count as rejections and cost the
/// parent curiosity.
pub fn run_explorer<R: Rng + ?Sized>(
    archive: &mut Archive,
    sut: &SutSpec,
    config: &ExplorerConfig,
    dist: OutputDistanceKind,
    gate: &mut EvalGate,
    rng: &mut R,
) -> Result<PhaseStats> {
    let mut stats = PhaseStats::default();
    while gate.try_spend(2) {
        let (parent_cell, parent_token, parent) = {
            let entry = archive.select_weighted(config.selection, rng)?;
            (entry.cell, entry.token, entry.candidate.clone())
        };
        let (a, b) = mutate(&parent, config, rng)?;
        let outcome_a = sut.evaluate(&a)?;
        let outcome_b = sut.evaluate(&b)?;
        let child = BoundaryCandidate::new(a, b, outcome_a, outcome_b, dist)?;
        let outcome = archive.offer(child, sut, Phase::Explorer)?;
        stats.record(outcome);
        archive.update_curiosity(&parent_cell, parent_token, outcome);
    }
    stats.evaluations = gate.used();
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::archive::Archive;
    use crate::sampler::{run_sampler, SamplerKind};
    use crate::sut::{find_sut, ExecutionOutcome};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pt(args: &[i64]) -> InputPoint {
        InputPoint::new(args.to_vec())
    }

    fn parent(a: &[i64], b: &[i64]) -> BoundaryCandidate {
        BoundaryCandidate {
            a: pt(a),
            b: pt(b),
            outcome_a: ExecutionOutcome::value("x"),
            outcome_b: ExecutionOutcome::value("y"),
            pd: 1.0,
        }
    }

    #[test]
    fn hand_traced_operator() {
        // t pinned to 0.5, keep the first input, +1 step on the midpoint:
        // ((0),(100)) -> midpoint (50), pair ((50),(0)), stepped to ((51),(0)).
        let got = apply_mutation(
            &pt(&[0]),
            &pt(&[100]),
            MutationDraw {
                t: 0.5,
                keep_first: true,
                step_fraction: 0.001, // rounds to 0, floored to magnitude 1
                step_negative: false,
                target_index: 0,
            },
        );
        assert_eq!(got, (pt(&[51]), pt(&[0])));
    }

    #[test]
    fn adjacent_parent_stays_distinct() {
        // a == b + 1: the midpoint rounds onto an endpoint, the step must
        // still leave a usable pair.
        for t in [0.25, 0.5, 0.75] {
            for keep_first in [true, false] {
                for negative in [true, false] {
                    let got = apply_mutation(
                        &pt(&[6]),
                        &pt(&[5]),
                        MutationDraw {
                            t,
                            keep_first,
                            step_fraction: 1.0,
                            step_negative: negative,
                            target_index: 0,
                        },
                    );
                    assert_ne!(got.0, got.1, "t={t} keep_first={keep_first} neg={negative}");
                }
            }
        }
    }

    #[test]
    fn mutation_properties_hold_over_random_parents() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let config = ExplorerConfig::new(SelectionWeight::Uniform);
        for _ in 0..10_000 {
            use rand::Rng;
            let arity = rng.gen_range(1..=3);
            let a: Vec<i64> = (0..arity)
                .map(|_| rng.gen::<i64>() >> rng.gen_range(0..40))
                .collect();
            let mut b: Vec<i64> = (0..arity)
                .map(|_| rng.gen::<i64>() >> rng.gen_range(0..40))
                .collect();
            if a == b {
                b[0] = b[0].wrapping_add(1);
            }
            let p = parent(&a, &b);

            let (lo, hi) = config.midpoint_range;
            let draw = MutationDraw {
                t: rng.gen_range(lo..=hi),
                keep_first: rng.gen_bool(0.5),
                step_fraction: 1.0 - rng.gen::<f64>(),
                step_negative: rng.gen_bool(0.5),
                target_index: rng.gen_range(0..arity * 2),
            };

            // pre-step betweenness: every midpoint component within the
            // parent's componentwise hull, which implies the Euclidean bound
            let mid: Vec<i64> =
                p.a.args()
                    .iter()
                    .zip(p.b.args())
                    .map(|(&x, &y)| midpoint_component(x, y, draw.t))
                    .collect();
            for ((&m, &x), &y) in mid.iter().zip(p.a.args()).zip(p.b.args()) {
                assert!(
                    m >= x.min(y) && m <= x.max(y),
                    "midpoint {m} outside [{x},{y}]"
                );
            }
            let kept = if draw.keep_first { &p.a } else { &p.b };
            let pre_step = input_distance(&pt(&mid), kept).unwrap();
            let parent_dist = input_distance(&p.a, &p.b).unwrap();
            assert!(pre_step <= parent_dist * (1.0 + 1e-9));

            let (ca, cb) = apply_mutation(&p.a, &p.b, draw);
            assert_ne!(ca, cb, "mutation produced an identical pair");
        }
    }

    #[test]
    fn mutate_rejects_degenerate_parent() {
        let p = parent(&[3, 3], &[3, 3]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            mutate(&p, &ExplorerConfig::new(SelectionWeight::Uniform), &mut rng),
            Err(Error::DegenerateParent)
        ));
    }

    #[test]
    fn saturated_corner_still_moves() {
        let got = apply_mutation(
            &pt(&[i64::MAX]),
            &pt(&[i64::MAX - 1]),
            MutationDraw {
                t: 0.75,
                keep_first: true,
                step_fraction: 1.0,
                step_negative: false, // +1 at MAX saturates; operator must recover
                target_index: 0,
            },
        );
        assert_ne!(got.0, got.1);
    }

    fn seeded_archive(seed: u64, evals: u64) -> Archive {
        let sut = find_sut("bytecount").unwrap();
        let mut archive = Archive::new();
        let mut gate = EvalGate::evaluations(evals);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        run_sampler(
            &mut archive,
            &sut,
            SamplerKind::CtsBituniform,
            OutputDistanceKind::Jaccard2Gram,
            &mut gate,
            &mut rng,
        )
        .unwrap();
        archive
    }

    #[test]
    fn zero_budget_leaves_archive_unchanged() {
        let sut = find_sut("bytecount").unwrap();
        let mut archive = seeded_archive(11, 1_000);
        let before: Vec<_> = archive
            .snapshot()
            .iter()
            .map(|e| (e.cell, e.candidate.pd.to_bits()))
            .collect();
        let mut gate = EvalGate::evaluations(0);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        run_explorer(
            &mut archive,
            &sut,
            &ExplorerConfig::new(SelectionWeight::Uniform),
            OutputDistanceKind::Jaccard2Gram,
            &mut gate,
            &mut rng,
        )
        .unwrap();
        let after: Vec<_> = archive
            .snapshot()
            .iter()
            .map(|e| (e.cell, e.candidate.pd.to_bits()))
            .collect();
        assert_eq!(before, after);
    }

    #[test]
    fn explorer_never_loses_coverage_or_quality() {
        let sut = find_sut("bytecount").unwrap();
        let mut archive = seeded_archive(13, 2_000);
        let before: std::collections::BTreeMap<_, _> = archive
            .snapshot()
            .into_iter()
            .map(|e| (e.cell, e.candidate.pd))
            .collect();
        let mut gate = EvalGate::evaluations(10_000);
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        run_explorer(
            &mut archive,
            &sut,
            &ExplorerConfig::new(SelectionWeight::Uniform),
            OutputDistanceKind::Jaccard2Gram,
            &mut gate,
            &mut rng,
        )
        .unwrap();
        assert!(archive.len() >= before.len());
        for (cell, pd) in before {
            assert!(archive.get(&cell).unwrap().candidate.pd >= pd);
        }
    }

    #[test]
    fn empty_archive_with_budget_errors() {
        let sut = find_sut("bytecount").unwrap();
        let mut archive = Archive::new();
        let mut gate = EvalGate::evaluations(10);
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        assert!(matches!(
            run_explorer(
                &mut archive,
                &sut,
                &ExplorerConfig::new(SelectionWeight::Uniform),
                OutputDistanceKind::Jaccard2Gram,
                &mut gate,
                &mut rng,
            ),
            Err(Error::EmptyArchive)
        ));
    }

    #[test]
    fn seeded_explorer_is_deterministic() {
        let run = |seed: u64| {
            let sut = find_sut("bytecount").unwrap();
            let mut archive = seeded_archive(16, 1_000);
            let mut gate = EvalGate::evaluations(5_000);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            run_explorer(
                &mut archive,
                &sut,
                &ExplorerConfig::new(SelectionWeight::Curiosity),
                OutputDistanceKind::Jaccard2Gram,
                &mut gate,
                &mut rng,
            )
            .unwrap();
            archive
                .snapshot()
                .iter()
                .map(|e| {
                    format!(
                        "{} {} {} {} {}",
                        e.cell, e.candidate.a, e.candidate.b, e.candidate.pd, e.curiosity
                    )
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(run(77), run(77));
    }
}
