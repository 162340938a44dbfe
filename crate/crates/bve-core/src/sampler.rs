//! Random archive population: uniform 64-bit sampling and compatible-type
//! sampling with bituniform magnitudes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::archive::{Archive, Phase};
use crate::budget::EvalGate;
use crate::derivative::{BoundaryCandidate, OutputDistanceKind};
use crate::error::Result;
use crate::sut::{InputPoint, SutSpec};

/// How the sampler draws input points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum SamplerKind {
    /// Uniform over the whole signed 64-bit range (the weak baseline).
    UniformInt64,
    /// Compatible-type sampling over width classes with bituniform magnitudes;
    /// the default everywhere.
    #[default]
    CtsBituniform,
}

impl std::fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SamplerKind::UniformInt64 => "rand64",
            SamplerKind::CtsBituniform => "cts_bu",
        };
        f.write_str(s)
    }
}

/// Bituniform draw: width uniform in [0, max_bits], magnitude uniform in
/// [0, 2^width), then a uniform sign. Biased toward small magnitudes while
/// keeping full-range reach; i64::MIN is unreachable by construction.
pub fn sample_bituniform<R: Rng + ?Sized>(rng: &mut R, max_bits: u32) -> i64 {
    debug_assert!(max_bits <= 63);
    let width = rng.gen_range(0..=max_bits);
    let magnitude = if width == 0 {
        0u64
    } else {
        rng.gen_range(0..(1u64 << width))
    };
    let value = magnitude as i64;
    if rng.gen_bool(0.5) {
        -value
    } else {
        value
    }
}

/// Integer width classes sharing the supertype: boolean through 64-bit.
const WIDTH_CLASSES: &[u32] = &[1, 8, 16, 32, 64];

pub(crate) fn choose_width_class<R: Rng + ?Sized>(rng: &mut R) -> u32 {
    WIDTH_CLASSES[rng.gen_range(0..WIDTH_CLASSES.len())]
}

fn sample_cts_arg<R: Rng + ?Sized>(rng: &mut R) -> i64 {
    match choose_width_class(rng) {
        1 => rng.gen_range(0..=1),
        class => sample_bituniform(rng, class - 1),
    }
}

/// Compatible-type sampling: each argument independently picks a width class,
/// then draws bituniformly within it.
pub fn sample_cts_point<R: Rng + ?Sized>(rng: &mut R, arity: usize) -> InputPoint {
    InputPoint::new((0..arity).map(|_| sample_cts_arg(rng)).collect())
}

fn sample_point<R: Rng + ?Sized>(rng: &mut R, arity: usize, kind: SamplerKind) -> InputPoint {
    match kind {
        SamplerKind::UniformInt64 => {
            InputPoint::new((0..arity).map(|_| rng.gen::<i64>()).collect())
        }
        SamplerKind::CtsBituniform => sample_cts_point(rng, arity),
    }
}

/// Redraw allowance before the degenerate-pair repair kicks in.
const REDRAW_LIMIT: usize = 64;

/// Draws a pair of distinct points, redrawing the second a bounded number of
/// times and nudging one argument as a last resort.
pub(crate) fn distinct_pair<R: Rng + ?Sized>(
    rng: &mut R,
    mut draw: impl FnMut(&mut R) -> InputPoint,
) -> (InputPoint, InputPoint) {
    let a = draw(rng);
    for _ in 0..REDRAW_LIMIT {
        let b = draw(rng);
        if b != a {
            return (a, b);
        }
    }
    let mut args = a.args().to_vec();
    let k = rng.gen_range(0..args.len());
    let nudged = args[k].saturating_add(1);
    args[k] = if nudged == args[k] {
        args[k] - 1
    } else {
        nudged
    };
    (a, InputPoint::new(args))
}

/// Draws two input points per `kind`, evaluates them and computes the
/// derivative. Costs exactly two SUT evaluations.
pub fn sample_candidate<R: Rng + ?Sized>(
    rng: &mut R,
    sut: &SutSpec,
    kind: SamplerKind,
    dist: OutputDistanceKind,
) -> Result<BoundaryCandidate> {
    let (a, b) = distinct_pair(rng, |rng| sample_point(rng, sut.arity, kind));
    let outcome_a = sut.evaluate(&a)?;
    let outcome_b = sut.evaluate(&b)?;
    BoundaryCandidate::new(a, b, outcome_a, outcome_b, dist)
}

/// Offer counts for one phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseStats {
    pub offers: u64,
    pub new_cells: u64,
    pub improved: u64,
    pub rejected: u64,
    pub evaluations: u64,
}

impl PhaseStats {
    pub(crate) fn record(&mut self, outcome: crate::archive::AddOutcome) {
        self.offers += 1;
        match outcome {
            crate::archive::AddOutcome::NewCell => self.new_cells += 1,
            crate::archive::AddOutcome::Improved => self.improved += 1,
            crate::archive::AddOutcome::Rejected => self.rejected += 1,
        }
    }
}

/// Samples and offers candidates until the gate runs out.
pub fn run_sampler<R: Rng + ?Sized>(
    archive: &mut Archive,
    sut: &SutSpec,
    kind: SamplerKind,
    dist: OutputDistanceKind,
    gate: &mut EvalGate,
    rng: &mut R,
) -> Result<PhaseStats> {
    let mut stats = PhaseStats::default();
    while gate.try_spend(2) {
        let candidate = sample_candidate(rng, sut, kind, dist)?;
        let outcome = archive.offer(candidate, sut, Phase::Sampler)?;
        stats.record(outcome);
    }
    stats.evaluations = gate.used();
    Ok(stats)
}
