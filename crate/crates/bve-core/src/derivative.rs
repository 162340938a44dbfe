//! Input distance, output distance, and the program derivative — the quality
//! measure for boundary candidates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sut::{ExecutionOutcome, InputPoint};

/// Output distance used by the program derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum OutputDistanceKind {
    /// Jaccard distance over 2-gram sets; the default everywhere.
    #[default]
    Jaccard2Gram,
    /// Absolute output-length difference; kept only for sensitivity analysis.
    StringLengthDiff,
}

/// Euclidean distance between two input points, exact integer differences
/// widened before the float norm.
pub fn input_distance(a: &InputPoint, b: &InputPoint) -> Result<f64> {
    if a.arity() != b.arity() {
        return Err(Error::ArityMismatch {
            sut: "<input_distance>".into(),
            expected: a.arity(),
            got: b.arity(),
        });
    }
    let sum: f64 = a
        .args()
        .iter()
        .zip(b.args())
        .map(|(&x, &y)| {
            let d = (x as i128 - y as i128) as f64;
            d * d
        })
        .sum();
    Ok(sum.sqrt())
}

/// The output as a string for distance purposes: the value itself, or the
/// exception kind with the message dropped.
pub fn output_string(o: &ExecutionOutcome) -> &str {
    o.class_string()
}

/// 2-grams of a string as a sorted, deduplicated list. A single character
/// contributes itself as the sole gram; the empty string contributes nothing.
fn gram_set(s: &str) -> Vec<u64> {
    let chars: Vec<char> = s.chars().collect();
    let mut grams: Vec<u64> = match chars.len() {
        0 => return Vec::new(),
        1 => vec![(chars[0] as u64) << 32],
        _ => chars
            .windows(2)
            .map(|w| ((w[0] as u64) << 32) | (w[1] as u64 + 1))
            .collect(),
    };
    grams.sort_unstable();
    grams.dedup();
    grams
}

/// Jaccard distance over unpadded 2-gram sets; 0 for identical strings, 1 for
/// gram-disjoint strings, and 0 when both are empty.
pub fn jaccard_2gram_distance(s1: &str, s2: &str) -> f64 {
    let (g1, g2) = (gram_set(s1), gram_set(s2));
    if g1.is_empty() && g2.is_empty() {
        return 0.0;
    }
    let mut inter = 0usize;
    let (mut i, mut j) = (0usize, 0usize);
    while i < g1.len() && j < g2.len() {
        match g1[i].cmp(&g2[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = g1.len() + g2.len() - inter;
    1.0 - inter as f64 / union as f64
}

fn output_distance(oa: &ExecutionOutcome, ob: &ExecutionOutcome, kind: OutputDistanceKind) -> f64 {
    let (s1, s2) = (output_string(oa), output_string(ob));
    match kind {
        OutputDistanceKind::Jaccard2Gram => jaccard_2gram_distance(s1, s2),
        OutputDistanceKind::StringLengthDiff => {
            (s1.chars().count() as f64 - s2.chars().count() as f64).abs()
        }
    }
}

/// Program derivative: output distance over input distance.
pub fn program_derivative(
    a: &InputPoint,
    b: &InputPoint,
    oa: &ExecutionOutcome,
    ob: &ExecutionOutcome,
    kind: OutputDistanceKind,
) -> Result<f64> {
    let di = input_distance(a, b)?;
    if di == 0.0 {
        return Err(Error::ZeroInputDistance);
    }
    Ok(output_distance(oa, ob, kind) / di)
}

/// A pair of close inputs with divergent outcomes and the derivative that
/// scores the divergence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCandidate {
    pub a: InputPoint,
    pub b: InputPoint,
    pub outcome_a: ExecutionOutcome,
    pub outcome_b: ExecutionOutcome,
    pub pd: f64,
}

impl BoundaryCandidate {
    /// Builds a candidate, computing the derivative. Fails on identical inputs.
    pub fn new(
        a: InputPoint,
        b: InputPoint,
        outcome_a: ExecutionOutcome,
        outcome_b: ExecutionOutcome,
        kind: OutputDistanceKind,
    ) -> Result<Self> {
        let pd = program_derivative(&a, &b, &outcome_a, &outcome_b, kind)?;
        Ok(BoundaryCandidate {
            a,
            b,
            outcome_a,
            outcome_b,
            pd,
        })
    }

    /// A candidate is a boundary candidate iff its derivative is positive.
    pub fn is_boundary(&self) -> bool {
        self.pd > 0.0
    }

    /// All 2×arity arguments as one flat vector: a's args then b's.
    pub fn flat_args(&self) -> Vec<i64> {
        let mut v = Vec::with_capacity(self.a.arity() * 2);
        v.extend_from_slice(self.a.args());
        v.extend_from_slice(self.b.args());
        v
    }
}
