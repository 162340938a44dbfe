//! Behavioral descriptors: map a boundary candidate to its 4-D archive cell.
//!
//! Coordinate order is fixed: total input length, input length variance,
//! output axis (pair-abstraction number for categorical subjects, output
//! length difference otherwise), exception count.

use serde::{Deserialize, Serialize};

use crate::derivative::BoundaryCandidate;
use crate::error::{Error, Result};
use crate::sut::{OutputKind, SutSpec};

/// Archive cell coordinate. Field order is the coordinate order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellCoord {
    pub total_input_length: u32,
    pub input_length_variance: u32,
    pub output_axis: u32,
    pub exception_count: u8,
}

impl CellCoord {
    pub fn as_array(&self) -> [u32; 4] {
        [
            self.total_input_length,
            self.input_length_variance,
            self.output_axis,
            self.exception_count as u32,
        ]
    }
}

impl std::fmt::Display for CellCoord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let [a, b, c, d] = self.as_array();
        write!(f, "[{a}, {b}, {c}, {d}]")
    }
}

/// Validity group of a candidate, derived from its exception count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ValidityGroup {
    /// Both outcomes valid.
    VV,
    /// One valid, one exception.
    VE,
    /// Both exceptions.
    EE,
}

impl ValidityGroup {
    pub fn from_exception_count(n: u8) -> Self {
        match n {
            0 => ValidityGroup::VV,
            1 => ValidityGroup::VE,
            _ => ValidityGroup::EE,
        }
    }
}

/// Number of exception outcomes in the pair: 0, 1 or 2.
pub fn exception_count(c: &BoundaryCandidate) -> u8 {
    c.outcome_a.is_exception() as u8 + c.outcome_b.is_exception() as u8
}

pub fn validity_group(c: &BoundaryCandidate) -> ValidityGroup {
    ValidityGroup::from_exception_count(exception_count(c))
}

fn arg_string_lengths(c: &BoundaryCandidate) -> Vec<u32> {
    c.flat_args()
        .iter()
        .map(|a| a.to_string().len() as u32)
        .collect()
}

/// Sum of the decimal-string lengths of all arguments of both inputs; a minus
/// sign counts as a character.
pub fn total_input_length(c: &BoundaryCandidate) -> u32 {
    arg_string_lengths(c).iter().sum()
}

/// Variance of the argument string lengths, floored to an integer cell index.
///
/// Bessel-corrected (n−1) variance with floor is the one convention that
/// reproduces every reference example cell, including the date rows.
pub fn input_length_variance(c: &BoundaryCandidate) -> u32 {
    let lengths = arg_string_lengths(c);
    let n = lengths.len() as f64;
    if lengths.len() < 2 {
        return 0;
    }
    let mean = lengths.iter().map(|&l| l as f64).sum::<f64>() / n;
    let ss: f64 = lengths
        .iter()
        .map(|&l| {
            let d = l as f64 - mean;
            d * d
        })
        .sum();
    (ss / (n - 1.0)).floor() as u32
}

/// Absolute difference of the full rendered output lengths (exceptions render
/// as `Kind("message")`).
pub fn output_length_difference(c: &BoundaryCandidate) -> u32 {
    let la = c.outcome_a.full_string().chars().count() as i64;
    let lb = c.outcome_b.full_string().chars().count() as i64;
    (la - lb).unsigned_abs() as u32
}

/// Index of the unordered class pair in row-major enumeration of distinct
/// pairs (i < j) over the declared vocabulary order. Self pairs cannot occur
/// for stored candidates (their output distance is zero) but get defined
/// indices appended after the C(n,2) distinct pairs.
pub fn output_abstraction_number(c: &BoundaryCandidate, sut: &SutSpec) -> Result<u32> {
    let vocabulary = match &sut.output_kind {
        OutputKind::Categorical { vocabulary, .. } => vocabulary,
        OutputKind::FreeForm => {
            return Err(Error::UnknownClass(format!(
                "SUT `{}` is not categorical",
                sut.name
            )))
        }
    };
    let pos = |class: &str| -> Result<usize> {
        vocabulary
            .iter()
            .position(|v| v == class)
            .ok_or_else(|| Error::UnknownClass(class.to_string()))
    };
    let pa = pos(c.outcome_a.class_string())?;
    let pb = pos(c.outcome_b.class_string())?;
    let (i, j) = (pa.min(pb), pa.max(pb));
    let n = vocabulary.len();
    if i == j {
        return Ok((n * (n - 1) / 2 + i) as u32);
    }
    let before: usize = (0..i).map(|k| n - 1 - k).sum();
    Ok((before + (j - i - 1)) as u32)
}

/// Assembles the four descriptors into the candidate's cell coordinate.
pub fn cell_coord(c: &BoundaryCandidate, sut: &SutSpec) -> Result<CellCoord> {
    let output_axis = match &sut.output_kind {
        OutputKind::Categorical { .. } => output_abstraction_number(c, sut)?,
        OutputKind::FreeForm => output_length_difference(c),
    };
    Ok(CellCoord {
        total_input_length: total_input_length(c),
        input_length_variance: input_length_variance(c),
        output_axis,
        exception_count: exception_count(c),
    })
}
