//! Post-run analysis: the boundariness threshold filter, relative program
//! derivative, relative archive coverage, and pairwise unique-cell matrices.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::derivative::{BoundaryCandidate, OutputDistanceKind};
use crate::descriptors::{cell_coord, CellCoord};
use crate::error::{Error, Result};
use crate::sut::{ExecutionOutcome, InputPoint, SutSpec};

/// A candidate reduced to what the metrics need.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredCell {
    pub cell: CellCoord,
    pub pd: f64,
}

/// Keeps every pd == 1 candidate plus the top 1% of the rest by pd (ceiling
/// count, ties at the cutoff included). Returns the resulting threshold and
/// the surviving candidates in input order.
pub fn boundariness_filter(candidates: &[ScoredCell]) -> Result<(f64, Vec<ScoredCell>)> {
    if candidates.is_empty() {
        return Err(Error::EmptyInput("boundariness filter needs candidates"));
    }
    let mut rest: Vec<f64> = candidates
        .iter()
        .map(|c| c.pd)
        .filter(|&pd| pd != 1.0)
        .collect();
    let threshold = if rest.is_empty() {
        1.0
    } else {
        rest.sort_by(|a, b| b.partial_cmp(a).expect("pd is never NaN"));
        let keep = (rest.len() as f64 / 100.0).ceil() as usize;
        rest[keep - 1]
    };
    let filtered = candidates
        .iter()
        .copied()
        .filter(|c| passes_threshold(c.pd, threshold))
        .collect();
    Ok((threshold, filtered))
}

/// The filter predicate; filtering by a fixed threshold is idempotent.
pub fn passes_threshold(pd: f64, threshold: f64) -> bool {
    pd == 1.0 || pd >= threshold
}

/// Empirical bests aggregated across all runs and strategies of one SUT.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateUniverse {
    /// Best observed pd per cell, over the unfiltered pool.
    pub cell_best_pd: BTreeMap<CellCoord, f64>,
    /// Cells holding at least one threshold-surviving candidate.
    pub feasible_cells: BTreeSet<CellCoord>,
    pub threshold_pd: f64,
}

impl CandidateUniverse {
    /// Builds the universe from the pooled candidates of every run, strategy,
    /// and import supplied to the analysis.
    pub fn build(pool: &[ScoredCell]) -> Result<Self> {
        let (threshold_pd, filtered) = boundariness_filter(pool)?;
        let mut cell_best_pd: BTreeMap<CellCoord, f64> = BTreeMap::new();
        for c in pool {
            let best = cell_best_pd.entry(c.cell).or_insert(c.pd);
            if c.pd > *best {
                *best = c.pd;
            }
        }
        let feasible_cells = filtered.iter().map(|c| c.cell).collect();
        Ok(CandidateUniverse {
            cell_best_pd,
            feasible_cells,
            threshold_pd,
        })
    }

    pub fn passes(&self, pd: f64) -> bool {
        passes_threshold(pd, self.threshold_pd)
    }
}

/// Candidate quality relative to the best observed pd in its cell.
pub fn rpd(candidate: &ScoredCell, universe: &CandidateUniverse) -> Result<f64> {
    let best = universe
        .cell_best_pd
        .get(&candidate.cell)
        .ok_or(Error::UnknownCell(candidate.cell))?;
    Ok(candidate.pd / best)
}

/// Percentage of the feasible cells a run discovered.
pub fn rac(run_cells: &BTreeSet<CellCoord>, universe: &CandidateUniverse) -> Result<f64> {
    if universe.feasible_cells.is_empty() {
        return Err(Error::EmptyUniverse);
    }
    let covered = run_cells.intersection(&universe.feasible_cells).count();
    Ok(100.0 * covered as f64 / universe.feasible_cells.len() as f64)
}

pub fn mean_and_population_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

/// Mean and population stddev of per-candidate RPD over a run's filtered
/// candidates.
pub fn run_rpd_summary(
    run_candidates: &[ScoredCell],
    universe: &CandidateUniverse,
) -> Result<(f64, f64)> {
    if run_candidates.is_empty() {
        return Err(Error::EmptyInput("rpd summary needs candidates"));
    }
    let rpds: Vec<f64> = run_candidates
        .iter()
        .map(|c| rpd(c, universe))
        .collect::<Result<_>>()?;
    Ok(mean_and_population_std(&rpds).expect("non-empty"))
}

/// Threshold-filtered cells discovered by one strategy across all its runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategyCellSet {
    pub strategy_id: String,
    pub cells: BTreeSet<CellCoord>,
}

/// `matrix[r][c]` counts cells the row strategy found and the column strategy
/// missed; `unique[r]` counts cells no other strategy found at all.
pub fn pairwise_unique(sets: &[StrategyCellSet]) -> (Vec<Vec<u64>>, Vec<u64>) {
    let n = sets.len();
    let mut matrix = vec![vec![0u64; n]; n];
    for (r, row) in sets.iter().enumerate() {
        for (c, col) in sets.iter().enumerate() {
            if r != c {
                matrix[r][c] = row.cells.difference(&col.cells).count() as u64;
            }
        }
    }
    let unique = sets
        .iter()
        .enumerate()
        .map(|(r, row)| {
            let mut others: BTreeSet<CellCoord> = BTreeSet::new();
            for (s, other) in sets.iter().enumerate() {
                if s != r {
                    others.extend(other.cells.iter().copied());
                }
            }
            row.cells.difference(&others).count() as u64
        })
        .collect();
    (matrix, unique)
}

/// Warnings produced while importing an external candidate set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportWarning {
    pub line: usize,
    pub message: String,
}

/// Reads an external candidate CSV (columns: sut, inputs_a, inputs_b,
/// output_a, output_b; inputs space-separated, exceptions as `Kind("message")`)
/// and maps rows for `sut` onto this artifact's derivative and cells.
///
/// With `reevaluate` set, outcomes are recomputed from the SUT and recorded
/// outputs only cross-checked (mismatches warn); otherwise the recorded
/// outputs are trusted as-is.
pub fn import_external(
    path: &Path,
    sut: &SutSpec,
    reevaluate: bool,
) -> Result<(Vec<BoundaryCandidate>, Vec<ImportWarning>)> {
    let schema_err = |line: usize, msg: String| Error::Schema {
        path: path.display().to_string(),
        line,
        msg,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| schema_err(1, e.to_string()))?;

    let mut out = Vec::new();
    let mut warnings = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or_default();
        if record.len() != 5 {
            return Err(schema_err(
                line,
                format!("expected 5 columns, got {}", record.len()),
            ));
        }
        if record[0].trim() != sut.name {
            continue;
        }
        let parse_point = |field: &str| -> Result<InputPoint> {
            let args: Vec<i64> = field
                .split_whitespace()
                .map(|t| {
                    t.parse::<i64>()
                        .map_err(|e| schema_err(line, format!("bad integer `{t}`: {e}")))
                })
                .collect::<Result<_>>()?;
            if args.len() != sut.arity {
                return Err(schema_err(
                    line,
                    format!("expected {} arguments, got {}", sut.arity, args.len()),
                ));
            }
            Ok(InputPoint::new(args))
        };
        let a = parse_point(&record[1])?;
        let b = parse_point(&record[2])?;
        if a == b {
            return Err(schema_err(line, "identical input pair".into()));
        }
        let recorded_a = ExecutionOutcome::from_full_string(&record[3]);
        let recorded_b = ExecutionOutcome::from_full_string(&record[4]);
        let (outcome_a, outcome_b) = if reevaluate {
            let oa = sut.evaluate(&a)?;
            let ob = sut.evaluate(&b)?;
            for (which, got, recorded) in [("a", &oa, &recorded_a), ("b", &ob, &recorded_b)] {
                if got != recorded {
                    warnings.push(ImportWarning {
                        line,
                        message: format!(
                            "output_{which} mismatch: recorded `{}`, re-evaluated `{}`",
                            recorded.full_string(),
                            got.full_string()
                        ),
                    });
                }
            }
            (oa, ob)
        } else {
            (recorded_a, recorded_b)
        };
        out.push(BoundaryCandidate::new(
            a,
            b,
            outcome_a,
            outcome_b,
            OutputDistanceKind::Jaccard2Gram,
        )?);
    }
    Ok((out, warnings))
}

/// Convenience: candidate plus its archive cell under this artifact's
/// descriptors.
pub fn scored(candidate: &BoundaryCandidate, sut: &SutSpec) -> Result<ScoredCell> {
    Ok(ScoredCell {
        cell: cell_coord(candidate, sut)?,
        pd: candidate.pd,
    })
}
