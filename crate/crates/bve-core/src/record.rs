//! Run-record persistence: JSON-lines per run plus a flat CSV view of the
//! archive rows, written atomically.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::archive::{ArchiveEntry, Phase};
use crate::derivative::{BoundaryCandidate, OutputDistanceKind};
use crate::descriptors::{cell_coord, CellCoord};
use crate::error::{Error, Result};
use crate::runner::StrategyConfig;
use crate::sut::{ExecutionOutcome, SutSpec};
use crate::tracer::TracePopulation;

/// One persisted archive elite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveRow {
    pub cell: CellCoord,
    pub inputs_a: Vec<i64>,
    pub inputs_b: Vec<i64>,
    pub output_a: String,
    pub output_b: String,
    pub exception_kind_a: String,
    pub exception_kind_b: String,
    pub pd: f64,
    pub curiosity: f64,
    pub phase: Phase,
}

impl ArchiveRow {
    pub fn from_entry(entry: &ArchiveEntry) -> Self {
        let kind = |o: &ExecutionOutcome| match o {
            ExecutionOutcome::Exception { kind, .. } => kind.clone(),
            ExecutionOutcome::Value(_) => String::new(),
        };
        ArchiveRow {
            cell: entry.cell,
            inputs_a: entry.candidate.a.args().to_vec(),
            inputs_b: entry.candidate.b.args().to_vec(),
            output_a: entry.candidate.outcome_a.full_string(),
            output_b: entry.candidate.outcome_b.full_string(),
            exception_kind_a: kind(&entry.candidate.outcome_a),
            exception_kind_b: kind(&entry.candidate.outcome_b),
            pd: entry.candidate.pd,
            curiosity: entry.curiosity,
            phase: entry.phase,
        }
    }

    pub fn to_candidate(&self, dist: OutputDistanceKind) -> Result<BoundaryCandidate> {
        BoundaryCandidate::new(
            crate::sut::InputPoint::new(self.inputs_a.clone()),
            crate::sut::InputPoint::new(self.inputs_b.clone()),
            ExecutionOutcome::from_full_string(&self.output_a),
            ExecutionOutcome::from_full_string(&self.output_b),
            dist,
        )
    }
}

/// One evaluated input pair inside a trace population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub inputs_a: Vec<i64>,
    pub inputs_b: Vec<i64>,
    pub output_a: String,
    pub output_b: String,
    pub pd: f64,
}

impl PairRow {
    fn from_candidate(c: &BoundaryCandidate) -> Self {
        PairRow {
            inputs_a: c.a.args().to_vec(),
            inputs_b: c.b.args().to_vec(),
            output_a: c.outcome_a.full_string(),
            output_b: c.outcome_b.full_string(),
            pd: c.pd,
        }
    }
}

/// Persisted trace population: the seed, its region and the final members.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRow {
    pub seed_inputs_a: Vec<i64>,
    pub seed_inputs_b: Vec<i64>,
    pub bounds_low: Vec<i64>,
    pub bounds_high: Vec<i64>,
    pub members: Vec<PairRow>,
}

impl TraceRow {
    pub fn from_population(pop: &TracePopulation) -> Self {
        TraceRow {
            seed_inputs_a: pop.seed.a.args().to_vec(),
            seed_inputs_b: pop.seed.b.args().to_vec(),
            bounds_low: pop.bounds.low.clone(),
            bounds_high: pop.bounds.high.clone(),
            members: pop.members.iter().map(PairRow::from_candidate).collect(),
        }
    }
}

/// Wall-clock seconds spent per phase; excluded from the CSV view so
/// evaluation-mode records stay byte-identical across machines.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct PhaseTiming {
    pub sampler_secs: f64,
    pub explorer_secs: f64,
    pub tracer_secs: f64,
}

/// Everything one strategy execution persists.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: StrategyConfig,
    pub run_index: u32,
    pub archive_rows: Vec<ArchiveRow>,
    pub trace_populations: Vec<TraceRow>,
    pub timing: PhaseTiming,
    pub evaluation_count: u64,
    pub notes: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    config: StrategyConfig,
    run_index: u32,
    timing: PhaseTiming,
    evaluation_count: u64,
    notes: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BodyLine {
    Row { row: ArchiveRow },
    Trace { trace: TraceRow },
}

impl RunRecord {
    pub fn file_stem(&self) -> String {
        format!(
            "{}_{}_{:03}",
            self.config.sut,
            self.config.strategy_id(),
            self.run_index
        )
    }

    /// Serializes to JSON lines: one header line, one line per archive row,
    /// one line per trace population.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        out.push_str(&serde_json::to_string(&HeaderLine {
            config: self.config.clone(),
            run_index: self.run_index,
            timing: self.timing,
            evaluation_count: self.evaluation_count,
            notes: self.notes.clone(),
        })?);
        out.push('\n');
        for row in &self.archive_rows {
            out.push_str(&serde_json::to_string(&BodyLine::Row { row: row.clone() })?);
            out.push('\n');
        }
        for trace in &self.trace_populations {
            out.push_str(&serde_json::to_string(&BodyLine::Trace {
                trace: trace.clone(),
            })?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_jsonl(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::Schema {
            path: path.display().to_string(),
            line: 1,
            msg: "empty record file".into(),
        })?;
        let header: HeaderLine = serde_json::from_str(header)?;
        let mut record = RunRecord {
            config: header.config,
            run_index: header.run_index,
            archive_rows: Vec::new(),
            trace_populations: Vec::new(),
            timing: header.timing,
            evaluation_count: header.evaluation_count,
            notes: header.notes,
        };
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<BodyLine>(line) {
                Ok(BodyLine::Row { row }) => record.archive_rows.push(row),
                Ok(BodyLine::Trace { trace }) => record.trace_populations.push(trace),
                Err(e) => {
                    return Err(Error::Schema {
                        path: path.display().to_string(),
                        line: i + 1,
                        msg: e.to_string(),
                    })
                }
            }
        }
        Ok(record)
    }

    /// Flat CSV view of the archive rows. Fixed column order: sut, strategy,
    /// run, phase, the four cell coordinates, both input tuples, outputs,
    /// exception kinds, pd, curiosity.
    pub fn to_csv(&self) -> Result<String> {
        let arity = self
            .archive_rows
            .first()
            .map(|r| r.inputs_a.len())
            .or_else(|| crate::sut::find_sut(&self.config.sut).ok().map(|s| s.arity))
            .unwrap_or(0);
        let mut writer = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = vec![
            "sut".into(),
            "strategy".into(),
            "run".into(),
            "phase".into(),
        ];
        header.extend(["cell_len", "cell_var", "cell_out", "cell_exc"].map(String::from));
        for i in 0..arity {
            header.push(format!("input_a_{i}"));
        }
        for i in 0..arity {
            header.push(format!("input_b_{i}"));
        }
        header.extend(
            [
                "output_a",
                "output_b",
                "exception_kind_a",
                "exception_kind_b",
                "pd",
                "curiosity",
            ]
            .map(String::from),
        );
        writer.write_record(&header)?;
        let strategy = self.config.strategy_id();
        for row in &self.archive_rows {
            let mut rec: Vec<String> = vec![
                self.config.sut.clone(),
                strategy.clone(),
                self.run_index.to_string(),
                row.phase.to_string(),
            ];
            rec.extend(row.cell.as_array().map(|c| c.to_string()));
            rec.extend(row.inputs_a.iter().map(|v| v.to_string()));
            rec.extend(row.inputs_b.iter().map(|v| v.to_string()));
            rec.push(row.output_a.clone());
            rec.push(row.output_b.clone());
            rec.push(row.exception_kind_a.clone());
            rec.push(row.exception_kind_b.clone());
            rec.push(row.pd.to_string());
            rec.push(row.curiosity.to_string());
            writer.write_record(&rec)?;
        }
        let bytes = writer.into_inner().expect("vec writer never fails");
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Writes `<stem>.jsonl` and `<stem>.csv` under `dir`, atomically.
    pub fn write_to(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let stem = self.file_stem();
        let jsonl_path = dir.join(format!("{stem}.jsonl"));
        let csv_path = dir.join(format!("{stem}.csv"));
        write_atomic(&jsonl_path, self.to_jsonl()?.as_bytes())?;
        write_atomic(&csv_path, self.to_csv()?.as_bytes())?;
        Ok((jsonl_path, csv_path))
    }

    pub fn read_from(path: &Path) -> Result<Self> {
        let mut text = String::new();
        for line in BufReader::new(fs::File::open(path)?).lines() {
            text.push_str(&line?);
            text.push('\n');
        }
        Self::from_jsonl(&text, path)
    }

    /// Re-derives every persisted row from its inputs and checks the stored
    /// cell and pd, using the deterministic SUT.
    pub fn audit(&self, sut: &SutSpec) -> Result<()> {
        for (i, row) in self.archive_rows.iter().enumerate() {
            let a = crate::sut::InputPoint::new(row.inputs_a.clone());
            let b = crate::sut::InputPoint::new(row.inputs_b.clone());
            let outcome_a = sut.evaluate(&a)?;
            let outcome_b = sut.evaluate(&b)?;
            let candidate =
                BoundaryCandidate::new(a, b, outcome_a, outcome_b, self.config.output_distance)?;
            let cell = cell_coord(&candidate, sut)?;
            if cell != row.cell || candidate.pd.to_bits() != row.pd.to_bits() {
                return Err(Error::InvalidConfig(format!(
                    "audit failure at archive row {i}: stored cell {} pd {}, recomputed {} pd {}",
                    row.cell, row.pd, cell, candidate.pd
                )));
            }
        }
        Ok(())
    }
}

/// Collects record files from paths that may be files or directories.
pub fn collect_record_paths(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(input)?
                .filter_map(|e| e.ok())
                .map(|e| e.path())
                .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(input.clone());
        }
    }
    Ok(out)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
