//! Aggregates persisted runs (and imported external candidate sets) into
//! per-strategy quality/diversity tables and pairwise unique-cell matrices.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use crate::derivative::BoundaryCandidate;
use crate::descriptors::CellCoord;
use crate::error::Result;
use crate::metrics::{
    mean_and_population_std, pairwise_unique, rac, run_rpd_summary, scored, CandidateUniverse,
    ScoredCell, StrategyCellSet,
};
use crate::record::RunRecord;
use crate::sut::find_sut;

/// An external candidate set participating in the comparison as its own
/// strategy.
#[derive(Debug, Clone)]
pub struct ExternalImport {
    pub label: String,
    pub sut: String,
    pub candidates: Vec<BoundaryCandidate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub sut: String,
    pub strategy: String,
    pub time_budget: String,
    pub runs: usize,
    pub rpd_mean: f64,
    pub rpd_std: f64,
    pub rac_mean: f64,
    pub rac_std: f64,
}

#[derive(Debug, Clone)]
pub struct PairwiseTable {
    pub sut: String,
    pub labels: Vec<String>,
    /// `matrix[r][c]`: cells found by row strategy, missed by column strategy.
    pub matrix: Vec<Vec<u64>>,
    /// Cells no other strategy found.
    pub unique: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub summaries: Vec<SummaryRow>,
    pub pairwise: Vec<PairwiseTable>,
}

/// One run reduced to its filtered candidates and cells.
fn run_scored(record: &RunRecord) -> Vec<ScoredCell> {
    record
        .archive_rows
        .iter()
        .map(|row| ScoredCell {
            cell: row.cell,
            pd: row.pd,
        })
        .collect()
}

/// Builds per-SUT universes from everything supplied, then scores each
/// strategy's runs against them. Runs whose candidates all fall below the
/// threshold score 0 for both metrics.
pub fn build_report(records: &[RunRecord], imports: &[ExternalImport]) -> Result<Report> {
    let mut suts: BTreeSet<String> = records.iter().map(|r| r.config.sut.clone()).collect();
    suts.extend(imports.iter().map(|i| i.sut.clone()));

    let mut summaries = Vec::new();
    let mut pairwise_tables = Vec::new();
    for sut_name in suts {
        let sut = find_sut(&sut_name)?;
        let sut_records: Vec<&RunRecord> = records
            .iter()
            .filter(|r| r.config.sut == sut_name)
            .collect();
        let sut_imports: Vec<&ExternalImport> =
            imports.iter().filter(|i| i.sut == sut_name).collect();

        // pooled universe over all runs, strategies and imports of this SUT
        let mut pool: Vec<ScoredCell> = Vec::new();
        for record in &sut_records {
            pool.extend(run_scored(record));
        }
        let mut import_scored: Vec<Vec<ScoredCell>> = Vec::new();
        for import in &sut_imports {
            let cells: Vec<ScoredCell> = import
                .candidates
                .iter()
                .map(|c| scored(c, &sut))
                .collect::<Result<_>>()?;
            pool.extend(cells.iter().copied());
            import_scored.push(cells);
        }
        if pool.is_empty() {
            continue;
        }
        let universe = CandidateUniverse::build(&pool)?;

        // group runs by (strategy, budget)
        let mut groups: BTreeMap<(String, String), Vec<&RunRecord>> = BTreeMap::new();
        for record in &sut_records {
            groups
                .entry((record.config.strategy_id(), record.config.budget_label()))
                .or_default()
                .push(record);
        }

        let mut cell_sets: Vec<StrategyCellSet> = Vec::new();
        for ((strategy, budget), runs) in &groups {
            let mut rpds = Vec::new();
            let mut racs = Vec::new();
            let mut union_cells: BTreeSet<CellCoord> = BTreeSet::new();
            for record in runs {
                let filtered: Vec<ScoredCell> = run_scored(record)
                    .into_iter()
                    .filter(|c| universe.passes(c.pd))
                    .collect();
                if filtered.is_empty() {
                    rpds.push(0.0);
                    racs.push(0.0);
                    continue;
                }
                let (rpd_mean, _) = run_rpd_summary(&filtered, &universe)?;
                rpds.push(rpd_mean);
                let cells: BTreeSet<CellCoord> = filtered.iter().map(|c| c.cell).collect();
                racs.push(rac(&cells, &universe)?);
                union_cells.extend(cells);
            }
            let (rpd_mean, rpd_std) = mean_and_population_std(&rpds).expect("runs non-empty");
            let (rac_mean, rac_std) = mean_and_population_std(&racs).expect("runs non-empty");
            summaries.push(SummaryRow {
                sut: sut_name.clone(),
                strategy: strategy.clone(),
                time_budget: budget.clone(),
                runs: runs.len(),
                rpd_mean,
                rpd_std,
                rac_mean,
                rac_std,
            });
            cell_sets.push(StrategyCellSet {
                strategy_id: format!("{strategy}@{budget}"),
                cells: union_cells,
            });
        }

        for (import, cells) in sut_imports.iter().zip(&import_scored) {
            let filtered: Vec<ScoredCell> = cells
                .iter()
                .copied()
                .filter(|c| universe.passes(c.pd))
                .collect();
            let (rpd_mean, rac_value, cell_set) = if filtered.is_empty() {
                (0.0, 0.0, BTreeSet::new())
            } else {
                let (m, _) = run_rpd_summary(&filtered, &universe)?;
                let cs: BTreeSet<CellCoord> = filtered.iter().map(|c| c.cell).collect();
                let r = rac(&cs, &universe)?;
                (m, r, cs)
            };
            summaries.push(SummaryRow {
                sut: sut_name.clone(),
                strategy: import.label.clone(),
                time_budget: "-".into(),
                runs: 1,
                rpd_mean,
                rpd_std: 0.0,
                rac_mean: rac_value,
                rac_std: 0.0,
            });
            cell_sets.push(StrategyCellSet {
                strategy_id: import.label.clone(),
                cells: cell_set,
            });
        }

        if cell_sets.len() >= 2 {
            let labels = cell_sets.iter().map(|s| s.strategy_id.clone()).collect();
            let (matrix, unique) = pairwise_unique(&cell_sets);
            pairwise_tables.push(PairwiseTable {
                sut: sut_name.clone(),
                labels,
                matrix,
                unique,
            });
        }
    }

    // diversity-first ordering within each SUT
    summaries.sort_by(|a, b| {
        a.sut
            .cmp(&b.sut)
            .then(b.rac_mean.partial_cmp(&a.rac_mean).expect("rac is finite"))
            .then(a.strategy.cmp(&b.strategy))
    });
    Ok(Report {
        summaries,
        pairwise: pairwise_tables,
    })
}

/// Summary CSV for one SUT: strategy, time_budget, rpd_mean, rpd_std,
/// rac_mean, rac_std.
pub fn summary_csv(report: &Report, sut: &str) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record([
        "strategy",
        "time_budget",
        "rpd_mean",
        "rpd_std",
        "rac_mean",
        "rac_std",
    ])?;
    for row in report.summaries.iter().filter(|r| r.sut == sut) {
        writer.write_record([
            row.strategy.clone(),
            row.time_budget.clone(),
            format!("{:.4}", row.rpd_mean),
            format!("{:.4}", row.rpd_std),
            format!("{:.2}", row.rac_mean),
            format!("{:.2}", row.rac_std),
        ])?;
    }
    Ok(String::from_utf8(writer.into_inner().expect("vec writer")).expect("utf-8"))
}

/// Pairwise unique-cell matrix CSV for one SUT.
pub fn pairwise_csv(table: &PairwiseTable) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["strategy".to_string()];
    header.extend(table.labels.iter().cloned());
    header.push("unique".into());
    writer.write_record(&header)?;
    for (r, label) in table.labels.iter().enumerate() {
        let mut rec = vec![label.clone()];
        rec.extend(table.matrix[r].iter().map(|v| v.to_string()));
        rec.push(table.unique[r].to_string());
        writer.write_record(&rec)?;
    }
    Ok(String::from_utf8(writer.into_inner().expect("vec writer")).expect("utf-8"))
}

/// Plain-text view of the summary tables.
pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    let mut current_sut = None;
    for row in &report.summaries {
        if current_sut != Some(&row.sut) {
            if current_sut.is_some() {
                out.push('\n');
            }
            out.push_str(&format!("SUT {}\n", row.sut));
            out.push_str(&format!(
                "  {:<16} {:>10} {:>5} {:>16} {:>18}\n",
                "strategy", "budget", "runs", "RPD (mu +/- sd)", "RAC % (mu +/- sd)"
            ));
            current_sut = Some(&row.sut);
        }
        out.push_str(&format!(
            "  {:<16} {:>10} {:>5} {:>8.3} +/- {:<5.3} {:>9.2} +/- {:<6.2}\n",
            row.strategy,
            row.time_budget,
            row.runs,
            row.rpd_mean,
            row.rpd_std,
            row.rac_mean,
            row.rac_std
        ));
    }
    out
}

/// Writes summary and pairwise CSVs per SUT under `out_dir`; returns the
/// created paths.
pub fn write_report_files(report: &Report, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut paths = Vec::new();
    let suts: BTreeSet<String> = report.summaries.iter().map(|r| r.sut.clone()).collect();
    for sut in suts {
        let path = out_dir.join(format!("summary_{sut}.csv"));
        std::fs::write(&path, summary_csv(report, &sut)?)?;
        paths.push(path);
    }
    for table in &report.pairwise {
        let path = out_dir.join(format!("pairwise_{}.csv", table.sut));
        std::fs::write(&path, pairwise_csv(table)?)?;
        paths.push(path);
    }
    Ok(paths)
}
