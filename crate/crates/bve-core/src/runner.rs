//! Strategy execution: wires the sampler, explorer and tracer phases together
//! under a split budget, with per-run derived seeds and persisted records.

use std::path::Path;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::archive::{Archive, SelectionWeight};
use crate::budget::{Budget, EvalGate};
use crate::derivative::OutputDistanceKind;
use crate::error::{Error, Result};
use crate::explorer::{run_explorer, ExplorerConfig};
use crate::record::{ArchiveRow, PhaseTiming, RunRecord, TraceRow};
use crate::sampler::{run_sampler, SamplerKind};
use crate::sut::{find_sut, SutSpec};
use crate::tracer::{run_tracer, TracerBudget, TracerConfig};

/// One strategy execution plan. The budget split applies to whichever budget
/// mode is active.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub sut: String,
    pub sampler: SamplerKind,
    /// Parent selection for the explorer; None disables the phase.
    pub selection: Option<SelectionWeight>,
    pub tracer: bool,
    pub budget: Budget,
    /// Percent of the budget per phase (sampler, explorer, tracer).
    pub split: (u8, u8, u8),
    pub seed: u64,
    pub repetitions: u32,
    pub output_distance: OutputDistanceKind,
}

impl StrategyConfig {
    /// Phase combination with its reference default split: S {100,0,0},
    /// SE {10,90,0}, ST {90,0,10}, SET {10,80,10}.
    pub fn for_strategy(
        strategy: &str,
        sut: impl Into<String>,
        budget: Budget,
        seed: u64,
    ) -> Result<Self> {
        let (selection, tracer, split) = match strategy {
            "S" => (None, false, (100, 0, 0)),
            "SE" => (Some(SelectionWeight::Uniform), false, (10, 90, 0)),
            "ST" => (None, true, (90, 0, 10)),
            "SET" => (Some(SelectionWeight::Uniform), true, (10, 80, 10)),
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown strategy `{other}` (expected S, SE, ST or SET)"
                )))
            }
        };
        Ok(StrategyConfig {
            sut: sut.into(),
            sampler: SamplerKind::CtsBituniform,
            selection,
            tracer,
            budget,
            split,
            seed,
            repetitions: 1,
            output_distance: OutputDistanceKind::Jaccard2Gram,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let (s, e, t) = self.split;
        if s as u16 + e as u16 + t as u16 != 100 {
            return Err(Error::InvalidConfig(format!(
                "split {s}/{e}/{t} does not sum to 100"
            )));
        }
        if (e > 0) != self.selection.is_some() {
            return Err(Error::InvalidConfig(
                "explorer share must be positive exactly when a selection is configured".into(),
            ));
        }
        if (t > 0) != self.tracer {
            return Err(Error::InvalidConfig(
                "tracer share must be positive exactly when the tracer is enabled".into(),
            ));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidConfig("repetitions must be positive".into()));
        }
        match self.budget {
            Budget::WallClockSeconds(secs) if secs <= 0.0 => Err(Error::InvalidConfig(
                "budget seconds must be positive".into(),
            )),
            Budget::EvaluationCount(0) => Err(Error::InvalidConfig(
                "evaluation budget must be positive".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Label used in records and reports, e.g. `S-cts_bu` or `SET-uniform`.
    pub fn strategy_id(&self) -> String {
        match (&self.selection, self.tracer) {
            (Some(sel), true) => format!("SET-{sel}"),
            (Some(sel), false) => format!("SE-{sel}"),
            (None, true) => format!("ST-{}", self.sampler),
            (None, false) => format!("S-{}", self.sampler),
        }
    }

    pub fn budget_label(&self) -> String {
        match self.budget {
            Budget::WallClockSeconds(secs) => format!("{secs}s"),
            Budget::EvaluationCount(n) => format!("{n}ev"),
        }
    }
}

fn split_allocations(total: u64, split: (u8, u8, u8)) -> (u64, u64, u64) {
    let (s, e, t) = split;
    if e == 0 && t == 0 {
        return (total, 0, 0);
    }
    let a_s = total * s as u64 / 100;
    if t == 0 {
        return (a_s, total - a_s, 0);
    }
    if e == 0 {
        return (a_s, 0, total - a_s);
    }
    let a_e = total * e as u64 / 100;
    (a_s, a_e, total - a_s - a_e)
}

/// Executes every repetition of a config against a built-in SUT. Run `i`
/// derives seed `base + i`, and each phase draws from its own deterministic
/// stream of that seed. Records are also written under `out_dir` when one is
/// given.
pub fn run(config: &StrategyConfig, out_dir: Option<&Path>) -> Result<Vec<RunRecord>> {
    let sut = find_sut(&config.sut)?;
    run_with_sut(config, &sut, out_dir)
}

/// Like [`run`] but against a caller-supplied subject, so user-registered
/// SUTs go through the same pipeline. `config.sut` must match the subject's
/// name.
pub fn run_with_sut(
    config: &StrategyConfig,
    sut: &SutSpec,
    out_dir: Option<&Path>,
) -> Result<Vec<RunRecord>> {
    config.validate()?;
    if config.sut != sut.name {
        return Err(Error::InvalidConfig(format!(
            "config names SUT `{}` but `{}` was supplied",
            config.sut, sut.name
        )));
    }
    let mut records = Vec::with_capacity(config.repetitions as usize);
    for rep in 0..config.repetitions {
        let record = run_once(config, sut, rep)?;
        if let Some(dir) = out_dir {
            record.write_to(dir)?;
        }
        records.push(record);
    }
    Ok(records)
}

fn phase_rng(run_seed: u64, phase: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
    rng.set_stream(phase);
    rng
}

fn run_once(config: &StrategyConfig, sut: &SutSpec, rep: u32) -> Result<RunRecord> {
    let run_seed = config.seed + rep as u64;
    let mut archive = Archive::new();
    let mut notes = Vec::new();
    let mut timing = PhaseTiming::default();
    let mut evaluation_count = 0u64;

    let explorer_enabled = config.selection.is_some() && config.split.1 > 0;
    let tracer_requested = config.tracer && config.split.2 > 0;

    // evaluation allocations (evaluation mode) or second shares (wall mode)
    let eval_split = match config.budget {
        Budget::EvaluationCount(total) => Some(split_allocations(total, config.split)),
        Budget::WallClockSeconds(_) => None,
    };
    let secs_share = |pct: u8| match config.budget {
        Budget::WallClockSeconds(secs) => Duration::from_secs_f64(secs * pct as f64 / 100.0),
        Budget::EvaluationCount(_) => Duration::ZERO,
    };

    // Sampler
    {
        let started = Instant::now();
        let mut gate = match eval_split {
            Some((a_s, _, _)) => EvalGate::evaluations(a_s),
            None => EvalGate::deadline(started + secs_share(config.split.0)),
        };
        let mut rng = phase_rng(run_seed, 0);
        run_sampler(
            &mut archive,
            sut,
            config.sampler,
            config.output_distance,
            &mut gate,
            &mut rng,
        )?;
        evaluation_count += gate.used();
        timing.sampler_secs = started.elapsed().as_secs_f64();
    }

    // Explorer
    if explorer_enabled {
        if archive.is_empty() {
            notes.push("explorer skipped: sampler discovered no boundary candidates".into());
        } else {
            let started = Instant::now();
            let mut gate = match eval_split {
                Some((_, a_e, _)) => EvalGate::evaluations(a_e),
                None => EvalGate::deadline(started + secs_share(config.split.1)),
            };
            let mut rng = phase_rng(run_seed, 1);
            let explorer_config = ExplorerConfig::new(config.selection.expect("explorer enabled"));
            run_explorer(
                &mut archive,
                sut,
                &explorer_config,
                config.output_distance,
                &mut gate,
                &mut rng,
            )?;
            evaluation_count += gate.used();
            timing.explorer_secs = started.elapsed().as_secs_f64();
        }
    }

    // Tracer
    let mut trace_populations: Vec<TraceRow> = Vec::new();
    if tracer_requested {
        if sut.arity < 2 {
            notes.push(format!(
                "tracer skipped: SUT `{}` has arity 1, a one-dimensional boundary is isolated points",
                sut.name
            ));
        } else if archive.len() < 2 {
            notes.push("tracer skipped: need at least 2 archive candidates".into());
        } else {
            let started = Instant::now();
            let budget = match eval_split {
                Some((_, _, a_t)) => TracerBudget::Evaluations(a_t),
                None => TracerBudget::Duration(secs_share(config.split.2)),
            };
            let mut rng = phase_rng(run_seed, 2);
            let (populations, spent) = run_tracer(
                &archive,
                sut,
                &TracerConfig::default(),
                config.output_distance,
                budget,
                &mut rng,
            )?;
            evaluation_count += spent;
            timing.tracer_secs = started.elapsed().as_secs_f64();
            trace_populations = populations.iter().map(TraceRow::from_population).collect();
        }
    }

    Ok(RunRecord {
        config: config.clone(),
        run_index: rep,
        archive_rows: archive
            .snapshot()
            .iter()
            .map(ArchiveRow::from_entry)
            .collect(),
        trace_populations,
        timing,
        evaluation_count,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval_config(strategy: &str, sut: &str, evals: u64, seed: u64) -> StrategyConfig {
        StrategyConfig::for_strategy(strategy, sut, Budget::EvaluationCount(evals), seed).unwrap()
    }

    #[test]
    fn split_allocation_cases() {
        assert_eq!(split_allocations(1000, (100, 0, 0)), (1000, 0, 0));
        assert_eq!(split_allocations(1000, (10, 90, 0)), (100, 900, 0));
        assert_eq!(split_allocations(1000, (90, 0, 10)), (900, 0, 100));
        assert_eq!(
            split_allocations(100_000, (10, 80, 10)),
            (10_000, 80_000, 10_000)
        );
        // remainders flow to the last active phase
        let (s, e, t) = split_allocations(999, (10, 80, 10));
        assert_eq!(s + e + t, 999);
    }

    #[test]
    fn validation_rejects_inconsistent_configs() {
        let mut c = eval_config("SE", "circle", 1000, 1);
        c.split = (50, 40, 10);
        assert!(c.validate().is_err()); // tracer share without tracer
        let mut c = eval_config("S", "circle", 1000, 1);
        c.split = (90, 10, 0);
        assert!(c.validate().is_err()); // explorer share without selection
        let mut c = eval_config("S", "circle", 1000, 1);
        c.repetitions = 0;
        assert!(c.validate().is_err());
        let c = StrategyConfig::for_strategy("S", "circle", Budget::EvaluationCount(0), 1).unwrap();
        assert!(c.validate().is_err());
        assert!(
            StrategyConfig::for_strategy("X", "circle", Budget::EvaluationCount(1), 1).is_err()
        );
    }

    #[test]
    fn strategy_ids() {
        assert_eq!(eval_config("S", "circle", 10, 1).strategy_id(), "S-cts_bu");
        assert_eq!(
            eval_config("SE", "circle", 10, 1).strategy_id(),
            "SE-uniform"
        );
        assert_eq!(
            eval_config("ST", "circle", 10, 1).strategy_id(),
            "ST-cts_bu"
        );
        assert_eq!(
            eval_config("SET", "circle", 10, 1).strategy_id(),
            "SET-uniform"
        );
        let mut c = eval_config("S", "circle", 10, 1);
        c.sampler = SamplerKind::UniformInt64;
        assert_eq!(c.strategy_id(), "S-rand64");
    }

    #[test]
    fn evaluation_budget_is_exact_for_sampler_only() {
        let config = eval_config("S", "circle", 1000, 7);
        let records = run(&config, None).unwrap();
        assert_eq!(records[0].evaluation_count, 1000);
    }

    #[test]
    fn phases_run_in_order_and_within_split() {
        let mut config = eval_config("SET", "circle", 10_000, 11);
        config.repetitions = 2;
        let records = run(&config, None).unwrap();
        assert_eq!(records.len(), 2);
        for r in &records {
            // sampler 1000, explorer 8000, tracer <= 1000 (trace granularity)
            assert!(r.evaluation_count <= 10_000);
            assert!(r.evaluation_count >= 9_000 + 60);
            let phases: std::collections::BTreeSet<String> = r
                .archive_rows
                .iter()
                .map(|row| row.phase.to_string())
                .collect();
            assert!(phases.contains("sampler"));
            assert!(phases.contains("explorer"));
            assert!(!r.trace_populations.is_empty());
            // trace members never enter the archive
            assert!(r
                .archive_rows
                .iter()
                .all(|row| row.phase.to_string() != "tracer"));
        }
        // distinct repetitions get distinct derived seeds
        assert_ne!(records[0].archive_rows, records[1].archive_rows);
    }

    #[test]
    fn tracer_skipped_for_arity_one() {
        let config = eval_config("ST", "bytecount", 2_000, 3);
        let records = run(&config, None).unwrap();
        assert!(records[0].trace_populations.is_empty());
        assert!(records[0].notes.iter().any(|n| n.contains("arity 1")));
    }

    #[test]
    fn records_round_trip_and_audit() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = eval_config("SE", "bmi", 4_000, 5);
        config.selection = Some(SelectionWeight::Curiosity);
        let records = run(&config, Some(dir.path())).unwrap();
        let record = &records[0];
        let path = dir.path().join(format!("{}.jsonl", record.file_stem()));
        let loaded = RunRecord::read_from(&path).unwrap();
        assert_eq!(loaded.archive_rows, record.archive_rows);
        assert_eq!(loaded.evaluation_count, record.evaluation_count);
        let sut = find_sut("bmi").unwrap();
        loaded.audit(&sut).unwrap();
    }

    #[test]
    fn same_seed_reproduces_csv_byte_identical() {
        let config = eval_config("SET", "circle", 5_000, 99);
        let a = run(&config, None).unwrap();
        let b = run(&config, None).unwrap();
        assert_eq!(a[0].to_csv().unwrap(), b[0].to_csv().unwrap());
        assert_eq!(a[0].evaluation_count, b[0].evaluation_count);
    }

    #[test]
    fn unknown_sut_fails() {
        let config = eval_config("S", "nope", 100, 1);
        assert!(matches!(run(&config, None), Err(Error::SutNotFound(_))));
    }

    #[test]
    fn wall_clock_mode_terminates_and_counts() {
        let config =
            StrategyConfig::for_strategy("S", "circle", Budget::WallClockSeconds(0.2), 1).unwrap();
        let started = std::time::Instant::now();
        let records = run(&config, None).unwrap();
        assert!(started.elapsed().as_secs_f64() < 5.0);
        assert!(records[0].evaluation_count > 0);
        assert!(records[0].timing.sampler_secs > 0.0);
    }

    #[test]
    fn user_registered_sut_runs_through_pipeline() {
        use crate::sut::{ExecutionOutcome, OutputKind, SutSpec};
        let sut = SutSpec::new(
            "parity",
            1,
            OutputKind::categorical(&["even", "odd"]),
            |p| {
                if p.args()[0] % 2 == 0 {
                    ExecutionOutcome::value("even")
                } else {
                    ExecutionOutcome::value("odd")
                }
            },
        );
        let config = StrategyConfig {
            sut: "parity".into(),
            ..eval_config("S", "parity", 2_000, 4)
        };
        let records = super::run_with_sut(&config, &sut, None).unwrap();
        assert!(!records[0].archive_rows.is_empty());
        // name mismatch is rejected
        let circle = crate::sut::find_sut("circle").unwrap();
        assert!(super::run_with_sut(&config, &circle, None).is_err());
    }
}
