//! Automated black-box boundary value exploration over integer input spaces.
//!
//! Searches a pure function's input space for boundary candidates — close
//! input pairs with divergent outputs — organizes them in a quality-diversity
//! grid archive keyed by behavioral descriptors, refines discovered
//! boundaries by local tracing, and reports relative quality (RPD) and
//! coverage (RAC) metrics.

pub mod archive;
pub mod budget;
pub mod derivative;
pub mod descriptors;
pub mod error;
pub mod explorer;
pub mod metrics;
pub mod plot;
pub mod record;
pub mod report;
pub mod runner;
pub mod sampler;
pub mod sut;
pub mod tracer;

pub use archive::{AddOutcome, Archive, ArchiveEntry, Phase, SelectionWeight};
pub use budget::{Budget, EvalGate};
pub use derivative::{
    input_distance, jaccard_2gram_distance, output_string, program_derivative, BoundaryCandidate,
    OutputDistanceKind,
};
pub use descriptors::{cell_coord, CellCoord, ValidityGroup};
pub use error::{Error, Result};
pub use explorer::{mutate, run_explorer, ExplorerConfig};
pub use metrics::{
    boundariness_filter, import_external, pairwise_unique, rac, rpd, run_rpd_summary,
    CandidateUniverse, ScoredCell, StrategyCellSet,
};
pub use plot::{plot, PlotOptions};
pub use record::{collect_record_paths, ArchiveRow, RunRecord};
pub use report::{build_report, render_text, write_report_files, ExternalImport, Report};
pub use runner::{run, run_with_sut, StrategyConfig};
pub use sampler::{
    run_sampler, sample_bituniform, sample_candidate, sample_cts_point, SamplerKind,
};
pub use sut::{
    evaluate, find_sut, registry, sut_numeric_pack, ExecutionOutcome, InputPoint, OutputKind,
    SutSpec,
};
pub use tracer::{
    pair_objective, prioritize, run_tracer, search_bounds, trace, weight_w, SearchBounds,
    TracePopulation, TracerBudget, TracerConfig,
};
