//! Experiment orchestration: instance files, runs, hyperparameter search
//! and reports.

mod config;
mod hpo;
mod instances;
mod report;
mod run;
mod svg;

pub use config::{output_root, ExperimentConfig, InstanceId, Method, DEFAULT_OUTPUT, GRID_SIZES, OUTPUT_ENV};
pub use hpo::{
    hpo_random_search, log_uniform, HpoReport, Sample, Trial, DEFAULT_BUDGET, ITERS_RANGE, LR_RANGE, SEARCH_NOTE,
    STEPS_PER_EPOCH_RANGE,
};
pub use instances::{build_instance, gen_instances, graph_path, grid_graph, load_instance, qubo_path, GeneratedInstances};
pub use report::{ar_table, composition_table, mean_std, report, ArRow, CompositionRow, ReportFiles, RunRow};
pub use run::{load_records, run_experiment, run_one, run_specs, RunPaths, RunRecord, RunSpec};
pub use svg::{bar_chart, Series};
