//! Benchmark harness for `ocf-core`: seeded workloads, the occupancy,
//! fill and trendline experiments, false-positive probing, and CSV output.

pub mod experiment;
pub mod report;
pub mod workload;

pub use experiment::{measure_fp, run_experiment, Experiment, ExperimentConfig, Subject};
pub use report::{emit_csv, ExperimentReport, Row, CSV_HEADER};
pub use workload::{gen_workload, probe_keys, OpKind, Operation, Phase, SpecInvalid, WorkloadSpec};
