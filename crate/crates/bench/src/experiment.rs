//! The experiments.
//!
//! - `table1`: run the workload, then probe `reps` batches of absent keys.
//!   Emits a single row.
//! - `fill`: run the workload with a stats row (and one probe batch) every
//!   `interval` operations. For the RAW baseline this shows the table
//!   filling and then refusing inserts.
//! - `trendline`: capacity trajectory, one row every `interval` operations.

use std::time::Instant;

use ocf_core::params::CAPACITY_FLOOR;
use ocf_core::{FilterParams, FilterTable, Mode, OcfFilter, ParamError, TableSizing};

use crate::report::{ExperimentReport, Row};
use crate::workload::{gen_workload, probe_keys, OpKind, Operation, SpecInvalid, WorkloadSpec, DEFAULT_KEY_LENGTH};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Experiment {
    Table1,
    Fill,
    Trendline,
}

/// What the workload runs against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Subject {
    Pre,
    Eof,
    /// Fixed-size table with no key store and no resizing.
    Raw,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub subject: Subject,
    pub workload: WorkloadSpec,
    pub params: FilterParams,
    /// Probe keys per batch.
    pub probes: u64,
    /// Probe batches for `table1`.
    pub reps: u32,
    /// Operations between rows; `None` picks 1% of the workload.
    pub interval: Option<u64>,
    pub probe_seed: u64,
}

/// Items the RAW baseline is sized for unless told otherwise.
pub const RAW_DEFAULT_ITEMS: u64 = 10_000;

/// Initial logical capacity used when none is given. The resizing subjects
/// start at the floor so their final size comes from the policy alone.
pub fn default_capacity(subject: Subject, bucket_size: usize) -> u64 {
    match subject {
        Subject::Raw => RAW_DEFAULT_ITEMS.div_ceil(bucket_size.max(1) as u64),
        Subject::Pre | Subject::Eof => CAPACITY_FLOOR,
    }
}

impl ExperimentConfig {
    /// The configuration `ocf-bench` runs with when only the experiment,
    /// mode, key count and seed are given.
    pub fn new(experiment: Experiment, subject: Subject, n_keys: u64, seed: u64) -> ExperimentConfig {
        let params = FilterParams {
            capacity: default_capacity(subject, 4),
            sizing: TableSizing::Exact,
            seed,
            ..FilterParams::default()
        };
        ExperimentConfig {
            experiment,
            subject,
            workload: WorkloadSpec::inserts(seed, n_keys),
            params,
            probes: 100_000,
            reps: 10,
            interval: None,
            probe_seed: seed.wrapping_add(0x9E37_79B9),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Workload(#[from] SpecInvalid),
}

/// Anything that can be probed for false positives.
pub trait Probe {
    fn maybe_contains(&self, key: &[u8]) -> bool;
    /// `true` only if the key is known to be stored. Such probes are skipped.
    fn known_member(&self, key: &[u8]) -> bool;
}

impl Probe for OcfFilter {
    fn maybe_contains(&self, key: &[u8]) -> bool {
        self.contains(key)
    }

    fn known_member(&self, key: &[u8]) -> bool {
        self.store().contains(key)
    }
}

impl Probe for FilterTable {
    fn maybe_contains(&self, key: &[u8]) -> bool {
        self.contains(key)
    }

    fn known_member(&self, _key: &[u8]) -> bool {
        false
    }
}

/// Counts positives among `probe_count` keys that were never inserted.
/// Returns `(false_positives, probes)`.
pub fn measure_fp<F: Probe + ?Sized>(filter: &F, probe_count: u64, seed: u64) -> (u64, u64) {
    let mut fp = 0;
    let mut probes = 0;
    for key in probe_keys(seed, probe_count, DEFAULT_KEY_LENGTH) {
        if filter.known_member(&key) {
            continue;
        }
        probes += 1;
        if filter.maybe_contains(&key) {
            fp += 1;
        }
    }
    (fp, probes)
}

#[allow(clippy::large_enum_variant)]
enum Target {
    Ocf(OcfFilter),
    Raw(FilterTable),
}

impl Target {
    fn new(subject: Subject, params: &FilterParams) -> Result<Target, ParamError> {
        Ok(match subject {
            Subject::Pre => Target::Ocf(OcfFilter::new(Mode::Pre, params.clone())?),
            Subject::Eof => Target::Ocf(OcfFilter::new(Mode::Eof, params.clone())?),
            Subject::Raw => {
                params.validate()?;
                Target::Raw(FilterTable::from_params(params))
            }
        })
    }

    /// Returns `false` when an insert could not be placed.
    fn apply(&mut self, op: &Operation) -> bool {
        match (self, op.kind) {
            (Target::Ocf(f), OpKind::Insert) => {
                f.insert(&op.key);
                true
            }
            (Target::Ocf(f), OpKind::Delete) => {
                let _ = f.delete(&op.key);
                true
            }
            (Target::Raw(t), OpKind::Insert) => t.insert(&op.key).is_ok(),
            (Target::Raw(t), OpKind::Delete) => {
                t.remove(&op.key);
                true
            }
        }
    }

    fn probe(&self) -> &dyn Probe {
        match self {
            Target::Ocf(f) => f,
            Target::Raw(t) => t,
        }
    }

    fn row(&self, trial: u64, ops_done: u64, (false_positives, probes): (u64, u64), elapsed_ns: u64) -> Row {
        let (occupancy, logical_capacity, internal_buckets, item_count) = match self {
            Target::Ocf(f) => (f.occupancy(), f.capacity(), f.num_buckets(), f.len() as u64),
            Target::Raw(t) => (t.occupancy(), t.num_buckets(), t.num_buckets(), t.item_count()),
        };
        Row {
            trial,
            ops_done,
            occupancy,
            logical_capacity,
            internal_buckets,
            item_count,
            false_positives,
            probes,
            elapsed_ns,
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    let ops = gen_workload(&cfg.workload)?;
    let mut target = Target::new(cfg.subject, &cfg.params)?;
    let mut report = ExperimentReport::default();
    let total = ops.len() as u64;
    let interval = cfg.interval.unwrap_or(total / 100).max(1);

    let run = |target: &mut Target, batch: &[Operation], done: u64, report: &mut ExperimentReport| {
        let start = Instant::now();
        for (i, op) in batch.iter().enumerate() {
            if !target.apply(op) {
                report.insert_failures += 1;
                report.first_failure.get_or_insert(done + i as u64 + 1);
            }
        }
        start.elapsed().as_nanos() as u64
    };

    match cfg.experiment {
        Experiment::Table1 => {
            let elapsed = run(&mut target, &ops, 0, &mut report);
            let mut counts = (0, 0);
            for rep in 0..cfg.reps {
                let (fp, probes) = measure_fp(target.probe(), cfg.probes, cfg.probe_seed.wrapping_add(rep.into()));
                counts.0 += fp;
                counts.1 += probes;
            }
            report.rows.push(target.row(0, total, counts, elapsed));
        }
        Experiment::Fill | Experiment::Trendline => {
            let probes = if cfg.experiment == Experiment::Fill { cfg.probes } else { 0 };
            let measure = |target: &Target, trial: u64| measure_fp(target.probe(), probes, cfg.probe_seed.wrapping_add(trial));
            report.rows.push(target.row(0, 0, measure(&target, 0), 0));
            let mut done = 0;
            for (trial, batch) in (1..).zip(ops.chunks(interval as usize)) {
                let elapsed = run(&mut target, batch, done, &mut report);
                done += batch.len() as u64;
                report.rows.push(target.row(trial, done, measure(&target, trial), elapsed));
            }
        }
    }

    if let Target::Ocf(f) = &target {
        let stats = f.stats();
        report.resizes_up = stats.resizes_up;
        report.resizes_down = stats.resizes_down;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::Phase;

    fn config(experiment: Experiment, subject: Subject, n: u64) -> ExperimentConfig {
        ExperimentConfig {
            experiment,
            subject,
            workload: WorkloadSpec::inserts(5, n),
            params: FilterParams { capacity: 16, sizing: TableSizing::Exact, ..FilterParams::default() },
            probes: 1000,
            reps: 2,
            interval: None,
            probe_seed: 11,
        }
    }

    #[test]
    fn empty_filter_has_no_false_positives() {
        let f = OcfFilter::new(Mode::Pre, FilterParams::default()).unwrap();
        assert_eq!(measure_fp(&f, 1000, 1), (0, 1000));
        assert_eq!(measure_fp(&f, 0, 1), (0, 0));
    }

    #[test]
    fn table1_with_no_keys() {
        let report = run_experiment(&config(Experiment::Table1, Subject::Eof, 0)).unwrap();
        assert_eq!(report.rows.len(), 1);
        let row = &report.rows[0];
        assert_eq!((row.occupancy, row.false_positives, row.probes), (0.0, 0, 2000));
    }

    #[test]
    fn rows_are_ordered_and_bounded() {
        for exp in [Experiment::Fill, Experiment::Trendline] {
            for subject in [Subject::Pre, Subject::Eof, Subject::Raw] {
                let report = run_experiment(&config(exp, subject, 5000)).unwrap();
                assert_eq!(report.rows.len(), 101);
                assert!(report.rows.windows(2).all(|w| w[0].ops_done < w[1].ops_done));
                assert!(report.rows.iter().all(|r| r.false_positives <= r.probes));
                assert_eq!(report.rows.last().unwrap().ops_done, 5000);
            }
        }
    }

    #[test]
    fn raw_never_resizes_and_fails_when_overfilled() {
        let report = run_experiment(&config(Experiment::Trendline, Subject::Raw, 200)).unwrap();
        assert!(report.rows.iter().all(|r| r.logical_capacity == 16));
        assert!(report.insert_failures > 0);
        assert!(report.first_failure.unwrap() <= 65);
        let last = report.last().unwrap();
        assert_eq!(last.item_count + report.insert_failures, 200);
    }

    #[test]
    fn deletes_of_live_keys_run_through() {
        let mut cfg = config(Experiment::Trendline, Subject::Pre, 0);
        cfg.workload.phases = vec![Phase::Insert(4000), Phase::Delete(3900)];
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.last().unwrap().item_count, 100);
        assert!(report.resizes_down > 0);
    }
}
