use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{error::ErrorKind, CommandFactory, Parser, ValueEnum};
use ocf_bench::experiment::{default_capacity, ExperimentError};
use ocf_bench::{emit_csv, run_experiment, Experiment, ExperimentConfig, Subject};
use ocf_core::{FilterParams, TableSizing};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sizing {
    Exact,
    Pow2,
}

/// Run an OCF benchmark experiment and write its rows as CSV.
#[derive(Debug, Parser)]
#[command(name = "ocf-bench", version)]
struct Cli {
    experiment: Experiment,
    #[arg(long, value_enum)]
    mode: Subject,
    #[arg(long, default_value_t = 100_000)]
    keys: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    bucket_size: usize,
    #[arg(long, default_value_t = 8)]
    fp_bits: u32,
    #[arg(long, default_value_t = 0.9)]
    o_max: f64,
    #[arg(long, default_value_t = 0.2)]
    o_min: f64,
    #[arg(long, default_value_t = 0.8)]
    k_max: f64,
    #[arg(long, default_value_t = 0.3)]
    k_min: f64,
    #[arg(long, default_value_t = 1.0 / 16.0)]
    gain: f64,
    /// Probe keys per false-positive batch.
    #[arg(long, default_value_t = 100_000)]
    probes: u64,
    /// Probe batches for table1.
    #[arg(long, default_value_t = 10)]
    reps: u32,
    /// Operations between rows for fill/trendline [default: 1% of --keys].
    #[arg(long)]
    interval: Option<u64>,
    /// Initial logical bucket count [default: 16, or 10,000 items' worth for raw].
    #[arg(long)]
    capacity: Option<u64>,
    #[arg(long, value_enum, default_value_t = Sizing::Exact)]
    sizing: Sizing,
    #[arg(long, default_value_t = 500)]
    max_displacements: u32,
    #[arg(long, default_value_t = 16)]
    key_length: usize,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Cli {
    fn config(&self) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(self.experiment, self.mode, self.keys, self.seed);
        cfg.params = FilterParams {
            capacity: self.capacity.unwrap_or(default_capacity(self.mode, self.bucket_size)),
            bucket_size: self.bucket_size,
            fingerprint_bits: self.fp_bits,
            max_displacements: self.max_displacements,
            o_max: self.o_max,
            o_min: self.o_min,
            k_max: self.k_max,
            k_min: self.k_min,
            estimation_gain: self.gain,
            sizing: match self.sizing {
                Sizing::Exact => TableSizing::Exact,
                Sizing::Pow2 => TableSizing::PowerOfTwo,
            },
            seed: self.seed,
        };
        cfg.workload.key_length = self.key_length;
        cfg.probes = self.probes;
        cfg.reps = self.reps;
        cfg.interval = self.interval;
        cfg
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = cli.config();
    let report = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e @ (ExperimentError::Params(_) | ExperimentError::Workload(_))) => {
            Cli::command().error(ErrorKind::ValueValidation, e).exit()
        }
    };

    if let Err(e) = write_report(&cli, &report) {
        eprintln!("error: {e:#}");
        return ExitCode::FAILURE;
    }

    if let Some(last) = report.last() {
        let batches = match cli.experiment {
            Experiment::Table1 => cli.reps.max(1) as f64,
            _ => report.rows.len() as f64,
        };
        let fps: u64 = report.rows.iter().map(|r| r.false_positives).sum();
        let elapsed: u64 = report.rows.iter().map(|r| r.elapsed_ns).sum();
        eprintln!(
            "{:?}/{:?}: items={} occupancy={:.4} capacity={} buckets={} fp_rate={:.6} avg_fp_per_batch={:.1} \
             insert_failures={} resizes_up={} resizes_down={} throughput={:.0} ops/s",
            cli.experiment,
            cli.mode,
            last.item_count,
            last.occupancy,
            last.logical_capacity,
            last.internal_buckets,
            report.fp_rate(),
            fps as f64 / batches,
            report.insert_failures,
            report.resizes_up,
            report.resizes_down,
            last.ops_done as f64 / (elapsed.max(1) as f64 / 1e9),
        );
    }
    ExitCode::SUCCESS
}

fn write_report(cli: &Cli, report: &ocf_bench::ExperimentReport) -> anyhow::Result<()> {
    match &cli.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            emit_csv(report, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            emit_csv(report, stdout.lock())?;
        }
    }
    Ok(())
}
