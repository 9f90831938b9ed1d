//! Experiment rows and their CSV encoding.

use std::io::{self, Write};

pub const CSV_HEADER: [&str; 9] = [
    "trial",
    "ops_done",
    "occupancy",
    "logical_capacity",
    "internal_buckets",
    "item_count",
    "false_positives",
    "probes",
    "elapsed_ns",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub trial: u64,
    pub ops_done: u64,
    pub occupancy: f64,
    pub logical_capacity: u64,
    pub internal_buckets: u64,
    pub item_count: u64,
    pub false_positives: u64,
    pub probes: u64,
    pub elapsed_ns: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<Row>,
    /// Inserts the subject could not place. Only the RAW baseline has any.
    pub insert_failures: u64,
    /// 1-based index of the first failed insert.
    pub first_failure: Option<u64>,
    pub resizes_up: u64,
    pub resizes_down: u64,
}

impl ExperimentReport {
    pub fn last(&self) -> Option<&Row> {
        self.rows.last()
    }

    /// False positives per probe over all rows.
    pub fn fp_rate(&self) -> f64 {
        let (fp, probes) = self
            .rows
            .iter()
            .fold((0, 0), |(f, p), r| (f + r.false_positives, p + r.probes));
        if probes == 0 {
            0.0
        } else {
            fp as f64 / probes as f64
        }
    }
}

struct Counting<W> {
    inner: W,
    written: u64,
}

impl<W: Write> Write for Counting<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.written += n as u64;
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

/// Writes the header plus one LF-terminated line per row and returns the
/// number of bytes written.
pub fn emit_csv<W: Write>(report: &ExperimentReport, sink: W) -> io::Result<u64> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Counting { inner: sink, written: 0 });
    out.write_record(CSV_HEADER)?;
    for r in &report.rows {
        out.write_record([
            r.trial.to_string(),
            r.ops_done.to_string(),
            format!("{:.6}", r.occupancy),
            r.logical_capacity.to_string(),
            r.internal_buckets.to_string(),
            r.item_count.to_string(),
            r.false_positives.to_string(),
            r.probes.to_string(),
            r.elapsed_ns.to_string(),
        ])?;
    }
    out.flush()?;
    let counting = out.into_inner().map_err(|e| e.into_error())?;
    Ok(counting.written)
}
