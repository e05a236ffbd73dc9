//! CSV records and report writers.
//!
//! Every CSV starts with a `# comb-polar <kind> v<version>` comment line
//! followed by a column header.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;

pub const CSV_VERSION: u32 = 1;

pub fn write_header<W: Write>(w: &mut W, kind: &str, columns: &str) -> std::io::Result<()> {
    writeln!(w, "# comb-polar {kind} v{CSV_VERSION}")?;
    writeln!(w, "{columns}")
}

/// 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = n as f64;
    let p = k as f64 / n;
    let d = 1.0 + z * z / n;
    let c = (p + z * z / (2.0 * n)) / d;
    let h = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / d;
    ((c - h).max(0.0), (c + h).min(1.0))
}

/// Why a FER point stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Errors,
    MaxFrames,
}

impl StopReason {
    pub fn name(&self) -> &'static str {
        match self {
            StopReason::Errors => "errors",
            StopReason::MaxFrames => "max_frames",
        }
    }
}

/// One simulated FER point of one arm.
#[derive(Clone, Debug, PartialEq)]
pub struct FerRecord {
    pub arm: String,
    pub snr_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub fer: f64,
    pub wilson_ci_95: (f64, f64),
    /// `master:snr_index:first-last` frame seed path range.
    pub seed_range: String,
    pub stop: StopReason,
}

pub const FER_COLUMNS: &str = "arm,snr_db,frames,frame_errors,fer,ci_low,ci_high,seed_range,stop";

impl FerRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.6e},{:.6e},{:.6e},{},{}",
            self.arm,
            self.snr_db,
            self.frames,
            self.frame_errors,
            self.fer,
            self.wilson_ci_95.0,
            self.wilson_ci_95.1,
            self.seed_range,
            self.stop.name()
        )
    }
}

/// Appends FER rows to a CSV file, flushing after every point so that an
/// interrupted sweep leaves complete rows behind.
pub struct FerWriter {
    out: BufWriter<File>,
}

impl FerWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        write_header(&mut out, "fer", FER_COLUMNS)?;
        out.flush()?;
        Ok(FerWriter { out })
    }

    pub fn append(&mut self, rows: &[FerRecord]) -> Result<()> {
        let block: String = rows.iter().map(|r| r.csv_row() + "\n").collect();
        self.out.write_all(block.as_bytes())?;
        self.out.flush()?;
        Ok(())
    }
}
