//! The run manifest embedded as a comment block at the top of every CSV,
//! and the CSV row format itself.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use gpnp::bench::TrialRow;

pub const CSV_COLUMNS: &str =
    "algorithm,m,n,s,trial,seed,re_er,psnr,f_final,iterations,newton_steps,time_s,success,termination";

/// Everything needed to reproduce a run, written verbatim into the CSV
/// header block.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: String,
    pub params: Vec<(String, String)>,
    pub base_seed: u64,
}

impl RunManifest {
    pub fn new(command: &str, base_seed: u64) -> Self {
        RunManifest {
            command: command.to_string(),
            params: Vec::new(),
            base_seed,
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    /// The `#`-prefixed header block. The timestamp lives here, outside the
    /// data section, so reruns differ only in this comment block and the
    /// wall-time column.
    pub fn header_block(&self) -> String {
        let started = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut out = String::new();
        let _ = writeln!(out, "# tool: gpnp {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "# command: {}", self.command);
        for (k, v) in &self.params {
            let _ = writeln!(out, "# {k}: {v}");
        }
        let _ = writeln!(out, "# base_seed: {}", self.base_seed);
        let _ = writeln!(out, "# started_unix: {started}");
        let _ = writeln!(out, "# columns: {CSV_COLUMNS}");
        out
    }
}

/// One data row. Recovery metrics print in shortest round-trip notation so
/// the data section reproduces bit for bit; the wall-time column is the
/// only machine-dependent field.
pub fn csv_row(row: &TrialRow) -> String {
    format!(
        "{},{},{},{},{},{},{:e},{:e},{:e},{},{},{:.6},{},{}",
        row.algorithm.as_str(),
        row.m,
        row.n,
        row.s,
        row.trial,
        row.seed,
        row.re_er,
        row.psnr,
        row.f_final,
        row.iterations,
        row.newton_steps,
        row.time_s,
        row.success,
        row.termination
    )
}

pub fn write_csv(path: &Path, manifest: &RunManifest, rows: &[TrialRow]) -> std::io::Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(manifest.header_block().as_bytes())?;
    file.write_all(CSV_COLUMNS.as_bytes())?;
    file.write_all(b"\n")?;
    for row in rows {
        file.write_all(csv_row(row).as_bytes())?;
        file.write_all(b"\n")?;
    }
    Ok(())
}
