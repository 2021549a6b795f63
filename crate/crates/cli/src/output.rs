//! Result sinks: CSV rows in grid order, JSON documents and the sidecar.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ScanConfig;

pub const CSV_HEADER: &str = "lambda,gamma,temperature,r,N,quantity,value,err_estimate";

/// Marker written as the final row of a finished CSV.
pub const COMPLETE: &str = "complete";

/// One CSV row. Axes that do not apply to a quantity are left empty.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Row {
    pub lambda: Option<f64>,
    pub gamma: Option<f64>,
    pub temperature: Option<f64>,
    pub r: Option<usize>,
    pub n: Option<usize>,
    pub quantity: String,
    pub value: f64,
    pub err_estimate: Option<f64>,
}

impl Row {
    pub fn new(quantity: &str, value: f64) -> Row {
        Row {
            quantity: quantity.to_owned(),
            value,
            ..Default::default()
        }
    }

    pub fn err(mut self, e: f64) -> Row {
        self.err_estimate = Some(e);
        self
    }

    fn render(&self) -> String {
        fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        let mut s = String::new();
        let _ = write!(
            s,
            "{},{},{},{},{},{},{},{}",
            opt(self.lambda),
            opt(self.gamma),
            opt(self.temperature),
            opt(self.r),
            opt(self.n),
            self.quantity,
            self.value,
            self.err_estimate.map(|e| format!("{e:e}")).unwrap_or_default()
        );
        s
    }
}

/// Writes rows as they arrive and flushes after every batch, so an
/// interrupted scan leaves a readable prefix without the marker.
pub struct CsvSink {
    out: Box<dyn Write>,
    rows: usize,
}

impl CsvSink {
    pub fn create(path: Option<&Path>) -> io::Result<CsvSink> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(io::stdout().lock()),
        };
        let mut sink = CsvSink { out, rows: 0 };
        writeln!(sink.out, "{CSV_HEADER}")?;
        Ok(sink)
    }

    pub fn write_batch(&mut self, rows: &[Row]) -> io::Result<()> {
        for row in rows {
            writeln!(self.out, "{}", row.render())?;
        }
        self.rows += rows.len();
        self.out.flush()
    }

    /// Appends the completion marker (its value is the data-row count).
    pub fn finish(mut self) -> io::Result<usize> {
        writeln!(self.out, "{}", Row::new(COMPLETE, self.rows as f64).render())?;
        self.out.flush()?;
        Ok(self.rows)
    }
}

pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> io::Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    match path {
        Some(p) => std::fs::write(p, text + "\n"),
        None => {
            let mut out = io::stdout().lock();
            writeln!(out, "{text}")
        }
    }
}

/// `results.csv` → `results.meta.json`.
pub fn sidecar_path(output: &Path) -> PathBuf {
    output.with_extension("meta.json")
}

#[derive(Serialize)]
struct Meta<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a ScanConfig,
    rows: Option<usize>,
}

pub fn write_sidecar(output: &Path, config: &ScanConfig, rows: Option<usize>) -> io::Result<()> {
    let meta = Meta {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config,
        rows,
    };
    write_json(Some(&sidecar_path(output)), &meta)
}
