//! Result files: CSV tables with a self-describing parameter header line
//! and JSON reports. Formatting is plain `Display` (shortest round-trip
//! for floats), so reruns of the same plan are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// A CSV table under construction.
pub struct Csv {
    buf: String,
}

impl Csv {
    /// Start a table: a `# key=value ...` parameter line, then the header.
    pub fn new(params: &[(&str, String)], columns: &[&str]) -> Csv {
        let mut buf = String::new();
        if !params.is_empty() {
            buf.push('#');
            for (k, v) in params {
                let _ = write!(buf, " {k}={v}");
            }
            buf.push('\n');
        }
        buf.push_str(&columns.join(","));
        buf.push('\n');
        Csv { buf }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    pub fn write_to(&self, path: &Path) -> io::Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, &self.buf)
    }
}

/// `Display` a float deterministically (empty for NaN: "not applicable").
pub fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let body = serde_json::to_string_pretty(value)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    fs::write(path, body + "\n")
}

/// File name tag for one run of a sweep.
pub fn run_tag(axis: &str, value: f64, seed: u64) -> String {
    format!("{axis}_{value}_seed_{seed}")
}

pub fn ensure_dir(path: &PathBuf) -> io::Result<()> {
    fs::create_dir_all(path)
}
