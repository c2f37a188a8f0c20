//! Run directories and CSV files.
//!
//! Every CSV starts with a single `# generated <timestamp>` line, which is
//! the only part of a run's output that changes between identical runs.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};

pub struct RunDir {
    path: PathBuf,
    stamp: String,
}

impl RunDir {
    /// Creates `<parent>/<mode>-<timestamp>/`, adding a counter if that
    /// directory already exists.
    pub fn create(parent: &Path, mode: &str, now: DateTime<Utc>) -> io::Result<Self> {
        fs::create_dir_all(parent)?;
        let base = format!("{mode}-{}", now.format("%Y%m%dT%H%M%S%.3fZ"));
        let mut attempt = 0;
        loop {
            let name = if attempt == 0 {
                base.clone()
            } else {
                format!("{base}-{attempt}")
            };
            let path = parent.join(name);
            match fs::create_dir(&path) {
                Ok(()) => {
                    return Ok(Self {
                        path,
                        stamp: now.to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
                    })
                }
                Err(e) if e.kind() == io::ErrorKind::AlreadyExists => attempt += 1,
                Err(e) => return Err(e),
            }
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn file(&self, name: &str) -> io::Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.path.join(name))?))
    }

    /// Opens a CSV and writes its timestamp line.
    pub fn csv(&self, name: &str) -> io::Result<BufWriter<File>> {
        let mut out = self.file(name)?;
        writeln!(out, "# generated {}", self.stamp)?;
        Ok(out)
    }
}

/// Writes `header` and `rows` (already formatted fields) to a CSV.
pub fn write_table(
    dir: &RunDir,
    name: &str,
    header: &[&str],
    rows: &[Vec<String>],
) -> io::Result<()> {
    let mut out = dir.csv(name)?;
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()
}
