use std::fs::{self, File, OpenOptions};
use std::path::{Path, PathBuf};

use quadopo::{Error, Result};
use serde::Serialize;

pub fn csv_writer(path: &Path, append: bool) -> Result<csv::Writer<File>> {
    let file = if append {
        OpenOptions::new().append(true).open(path)?
    } else {
        File::create(path)?
    };
    Ok(csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(file))
}

pub fn write_row<W: std::io::Write>(w: &mut csv::Writer<W>, row: &[String]) -> Result<()> {
    w.write_record(row).map_err(|e| Error::Io(e.into()))
}

pub fn flush<W: std::io::Write>(w: &mut csv::Writer<W>) -> Result<()> {
    w.flush().map_err(Error::Io)
}

/// Shortest round-trip representation, so reruns reproduce files byte for byte.
pub fn num(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:?}")
}

pub fn strings(header: &[&str]) -> Vec<String> {
    header.iter().map(|s| s.to_string()).collect()
}

pub fn write_table(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = csv_writer(path, false)?;
    write_row(&mut w, &strings(header))?;
    for row in rows {
        write_row(&mut w, &row)?;
    }
    flush(&mut w)
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Everything needed to reproduce a run.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub program: &'static str,
    pub code_version: &'static str,
    pub subcommand: String,
    pub argv: Vec<String>,
    pub params: serde_json::Value,
    pub settings: serde_json::Value,
    pub outputs: Vec<String>,
}

pub struct Outputs {
    pub dir: PathBuf,
    pub written: Vec<String>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn path(&mut self, name: &str) -> PathBuf {
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        self.dir.join(name)
    }
}
