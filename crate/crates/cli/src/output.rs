use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

/// 17 significant digits, fixed layout.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV with a header row, LF line endings.
pub struct CsvWriter {
    path: PathBuf,
    out: BufWriter<File>,
    columns: usize,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

impl CsvWriter {
    pub fn create(path: PathBuf, header: &[String]) -> Result<Self, CliError> {
        let file = File::create(&path).map_err(io_err(&path))?;
        let mut w = CsvWriter { path, out: BufWriter::new(file), columns: header.len() };
        w.line(header)?;
        Ok(w)
    }

    fn line(&mut self, cells: &[String]) -> Result<(), CliError> {
        let text = cells.join(",");
        writeln!(self.out, "{text}").map_err(io_err(&self.path))
    }

    pub fn row(&mut self, cells: &[String]) -> Result<(), CliError> {
        debug_assert_eq!(cells.len(), self.columns);
        self.line(cells)
    }

    pub fn finish(mut self) -> Result<PathBuf, CliError> {
        self.out.flush().map_err(io_err(&self.path))?;
        Ok(self.path)
    }
}

pub fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn write_json(path: PathBuf, value: &impl Serialize) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io {
        path: path.clone(),
        source: e.into(),
    })?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: PathBuf, text: &str) -> Result<PathBuf, CliError> {
    std::fs::write(&path, text).map_err(io_err(&path))?;
    Ok(path)
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))
}
