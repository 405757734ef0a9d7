use std::fs;
use std::io::{self, Write};
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;

use crate::{CliError, CliResult, Common};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Where a command's single output document goes.
pub struct Sink<'a> {
    pub format: Format,
    out: Option<&'a Path>,
}

impl<'a> Sink<'a> {
    pub fn new(common: &'a Common, default: Format) -> Self {
        Self { format: common.format.unwrap_or(default), out: common.out.as_deref() }
    }

    pub fn json<T: Serialize>(&self, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?;
        text.push('\n');
        self.emit(text.as_bytes())
    }

    pub fn csv<T: Serialize>(&self, rows: &[T]) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r).map_err(|e| CliError::Usage(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
        self.emit(&bytes)
    }

    fn emit(&self, bytes: &[u8]) -> CliResult<()> {
        let io_err = |e: io::Error| CliError::Usage(format!("cannot write output: {e}"));
        match self.out {
            None => io::stdout().lock().write_all(bytes).map_err(io_err),
            Some(path) => write_atomically(path, bytes).map_err(io_err),
        }
    }
}

/// Writes a sibling temporary file and renames it over `path`.
fn write_atomically(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let name = path.file_name().ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let tmp = path.with_file_name(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}
