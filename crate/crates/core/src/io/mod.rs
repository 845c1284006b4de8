//! Delimited-text data files and the model file.
//!
//! Every table has a header row. Seconds are written with 6 decimals and
//! other reals with 9 significant digits. All writes go to a temporary file
//! in the destination directory and are renamed into place.

mod model;
mod tables;

pub use model::{read_model, render_model, write_model, ModelFile};
pub use tables::*;

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Seconds, fixed-point with 6 decimals.
pub fn fmt_seconds(t: f64) -> String {
    format!("{t:.6}")
}

/// A real at 9 significant digits.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.8e}")
}

/// Writes `contents` to `path` via a temporary sibling and rename, creating
/// parent directories as needed.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(io_err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
