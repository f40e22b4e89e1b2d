use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use tempfile::{NamedTempFile, TempDir};

use crate::CliError;

/// Writes `path` through a temporary sibling that is renamed into place.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> Result<(), CliError>) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        fill(&mut w)?;
        w.flush().map_err(|e| CliError::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Builds a directory under a temporary name next to `dest`, then swaps
/// it in, replacing whatever was there.
pub fn write_dir_atomic(dest: &Path, fill: impl FnOnce(&Path) -> Result<(), CliError>) -> Result<(), CliError> {
    let parent = dest.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    let staging = TempDir::new_in(parent).map_err(|e| CliError::io(parent, e))?;
    fill(staging.path())?;
    if dest.exists() {
        std::fs::remove_dir_all(dest).map_err(|e| CliError::io(dest, e))?;
    }
    let staged = staging.keep();
    std::fs::rename(&staged, dest).map_err(|e| CliError::io(dest, e))?;
    Ok(())
}

pub fn create_file(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}
