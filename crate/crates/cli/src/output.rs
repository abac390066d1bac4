use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use tempfile::NamedTempFile;

use crate::error::{usage, CliResult};

/// Writes through a temporary file in the destination directory and renames
/// it into place only after every byte was written.
pub fn write_atomic(
    path: &Path,
    body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> CliResult {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
    let mut w = BufWriter::new(tmp);
    body(&mut w).with_context(|| format!("writing {}", path.display()))?;
    let tmp = w
        .into_inner()
        .map_err(|e| e.into_error())
        .with_context(|| format!("writing {}", path.display()))?;
    tmp.as_file().sync_all().ok();
    tmp.persist(path)
        .map_err(|e| e.error)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Files rendered in memory first so a failure leaves nothing behind.
#[derive(Default)]
pub struct Staged {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Staged {
    pub fn add(
        &mut self,
        path: PathBuf,
        body: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    ) -> CliResult {
        let mut buf = Vec::new();
        body(&mut buf).with_context(|| format!("rendering {}", path.display()))?;
        self.files.push((path, buf));
        Ok(())
    }

    pub fn commit(self) -> CliResult {
        for (path, bytes) in self.files {
            write_atomic(&path, |w| w.write_all(&bytes))?;
        }
        Ok(())
    }
}

pub fn open_input(flag: &str, path: &Path) -> CliResult<impl BufRead> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| usage(flag, format!("cannot open {}: {e}", path.display())))
}
