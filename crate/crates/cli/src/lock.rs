use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Exclusive marker file; removed when dropped.
pub struct OutputLock(PathBuf);

impl OutputLock {
    pub fn acquire(path: &Path) -> Result<Self, CliError> {
        match OpenOptions::new().write(true).create_new(true).open(path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(OutputLock(path.to_path_buf()))
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(CliError::Operational(format!(
                "{} exists: another run is using this output (delete it if stale)",
                path.display()
            ))),
            Err(e) => Err(CliError::Operational(format!("cannot create {}: {e}", path.display()))),
        }
    }

    /// Lock guarding a single output file.
    pub fn for_file(file: &Path) -> Result<Self, CliError> {
        let mut name = file.file_name().unwrap_or_default().to_os_string();
        name.push(".lock");
        Self::acquire(&file.with_file_name(name))
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.0);
    }
}
