use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        CliError { code: 2, message: format!("{}: {err}", path.display()) }
    }

    pub fn verify(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }
}

impl From<zxqas::Error> for CliError {
    fn from(e: zxqas::Error) -> Self {
        CliError::usage(e.to_string())
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

pub fn create_dir(path: &Path) -> CliResult {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

/// Writes through a temporary sibling and renames it into place, so readers
/// never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp: PathBuf = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        CliError::io(path, e)
    })
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}
