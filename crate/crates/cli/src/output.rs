//! Report files. JSON reports share one envelope that embeds the resolved
//! config; the optional timestamp is the only field that varies between
//! otherwise identical runs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

pub const OUT_DIR_ENV: &str = "DISPERSIVE_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "dispersive-out";

#[derive(Debug, Clone)]
pub struct Output {
    dir: PathBuf,
    timestamp: Option<u64>,
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    command: &'a str,
    version: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
    config: &'a C,
    pass: bool,
    result: &'a R,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Failure(format!("{}: {e}", path.display()))
}

impl Output {
    /// Flag, then the environment variable, then [`DEFAULT_OUT_DIR`].
    pub fn resolve(flag: Option<PathBuf>, timestamp: bool) -> Result<Self, CliError> {
        let dir = flag
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        let timestamp = timestamp.then(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        Ok(Self { dir, timestamp })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn report<C: Serialize, R: Serialize>(
        &self,
        name: &str,
        command: &str,
        config: &C,
        pass: bool,
        result: &R,
    ) -> Result<PathBuf, CliError> {
        let env = Envelope {
            command,
            version: env!("CARGO_PKG_VERSION"),
            timestamp: self.timestamp,
            config,
            pass,
            result,
        };
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(&env).map_err(|e| io_err(&path, e))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| io_err(&path, e))?;
        Ok(path)
    }

    /// CSV with a header row taken from the record's field names.
    pub fn csv<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
        for r in rows {
            w.serialize(r).map_err(|e| io_err(&path, e))?;
        }
        w.flush().map_err(|e| io_err(&path, e))?;
        Ok(path)
    }

    pub fn subdir(&self, name: &str) -> Result<PathBuf, CliError> {
        let dir = self.dir.join(name);
        fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        Ok(dir)
    }
}
