//! Result files. JSON outputs wrap the payload with provenance; CSV outputs
//! start with `#` provenance comments. Wall-clock data goes to a separate
//! `run.meta.json` so the result files stay byte-identical across runs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub core_version: &'static str,
    pub seed: u64,
    pub config_hash: String,
}

impl Provenance {
    pub fn new(seed: u64, config_hash: String) -> Self {
        Provenance {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            core_version: glauber_core::VERSION,
            seed,
            config_hash,
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    provenance: &'a Provenance,
    kind: &'a str,
    result: &'a T,
}

pub struct OutputDir {
    dir: PathBuf,
    provenance: Provenance,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(dir: &Path, provenance: Provenance) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            provenance,
            written: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, kind: &str, result: &T) -> Result<PathBuf, CliError> {
        let env = Envelope {
            provenance: &self.provenance,
            kind,
            result,
        };
        let mut text = serde_json::to_string_pretty(&env).expect("results serialise");
        text.push('\n');
        self.write(name, &text)
    }

    /// `body` is the header line plus rows, without provenance.
    pub fn csv(&mut self, name: &str, body: &str) -> Result<PathBuf, CliError> {
        let p = &self.provenance;
        let mut text = String::new();
        let _ = writeln!(text, "# {} {} (core {})", p.tool, p.version, p.core_version);
        let _ = writeln!(text, "# seed {}", p.seed);
        let _ = writeln!(text, "# config_hash {}", p.config_hash);
        text.push_str(body);
        self.write(name, &text)
    }

    /// Plain file whose format has no room for provenance.
    pub fn raw(&mut self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        self.write(name, contents)
    }

    /// Writes `run.meta.json` with the timestamp and wall time.
    pub fn finish(mut self, command: &str, elapsed: Duration) -> Result<Vec<String>, CliError> {
        #[derive(Serialize)]
        struct Meta<'a> {
            command: &'a str,
            timestamp_unix: u64,
            elapsed_seconds: f64,
            config_hash: &'a str,
            files: &'a [String],
        }
        let meta = Meta {
            command,
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            elapsed_seconds: elapsed.as_secs_f64(),
            config_hash: &self.provenance.config_hash,
            files: &self.written,
        };
        let mut text = serde_json::to_string_pretty(&meta).expect("meta serialises");
        text.push('\n');
        let path = self.dir.join("run.meta.json");
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        self.written.push("run.meta.json".into());
        Ok(self.written)
    }
}
