//! `realdyn.conf`: one `key=value` per line, `#` starts a comment.

use std::fmt;
use std::path::Path;

use thiserror::Error;

pub const CONFIG_FILE: &str = "realdyn.conf";
pub const THREADS_ENV: &str = "REALDYN_THREADS";

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub depth: usize,
    pub tolerance: f64,
    pub max_iter: usize,
    pub threads: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

fn machine_threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            depth: 12,
            tolerance: 0.02,
            max_iter: 100_000,
            threads: machine_threads(),
            seed: 0,
        }
    }
}

impl RunConfig {
    /// Sets one key; accepts the flag spellings (`tol`, `max-iter`) as aliases.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("bad value for {key}: {v:?}"))
        }
        match key {
            "depth" => self.depth = num(key, value)?,
            "tolerance" | "tol" => self.tolerance = num(key, value)?,
            "max_iter" | "max-iter" => self.max_iter = num(key, value)?,
            "threads" => self.threads = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Overlays the text on `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ConfigError::Line { line: i + 1, message };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got {line:?}")))?;
            self.set(k.trim(), v.trim()).map_err(err)?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut c = RunConfig::default();
        c.apply_text(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.depth == 0 {
            return bad("depth must be positive");
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return bad("tolerance must be positive");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive");
        }
        if self.threads == 0 {
            return bad("threads must be positive");
        }
        Ok(())
    }

    /// Defaults, then the file (an explicit path must exist; `realdyn.conf` in the
    /// working directory is optional), then `REALDYN_THREADS`.
    pub fn load(path: Option<&Path>, threads_env: Option<&str>) -> Result<Self, ConfigError> {
        let mut c = RunConfig::default();
        let (p, required) = match path {
            Some(p) => (p.to_path_buf(), true),
            None => (Path::new(CONFIG_FILE).to_path_buf(), false),
        };
        match std::fs::read_to_string(&p) {
            Ok(text) => c.apply_text(&text)?,
            Err(e) if required || e.kind() != std::io::ErrorKind::NotFound => {
                return Err(ConfigError::Io {
                    path: p.display().to_string(),
                    message: e.to_string(),
                })
            }
            Err(_) => {}
        }
        if let Some(t) = threads_env {
            c.set("threads", t.trim())
                .map_err(|m| ConfigError::Invalid(format!("{THREADS_ENV}: {m}")))?;
        }
        Ok(c)
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "depth={}", self.depth)?;
        writeln!(f, "tolerance={}", self.tolerance)?;
        writeln!(f, "max_iter={}", self.max_iter)?;
        writeln!(f, "threads={}", self.threads)?;
        writeln!(f, "seed={}", self.seed)
    }
}
