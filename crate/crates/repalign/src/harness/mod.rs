//! Experiment harness: flat key=value configs with documented precedence
//! (CLI flags over config file over defaults), run manifests, and the
//! five commands behind the `repalign` binary.
//!
//! A manifest is written atomically at the end of every run. Its config
//! section is the fully resolved key=value map, so feeding a manifest
//! back through `--config` reruns the command with identical settings;
//! in sequential mode that reproduces every CSV byte for byte. Meta
//! information (command, version, duration, output list) lives in `#`
//! comment lines that the config parser ignores.

mod commands;

pub use commands::{cmd_align, cmd_diff, cmd_gd, cmd_peaks, cmd_train};

use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Flat string-to-string configuration with typed accessors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvConfig {
    map: BTreeMap<String, String>,
}

impl KvConfig {
    pub fn new() -> KvConfig {
        KvConfig::default()
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.map.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|s| s.as_str())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    /// Overlays `other`'s entries onto this config (`other` wins).
    pub fn apply(&mut self, other: &KvConfig) {
        for (k, v) in &other.map {
            self.map.insert(k.clone(), v.clone());
        }
    }

    /// Parses a flat key=value file; `#` lines and blank lines are ignored.
    pub fn from_file(path: &Path) -> Result<KvConfig> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = KvConfig::new();
        for (i, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or(Error::Parse {
                line: i + 1,
                msg: format!("expected key=value, found '{trimmed}'"),
            })?;
            cfg.set(key.trim(), value.trim());
        }
        Ok(cfg)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.map.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                Error::invalid_config(format!("config key '{key}': cannot parse '{raw}'"))
            }),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.get(key).unwrap_or(default)
    }

    /// Comma-separated u64 list.
    pub fn u64_list(&self, key: &str) -> Result<Option<Vec<u64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .split(',')
                .map(|t| {
                    t.trim().parse::<u64>().map_err(|_| {
                        Error::invalid_config(format!("config key '{key}': bad entry '{t}'"))
                    })
                })
                .collect::<Result<Vec<u64>>>()
                .map(Some),
        }
    }

    /// Comma-separated f64 list.
    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .split(',')
                .map(|t| {
                    t.trim().parse::<f64>().map_err(|_| {
                        Error::invalid_config(format!("config key '{key}': bad entry '{t}'"))
                    })
                })
                .collect::<Result<Vec<f64>>>()
                .map(Some),
        }
    }
}

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Record of one command run: full config echo plus meta comments.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seeds: Vec<u64>,
    pub duration_ms: u128,
    pub outputs: Vec<String>,
    /// Free-form meta lines (e.g. step-size sweep winners).
    pub notes: Vec<String>,
    pub config: KvConfig,
}

pub const MANIFEST_FILE: &str = "manifest.txt";

impl RunManifest {
    /// Writes `manifest.txt` atomically into `dir` and returns its path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let mut out = String::new();
        out.push_str("# repalign run manifest\n");
        out.push_str(&format!("# command: {}\n", self.command));
        out.push_str(&format!("# version: {}\n", self.version));
        let seeds: Vec<String> = self.seeds.iter().map(|s| s.to_string()).collect();
        out.push_str(&format!("# seeds: {}\n", seeds.join(",")));
        out.push_str(&format!("# duration_ms: {}\n", self.duration_ms));
        for o in &self.outputs {
            out.push_str(&format!("# output: {o}\n"));
        }
        for n in &self.notes {
            out.push_str(&format!("# {n}\n"));
        }
        for (k, v) in self.config.entries() {
            out.push_str(&format!("{k}={v}\n"));
        }
        let path = dir.join(MANIFEST_FILE);
        crate::io::write_atomic(&path, &out)?;
        Ok(path)
    }
}

/// Shared state every command uses to emit files and finish with a
/// manifest.
pub(crate) struct RunContext {
    pub command: &'static str,
    pub out_dir: PathBuf,
    pub config: KvConfig,
    pub outputs: Vec<String>,
    pub notes: Vec<String>,
    started: std::time::Instant,
}

impl RunContext {
    pub fn new(command: &'static str, config: &KvConfig, out_dir: &Path) -> Result<RunContext> {
        std::fs::create_dir_all(out_dir)?;
        let mut config = config.clone();
        config.set("command", command);
        Ok(RunContext {
            command,
            out_dir: out_dir.to_path_buf(),
            config,
            outputs: Vec::new(),
            notes: Vec::new(),
            started: std::time::Instant::now(),
        })
    }

    /// Comment lines stamped into every CSV this run emits.
    pub fn stamp(&self, seed_note: &str) -> Vec<String> {
        vec![format!("generated by: repalign {} {seed_note}", self.command)]
    }

    pub fn write_file(&mut self, name: &str, content: &str) -> Result<()> {
        crate::io::write_atomic(&self.out_dir.join(name), content)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn write_curve(
        &mut self,
        name: &str,
        seed_note: &str,
        curve: &crate::align::AlignmentCurve,
    ) -> Result<()> {
        let comments = self.stamp(seed_note);
        crate::io::write_curve_csv(&self.out_dir.join(name), &comments, curve)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn write_csv(&mut self, name: &str, seed_note: &str, header: &str, rows: &[String]) -> Result<()> {
        let text = crate::io::csv_text(&self.stamp(seed_note), header, rows);
        self.write_file(name, &text)
    }

    /// Writes the manifest and returns the list of emitted files.
    pub fn finish(mut self, seeds: Vec<u64>) -> Result<Vec<String>> {
        let manifest = RunManifest {
            command: self.command.to_string(),
            version: ARTIFACT_VERSION.to_string(),
            seeds,
            duration_ms: self.started.elapsed().as_millis(),
            outputs: self.outputs.clone(),
            notes: self.notes.clone(),
            config: self.config.clone(),
        };
        manifest.write(&self.out_dir)?;
        self.outputs.push(MANIFEST_FILE.to_string());
        Ok(self.outputs)
    }
}
