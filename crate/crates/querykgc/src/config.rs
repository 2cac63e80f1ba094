//! Run parameters: built-in defaults, then a `key=value` file, then flags.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::Failure;

pub struct Param {
    pub key: &'static str,
    pub default: Option<&'static str>,
    pub help: &'static str,
}

const fn param(key: &'static str, default: Option<&'static str>, help: &'static str) -> Param {
    Param { key, default, help }
}

pub const PARAMS: &[Param] = &[
    param(
        "seed",
        None,
        "root seed; required by commands that draw random numbers",
    ),
    param(
        "threads",
        Some("1"),
        "worker threads; never changes outputs",
    ),
    param("ratios", Some("0.7,0.1,0.2"), "train,dev,test split ratios"),
    param(
        "strict",
        Some("false"),
        "abort on the first malformed input line",
    ),
    param(
        "format",
        Some("auto"),
        "graph file format: nt, tsv or auto (by extension)",
    ),
    param("decode", Some("true"), "percent-decode query log lines"),
    param(
        "drop_numeric",
        Some("true"),
        "drop entities with all-digit local names",
    ),
    param(
        "drop_url_only",
        Some("true"),
        "drop entities that are bare URLs",
    ),
    param(
        "list_prefix",
        Some("List_of"),
        "drop entities with this local-name prefix; empty disables",
    ),
    param("dim", Some("200"), "embedding dimension"),
    param("gamma", Some("12"), "margin"),
    param("negatives", Some("8"), "negatives per positive"),
    param(
        "negative_weight",
        None,
        "divisor of each negative term; defaults to negatives",
    ),
    param("learning_rate", Some("0.01"), "SGD step size"),
    param("epochs", Some("100"), "training epochs"),
    param("batch_size", Some("128"), "positives per SGD step"),
    param("norm", Some("L1"), "distance norm: L1 or L2"),
    param(
        "predictions",
        Some("1000"),
        "predictions per sampling method",
    ),
    param(
        "orientation",
        Some("SubjectKnown"),
        "pair orientation used for guidance and evaluation",
    ),
    param(
        "weighting",
        Some("uniform"),
        "QG pair weighting: uniform or frequency",
    ),
    param("top_k", Some("100"), "pairs used by the top-k baseline"),
    param(
        "per_pair",
        Some("10"),
        "completions per pair for the top-k baseline",
    ),
    param("block_size", Some("4096"), "proposals per sampling block"),
    param(
        "starvation_blocks",
        Some("10000"),
        "give up after this many blocks without a new prediction",
    ),
    param("es_bins", Some("50"), "embedding-score bins"),
    param("sample_size", Some("200"), "pairs per annotation sheet"),
];

/// Keys that affect scheduling only and stay out of the digest.
const UNDIGESTED: &[&str] = &["threads"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Settings {
    values: BTreeMap<&'static str, String>,
}

impl Default for Settings {
    fn default() -> Self {
        let values = PARAMS
            .iter()
            .filter_map(|p| p.default.map(|d| (p.key, d.to_string())))
            .collect();
        Self { values }
    }
}

fn known(key: &str) -> Result<&'static str, Failure> {
    PARAMS
        .iter()
        .find(|p| p.key == key)
        .map(|p| p.key)
        .ok_or_else(|| Failure::Usage(format!("unknown setting `{key}`")))
}

impl Settings {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), Failure> {
        let key = known(key.trim())?;
        self.values.insert(key, value.trim().to_string());
        Ok(())
    }

    /// `key=value` assignment as given on the command line.
    pub fn set_pair(&mut self, assignment: &str) -> Result<(), Failure> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("expected KEY=VALUE, got `{assignment}`")))?;
        self.set(k, v)
    }

    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), Failure> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Failure::Usage(format!("{origin}:{}: expected key=value", i + 1)))?;
            self.set(k, v)
                .map_err(|e| Failure::Usage(format!("{origin}:{}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Failure::Usage(format!("cannot read config file {}: {e}", path.display()))
        })?;
        self.apply_text(&text, &path.display().to_string())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, Failure>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self
            .raw(key)
            .ok_or_else(|| Failure::Usage(format!("setting `{key}` is required")))?;
        raw.parse()
            .map_err(|e| Failure::Usage(format!("invalid value `{raw}` for `{key}`: {e}")))
    }

    pub fn get_bool(&self, key: &str) -> Result<bool, Failure> {
        match self.raw(key).map(str::to_ascii_lowercase).as_deref() {
            Some("true" | "1" | "yes" | "on") => Ok(true),
            Some("false" | "0" | "no" | "off") => Ok(false),
            Some(other) => Err(Failure::Usage(format!(
                "invalid boolean `{other}` for `{key}`"
            ))),
            None => Err(Failure::Usage(format!("setting `{key}` is required"))),
        }
    }

    pub fn seed(&self) -> Result<u64, Failure> {
        if self.raw("seed").is_none() {
            return Err(Failure::Usage(
                "a seed is required: pass --seed or set seed= in the config file".into(),
            ));
        }
        self.get("seed")
    }

    /// Effective settings, one `key=value` per line, sorted by key.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    /// SHA-256 over the sorted effective settings, scheduling keys excluded.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for (k, v) in &self.values {
            if UNDIGESTED.contains(k) {
                continue;
            }
            hasher.update(k.as_bytes());
            hasher.update(b"=");
            hasher.update(v.as_bytes());
            hasher.update(b"\n");
        }
        let mut hex = String::with_capacity(64);
        for b in hasher.finalize() {
            let _ = write!(hex, "{b:02x}");
        }
        hex
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layering_and_digest() {
        let mut s = Settings::default();
        s.apply_text("# comment\nseed = 3\ndim=16\n", "test")
            .unwrap();
        assert_eq!(s.get::<usize>("dim").unwrap(), 16);
        let before = s.digest();
        s.set("threads", "8").unwrap();
        assert_eq!(s.digest(), before);
        s.set_pair("dim=32").unwrap();
        assert_ne!(s.digest(), before);
        assert!(s.set("nope", "1").is_err());
        assert!(s.apply_text("dim", "test").is_err());
        assert_eq!(s.seed().unwrap(), 3);
        assert!(Settings::default().seed().is_err());
    }
}
