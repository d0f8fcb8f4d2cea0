//! Plain-text `key=value` experiment configuration.
//!
//! One flat namespace covers data generation, training, prediction,
//! attacks, and the toy model. Every key has a default; unknown keys are
//! rejected so typos fail loudly. The effective configuration (defaults
//! overlaid with file entries and command-line overrides) is what gets
//! hashed into the run manifest: the hash changes exactly when some key's
//! effective value changes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Every key the configuration accepts, with its default value.
pub const KNOWN_KEYS: &[(&str, &str)] = &[
    ("out", "artifacts"),
    ("master_seed", "42"),
    ("seeds", "1,2,3,4,5"),
    ("data.num_classes", "4"),
    ("data.samples_per_class", "250"),
    ("data.dims", "8"),
    ("data.mean_scale", "1.5"),
    // stddev chosen so the default classifier lands around 0.90 test
    // accuracy: errors come from cluster-tail outliers, the regime the
    // density diagnostics are about
    ("data.stddev", "1.0"),
    ("model.hidden", "64,32"),
    ("train.epochs", "400"),
    ("train.batch_size", "128"),
    ("train.learning_rate", "0.05"),
    ("train.momentum", "0.9"),
    ("train.weight_decay", "0.005"),
    ("train.decay_factor", "0.1"),
    // empty means the default milestones at half and three quarters
    ("train.milestones", ""),
    ("lasenn.k", "3"),
    ("lasenn.w_q", "0.88"),
    ("lasenn.metric", "l2"),
    // 0 means the model's last hidden layer
    ("lasenn.layer", "0"),
    ("lasenn.raw_logits", "true"),
    ("attack.kind", "pgd"),
    // epsilon = epsilon_scale * (feature range), step = step_scale * epsilon
    ("attack.epsilon_scale", "0.15"),
    ("attack.step_scale", "0.25"),
    ("attack.num_steps", "10"),
    ("attack.random_start", "true"),
    ("noise.fractions", "0,0.08,0.16,0.32"),
    ("sweep.parameter", "w_q"),
    ("sweep.values", "0,0.52,0.76,0.88,0.94,0.97"),
    ("diagnose.class_a", "0"),
    ("diagnose.bins", "50"),
    ("toy.distribution", "skewed_triangular"),
    ("toy.c_values", "0,0.05,0.1,0.2"),
    ("toy.d", "0.02"),
    ("toy.a", "0.04"),
    ("toy.w_q", "0.88"),
    ("toy.n", "50"),
    ("toy.trials", "110000"),
    ("drift.n_values", "100,10000"),
    ("drift.num_seeds", "31"),
];

/// The effective configuration: defaults overlaid with file and
/// command-line entries, keys sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentConfig {
    values: BTreeMap<String, String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            values: KNOWN_KEYS
                .iter()
                .map(|&(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }
}

impl ExperimentConfig {
    /// Applies one `key=value` assignment; the key must be known.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got '{assignment}'")))?;
        let key = key.trim();
        let value = value.trim();
        if !KNOWN_KEYS.iter().any(|&(k, _)| k == key) {
            return Err(Error::Config(format!("unknown config key '{key}'")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Parses a config file: one `key=value` per line, `#` comments and
    /// blank lines ignored.
    pub fn apply_file<P: AsRef<Path>>(&mut self, path: P) -> Result<()> {
        let text = std::fs::read_to_string(&path).map_err(|e| {
            Error::Config(format!("cannot read config {}: {e}", path.as_ref().display()))
        })?;
        for (number, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            self.set(line)
                .map_err(|e| Error::Config(format!("line {}: {e}", number + 1)))?;
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Result<&str> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Config(format!("unknown config key '{key}'")))
    }

    pub fn get_parsed<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.get(key)?;
        raw.parse().map_err(|_| {
            Error::Config(format!(
                "config key '{key}' has invalid value '{raw}' for its type"
            ))
        })
    }

    pub fn get_bool(&self, key: &str) -> Result<bool> {
        match self.get(key)? {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            other => Err(Error::Config(format!(
                "config key '{key}' must be a boolean, got '{other}'"
            ))),
        }
    }

    /// Comma-separated list; an empty value yields an empty list.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Vec<T>> {
        let raw = self.get(key)?;
        if raw.trim().is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',')
            .map(|item| {
                item.trim().parse().map_err(|_| {
                    Error::Config(format!(
                        "config key '{key}' has invalid list item '{}'",
                        item.trim()
                    ))
                })
            })
            .collect()
    }

    /// SHA-256 over the sorted `key=value` lines of the effective
    /// configuration, hex-encoded.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        for (k, v) in &self.values {
            hasher.update(k.as_bytes());
            hasher.update(b"=");
            hasher.update(v.as_bytes());
            hasher.update(b"\n");
        }
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for byte in digest {
            let _ = write!(hex, "{byte:02x}");
        }
        hex
    }

    /// The sorted `key=value` lines, for echoing into artifacts.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }
}

/// Derives an independent 64-bit seed from a master seed and a purpose
/// tag: the tag is FNV-1a hashed, folded into the master, and the result
/// passed through the splitmix64 finalizer. Every piece of randomness in
/// a run flows from the master seed through this function, so runs are
/// reproducible end to end.
pub fn derive_seed(master: u64, tag: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in tag.as_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    let mut z = master ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_cover_every_known_key() {
        let config = ExperimentConfig::default();
        for &(key, default) in KNOWN_KEYS {
            assert_eq!(config.get(key).unwrap(), default);
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut config = ExperimentConfig::default();
        assert!(config.set("lasenn.kk=3").is_err());
        assert!(config.set("garbage").is_err());
        assert!(config.set("lasenn.k=5").is_ok());
        assert_eq!(config.get("lasenn.k").unwrap(), "5");
    }

    #[test]
    fn file_parsing_skips_comments_and_reports_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "# comment\n\nlasenn.k = 7\ntoy.c_values = 0.1, 0.2\n").unwrap();
        let mut config = ExperimentConfig::default();
        config.apply_file(&path).unwrap();
        assert_eq!(config.get("lasenn.k").unwrap(), "7");
        assert_eq!(config.get_list::<f64>("toy.c_values").unwrap(), vec![0.1, 0.2]);

        std::fs::write(&path, "lasenn.k = 7\nbogus.key = 1\n").unwrap();
        let err = ExperimentConfig::default().apply_file(&path).unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn typed_getters_validate() {
        let mut config = ExperimentConfig::default();
        assert_eq!(config.get_parsed::<usize>("lasenn.k").unwrap(), 3);
        assert!(config.get_bool("lasenn.raw_logits").unwrap());
        assert_eq!(
            config.get_list::<u64>("seeds").unwrap(),
            vec![1, 2, 3, 4, 5]
        );
        assert_eq!(config.get_list::<usize>("train.milestones").unwrap(), vec![]);
        config.set("lasenn.k=three").unwrap();
        assert!(config.get_parsed::<usize>("lasenn.k").is_err());
        config.set("lasenn.raw_logits=maybe").unwrap();
        assert!(config.get_bool("lasenn.raw_logits").is_err());
    }

    #[test]
    fn hash_changes_iff_a_value_changes() {
        let base = ExperimentConfig::default();
        let mut same = ExperimentConfig::default();
        same.set("lasenn.k=3").unwrap(); // explicit default
        assert_eq!(base.hash(), same.hash());
        let mut changed = ExperimentConfig::default();
        changed.set("lasenn.k=4").unwrap();
        assert_ne!(base.hash(), changed.hash());
        assert_eq!(base.hash().len(), 64);
    }

    #[test]
    fn derive_seed_separates_tags_and_masters() {
        let a = derive_seed(42, "data");
        let b = derive_seed(42, "init");
        let c = derive_seed(43, "data");
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(42, "data"));
    }
}
