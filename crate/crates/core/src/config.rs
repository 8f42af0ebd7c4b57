//! Flat key=value run configuration with command-line overrides.
//!
//! No nested config language: every run is reproducible from a sorted list
//! of `key = value` lines, which the manifest echoes verbatim.

use crate::params::{CMode, HMode, SieveParams};
use crate::sequence::{format_rational, parse_rational, GrowthSequence};
use crate::sieve::{DyadicCell, ZoomStrategy};
use crate::validate::RetentionMethod;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config: cannot read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config: line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("config: unknown key `{0}`")]
    UnknownKey(String),
    #[error("config: invalid value `{value}` for `{key}`")]
    BadValue { key: String, value: String },
    #[error("config: gamma {given} does not match the sequence exponent {actual}")]
    GammaMismatch { given: String, actual: String },
    #[error("config: {0}")]
    Invalid(String),
}

/// Window selection: automatic (seeded, default width 2^-20 capped by
/// `l_{n_from}`) or a pinned `level:index` cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowSpec {
    Auto,
    Cell { level: u32, index: u128 },
}

impl WindowSpec {
    pub fn parse(s: &str) -> Option<Self> {
        if s == "auto" {
            return Some(WindowSpec::Auto);
        }
        let (l, i) = s.split_once(':')?;
        Some(WindowSpec::Cell {
            level: l.trim().parse().ok()?,
            index: i.trim().parse().ok()?,
        })
    }

    pub fn to_string_key(self) -> String {
        match self {
            WindowSpec::Auto => "auto".into(),
            WindowSpec::Cell { level, index } => format!("{level}:{index}"),
        }
    }
}

pub const AUTO_WINDOW_LEVEL: u32 = 20;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub sequence: String,
    pub n_min: u64,
    pub gamma: Option<BigRational>,
    pub c_mode: CMode,
    pub c_value: Option<BigRational>,
    pub h_mode: HMode,
    pub n_start: u64,
    pub eps2: BigRational,
    pub v: BigRational,
    pub ladder_depth: u32,
    pub index_cap: u64,
    pub window: WindowSpec,
    pub n_from: u64,
    pub n_to: u64,
    pub strategy: ZoomStrategy,
    pub seed: u64,
    pub precision: u32,
    pub memory_budget: usize,
    pub threads: usize,
    pub out_dir: PathBuf,
    pub lemma1_samples: usize,
    pub lemma1_n_lo: u64,
    pub lemma1_n_hi: u64,
    pub retention_samples: usize,
    pub retention_method: RetentionMethod,
    pub alpha_num: Option<String>,
    pub alpha_level: Option<u32>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            sequence: "poly:1,0,0".into(),
            n_min: 2,
            gamma: None,
            c_mode: CMode::Paper,
            c_value: None,
            h_mode: HMode::Effective,
            n_start: 32,
            eps2: parse_rational("1/100").expect("literal"),
            v: parse_rational("3/5").expect("literal"),
            ladder_depth: 3,
            index_cap: 10_u64.pow(13),
            window: WindowSpec::Auto,
            n_from: 32,
            n_to: 10_000,
            strategy: ZoomStrategy::Leftmost,
            seed: 0,
            precision: 96,
            memory_budget: 1 << 25,
            threads: 0,
            out_dir: PathBuf::from("out"),
            lemma1_samples: 100,
            lemma1_n_lo: 32,
            lemma1_n_hi: 200,
            retention_samples: 3,
            retention_method: RetentionMethod::CertifiedLowerBound,
            alpha_num: None,
            alpha_level: None,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut config = RunConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: i + 1, text: line.into() })?;
            config.set(key.trim(), value.trim())?;
        }
        Ok(config)
    }

    /// Apply one `key=value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = || ConfigError::BadValue { key: key.into(), value: value.into() };
        match key {
            "sequence" => self.sequence = value.into(),
            "n_min" => self.n_min = value.parse().map_err(|_| bad())?,
            "gamma" => self.gamma = Some(parse_rational(value).ok_or_else(bad)?),
            "c_mode" => {
                self.c_mode = match value {
                    "paper" => CMode::Paper,
                    "custom" => CMode::Custom,
                    _ => return Err(bad()),
                }
            }
            "c_value" => self.c_value = Some(parse_rational(value).ok_or_else(bad)?),
            "h_mode" => {
                self.h_mode = match value {
                    "paper" => HMode::Paper,
                    "effective" => HMode::Effective,
                    _ => return Err(bad()),
                }
            }
            "n_start" => self.n_start = value.parse().map_err(|_| bad())?,
            "eps2" => self.eps2 = parse_rational(value).ok_or_else(bad)?,
            "v" => self.v = parse_rational(value).ok_or_else(bad)?,
            "ladder_depth" => self.ladder_depth = value.parse().map_err(|_| bad())?,
            "index_cap" => self.index_cap = value.parse().map_err(|_| bad())?,
            "window" => self.window = WindowSpec::parse(value).ok_or_else(bad)?,
            "n_from" => self.n_from = value.parse().map_err(|_| bad())?,
            "n_to" => self.n_to = value.parse().map_err(|_| bad())?,
            "strategy" => self.strategy = value.parse().map_err(|_| bad())?,
            "seed" => self.seed = value.parse().map_err(|_| bad())?,
            "precision" => self.precision = value.parse().map_err(|_| bad())?,
            "memory_budget" => self.memory_budget = value.parse().map_err(|_| bad())?,
            "threads" => self.threads = value.parse().map_err(|_| bad())?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "lemma1_samples" => self.lemma1_samples = value.parse().map_err(|_| bad())?,
            "lemma1_n_lo" => self.lemma1_n_lo = value.parse().map_err(|_| bad())?,
            "lemma1_n_hi" => self.lemma1_n_hi = value.parse().map_err(|_| bad())?,
            "retention_samples" => self.retention_samples = value.parse().map_err(|_| bad())?,
            "retention_method" => {
                self.retention_method = match value {
                    "exact" => RetentionMethod::Exact,
                    "certified" | "certified-lower-bound" => {
                        RetentionMethod::CertifiedLowerBound
                    }
                    _ => return Err(bad()),
                }
            }
            "alpha_num" => self.alpha_num = Some(value.into()),
            "alpha_level" => self.alpha_level = Some(value.parse().map_err(|_| bad())?),
            other => return Err(ConfigError::UnknownKey(other.into())),
        }
        Ok(())
    }

    /// Build the sequence and parameter objects, validating consistency.
    pub fn build(&self) -> Result<(GrowthSequence, SieveParams), ConfigError> {
        let seq = GrowthSequence::parse_with_n_min(&self.sequence, self.n_min)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if let Some(g) = &self.gamma {
            if g != seq.gamma() {
                return Err(ConfigError::GammaMismatch {
                    given: format_rational(g),
                    actual: format_rational(seq.gamma()),
                });
            }
        }
        let mut params = SieveParams::new(seq.gamma().clone())
            .map_err(|e| ConfigError::Invalid(e.to_string()))?
            .with_h_mode(self.h_mode)
            .with_n_start(self.n_start)
            .with_eps2(self.eps2.clone())
            .with_index_cap(self.index_cap)
            .with_precision(self.precision);
        params = params.with_v(self.v.clone()).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.c_mode == CMode::Custom {
            let c = self
                .c_value
                .clone()
                .ok_or_else(|| ConfigError::Invalid("c_mode=custom requires c_value".into()))?;
            params = params.with_custom_c(c).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        Ok((seq, params))
    }

    /// Resolve the window spec against the first sieved stage: `auto` picks a
    /// seeded interior cell at level `min(20, l_{n_from})`.
    pub fn resolve_window(
        &self,
        seq: &GrowthSequence,
        params: &SieveParams,
    ) -> Result<DyadicCell, ConfigError> {
        match self.window {
            WindowSpec::Cell { level, index } => Ok(DyadicCell::new(level, index)),
            WindowSpec::Auto => {
                let l_from = params
                    .dyadic_level(seq, self.n_from.max(2))
                    .map_err(|e| ConfigError::Invalid(e.to_string()))?;
                let level = AUTO_WINDOW_LEVEL.min(l_from);
                let span = 1u128 << level;
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let index = if level < 3 {
                    0
                } else {
                    rng.gen_range(span / 8..span - span / 8)
                };
                Ok(DyadicCell::new(level, index))
            }
        }
    }

    /// Sorted `key = value` echo for the manifest; identical configs produce
    /// identical echoes.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut map = BTreeMap::new();
        map.insert("sequence".to_string(), self.sequence.clone());
        map.insert("n_min".into(), self.n_min.to_string());
        if let Some(g) = &self.gamma {
            map.insert("gamma".into(), format_rational(g));
        }
        map.insert(
            "c_mode".into(),
            match self.c_mode {
                CMode::Paper => "paper".into(),
                CMode::Custom => "custom".to_string(),
            },
        );
        if let Some(c) = &self.c_value {
            map.insert("c_value".into(), format_rational(c));
        }
        map.insert(
            "h_mode".into(),
            match self.h_mode {
                HMode::Paper => "paper".into(),
                HMode::Effective => "effective".to_string(),
            },
        );
        map.insert("n_start".into(), self.n_start.to_string());
        map.insert("eps2".into(), format_rational(&self.eps2));
        map.insert("v".into(), format_rational(&self.v));
        map.insert("ladder_depth".into(), self.ladder_depth.to_string());
        map.insert("index_cap".into(), self.index_cap.to_string());
        map.insert("window".into(), self.window.to_string_key());
        map.insert("n_from".into(), self.n_from.to_string());
        map.insert("n_to".into(), self.n_to.to_string());
        map.insert(
            "strategy".into(),
            match self.strategy {
                ZoomStrategy::Leftmost => "leftmost".into(),
                ZoomStrategy::MaxRun => "max-run".into(),
                ZoomStrategy::SeededRandom => "seeded-random".to_string(),
            },
        );
        map.insert("seed".into(), self.seed.to_string());
        map.insert("precision".into(), self.precision.to_string());
        map.insert("memory_budget".into(), self.memory_budget.to_string());
        map.insert("threads".into(), self.threads.to_string());
        map.insert("lemma1_samples".into(), self.lemma1_samples.to_string());
        map.insert("lemma1_n_lo".into(), self.lemma1_n_lo.to_string());
        map.insert("lemma1_n_hi".into(), self.lemma1_n_hi.to_string());
        map.insert("retention_samples".into(), self.retention_samples.to_string());
        map.insert(
            "retention_method".into(),
            match self.retention_method {
                RetentionMethod::Exact => "exact".into(),
                RetentionMethod::CertifiedLowerBound => "certified".to_string(),
            },
        );
        if let Some(a) = &self.alpha_num {
            map.insert("alpha_num".into(), a.clone());
        }
        if let Some(l) = self.alpha_level {
            map.insert("alpha_level".into(), l.to_string());
        }
        map.into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_build() {
        let config = RunConfig::default();
        let (seq, params) = config.build().unwrap();
        assert_eq!(seq.gamma(), &parse_rational("2").unwrap());
        assert_eq!(params.n_start(), 32);
        let window = config.resolve_window(&seq, &params).unwrap();
        assert_eq!(window.level, 20);
        // seeded auto window is reproducible
        let again = config.resolve_window(&seq, &params).unwrap();
        assert_eq!(window, again);
    }

    #[test]
    fn overrides_and_echo() {
        let mut config = RunConfig::default();
        config.set("sequence", "poly:1,0,0,0").unwrap();
        config.set("n_to", "500").unwrap();
        config.set("window", "12:345").unwrap();
        config.set("c_mode", "custom").unwrap();
        config.set("c_value", "0.45").unwrap();
        assert!(config.set("nonsense_key", "1").is_err());
        assert!(config.set("n_to", "not-a-number").is_err());
        let (seq, _params) = config.build().unwrap();
        assert_eq!(seq.gamma(), &parse_rational("3").unwrap());
        let echo = config.echo();
        assert!(echo.iter().any(|(k, v)| k == "window" && v == "12:345"));
        assert!(echo.iter().any(|(k, v)| k == "c_value" && v == "9/20"));
    }

    #[test]
    fn gamma_mismatch_rejected() {
        let mut config = RunConfig::default();
        config.set("gamma", "3").unwrap();
        assert!(matches!(config.build(), Err(ConfigError::GammaMismatch { .. })));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "# comment\nsequence = poly:1,0\nn_from = 5\nn_to = 50\nseed = 9\n")
            .unwrap();
        let config = RunConfig::from_file(&path).unwrap();
        assert_eq!(config.n_from, 5);
        assert_eq!(config.seed, 9);
        let bad = dir.path().join("bad.conf");
        std::fs::write(&bad, "just words\n").unwrap();
        assert!(matches!(
            RunConfig::from_file(&bad),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
    }
}
