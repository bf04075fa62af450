//! Experiment configuration: a flat `key=value` file plus command-line
//! overrides, applied in that order.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use fewstate_core::stable::Estimator;
use fewstate_core::{Preset, Practical};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for `{key}`: {reason}")]
    BadValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("{path}:{line}: expected `key=value`")]
    Syntax { path: String, line: usize },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    SampleHold,
    FullSampleHold,
    Fp,
    StableFp,
    Entropy,
    MisraGries,
    SpaceSaving,
    CountMin,
}

impl Algo {
    pub const ALL: [Algo; 8] = [
        Algo::SampleHold,
        Algo::FullSampleHold,
        Algo::Fp,
        Algo::StableFp,
        Algo::Entropy,
        Algo::MisraGries,
        Algo::SpaceSaving,
        Algo::CountMin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algo::SampleHold => "sample-hold",
            Algo::FullSampleHold => "full-sample-hold",
            Algo::Fp => "fp",
            Algo::StableFp => "stable-fp",
            Algo::Entropy => "entropy",
            Algo::MisraGries => "mg",
            Algo::SpaceSaving => "ss",
            Algo::CountMin => "cm",
        }
    }

    /// Heavy-hitter algorithms report the estimated count of the most
    /// frequent item; the rest estimate a stream statistic.
    pub fn is_heavy_hitter(self) -> bool {
        matches!(
            self,
            Algo::SampleHold | Algo::FullSampleHold | Algo::MisraGries | Algo::SpaceSaving | Algo::CountMin
        )
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algo::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm (one of {})", Algo::ALL.map(Algo::name).join(", ")))
    }
}

/// Swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vary {
    N,
    M,
    Eps,
}

impl FromStr for Vary {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "n" => Ok(Vary::N),
            "m" => Ok(Vary::M),
            "eps" => Ok(Vary::Eps),
            _ => Err("expected n, m or eps".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub algo: Algo,
    pub p: f64,
    pub eps: f64,
    pub delta: f64,
    /// `true` for the paper-faithful constants.
    pub paper: bool,
    pub practical: Practical,
    pub trials: usize,
    pub seed: u64,
    /// A generator spec such as `zipf:n=4096,m=32768,s=1.1` or a file path.
    pub stream: String,
    pub out: Option<PathBuf>,
    /// Record wall time; off by default so output bytes are reproducible.
    pub timing: bool,
    /// Accumulator base of the stable sketch.
    pub stable_base: f64,
    /// Rows of the stable sketch; `None` means `ceil(64 / eps^2)`.
    pub stable_rows: Option<usize>,
    pub estimator: Estimator,
    /// Rows per node of the entropy sketch.
    pub entropy_rows: usize,
    /// Candidate set size of CountMin.
    pub cm_candidates: usize,
    pub vary: Vary,
    pub values: Vec<f64>,
    /// Algorithms compared by `compare`.
    pub algos: Vec<Algo>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            algo: Algo::FullSampleHold,
            p: 2.0,
            eps: 0.5,
            delta: 0.1,
            paper: false,
            practical: Practical::default(),
            trials: 1,
            seed: 1,
            stream: "zipf:n=4096,m=32768,s=1.1".into(),
            out: None,
            timing: false,
            stable_base: 4.0,
            stable_rows: None,
            estimator: Estimator::Median,
            entropy_rows: 800,
            cm_candidates: 32,
            vary: Vary::N,
            values: Vec::new(),
            algos: vec![Algo::FullSampleHold, Algo::SampleHold, Algo::MisraGries, Algo::SpaceSaving, Algo::CountMin],
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::BadValue {
        key: key.into(),
        value: value.into(),
        reason: e.to_string(),
    })
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(ConfigError::BadValue {
            key: key.into(),
            value: value.into(),
            reason: "expected true or false".into(),
        }),
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

impl Config {
    pub fn preset(&self) -> Preset {
        if self.paper {
            Preset::PaperFaithful
        } else {
            Preset::Practical(self.practical)
        }
    }

    /// Set one key. Keys match the command-line flag names with `_` in
    /// place of `-`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key.trim() {
            "algo" => self.algo = parse(key, value)?,
            "p" => self.p = parse(key, value)?,
            "eps" => self.eps = parse(key, value)?,
            "delta" => self.delta = parse(key, value)?,
            "preset" => {
                self.paper = match value {
                    "paper" => true,
                    "practical" => false,
                    _ => {
                        return Err(ConfigError::BadValue {
                            key: key.into(),
                            value: value.into(),
                            reason: "expected paper or practical".into(),
                        })
                    }
                }
            }
            "trials" => self.trials = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "stream" => self.stream = value.to_string(),
            "out" => self.out = Some(PathBuf::from(value)),
            "timing" => self.timing = parse_bool(key, value)?,
            "gamma" => self.practical.gamma = parse(key, value)?,
            "log_factor" => self.practical.log_factor = parse(key, value)?,
            "kappa" => self.practical.kappa = parse(key, value)?,
            "k_scale" => self.practical.k_scale = parse(key, value)?,
            "counter_eps_div" => self.practical.counter_eps_div = parse(key, value)?,
            "counter_delta" => self.practical.counter_delta = parse(key, value)?,
            "hh_rows" => self.practical.hh_rows = parse(key, value)?,
            "fp_rows" => self.practical.fp_rows = parse(key, value)?,
            "stable_base" => self.stable_base = parse(key, value)?,
            "stable_rows" => self.stable_rows = Some(parse(key, value)?),
            "estimator" => {
                self.estimator = match value {
                    "median" => Estimator::Median,
                    "trimmed" => Estimator::TrimmedLogMean,
                    _ => {
                        return Err(ConfigError::BadValue {
                            key: key.into(),
                            value: value.into(),
                            reason: "expected median or trimmed".into(),
                        })
                    }
                }
            }
            "entropy_rows" => self.entropy_rows = parse(key, value)?,
            "cm_candidates" => self.cm_candidates = parse(key, value)?,
            "vary" => self.vary = parse(key, value)?,
            "values" => self.values = parse_list(key, value)?,
            "algos" => self.algos = parse_list(key, value)?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Apply a `key=value` text. Blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                path: origin.to_string(),
                line: i + 1,
            })?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<String, std::io::Error> {
        std::fs::read_to_string(path)
    }

    /// Range checks that do not depend on the stream.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: &str| Err(ConfigError::Invalid(msg.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad("eps must lie in (0, 1)");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("delta must lie in (0, 1)");
        }
        if !(self.p > 0.0 && self.p.is_finite()) {
            return bad("p must be positive");
        }
        match self.algo {
            Algo::SampleHold | Algo::FullSampleHold | Algo::Fp if self.p < 1.0 => {
                bad("this algorithm needs p >= 1; use stable-fp for p < 1")
            }
            Algo::StableFp if self.p > 2.0 => bad("stable-fp needs p in (0, 2]"),
            _ => Ok(()),
        }
    }
}
