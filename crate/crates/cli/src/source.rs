//! Where a trial's stream comes from: a seeded generator or a file.
//!
//! Generator specs are `kind:key=value,...`:
//!
//! | kind          | keys                 |
//! |---------------|----------------------|
//! | `zipf`        | `n`, `m`, `s`        |
//! | `uniform`     | `d`, `copies`        |
//! | `perm`        | `n`                  |
//! | `s1`, `s2`    | `n`, `p` (optional)  |
//! | `planted`     | `n`, `p`, `eps`      |
//! | `pseudoheavy` | `n`                  |
//!
//! Anything else is read as a stream file.

use std::collections::BTreeMap;
use std::path::PathBuf;

use fewstate_core::{generators, Stream};

use crate::config::{ConfigError, Vary};
use crate::io::{read_stream, StreamFileError};

const KINDS: [&str; 7] = ["zipf", "uniform", "perm", "s1", "s2", "planted", "pseudoheavy"];

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Generator { kind: String, args: BTreeMap<String, f64> },
    File(PathBuf),
}

#[derive(Debug, thiserror::Error)]
pub enum SourceError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    File(#[from] StreamFileError),
}

fn bad(spec: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::BadValue {
        key: "stream".into(),
        value: spec.into(),
        reason: reason.into(),
    }
}

impl Source {
    pub fn parse(spec: &str) -> Result<Source, ConfigError> {
        let Some((kind, rest)) = spec.split_once(':') else {
            return Ok(Source::File(PathBuf::from(spec)));
        };
        if !KINDS.contains(&kind) {
            return Ok(Source::File(PathBuf::from(spec)));
        }
        let mut args = BTreeMap::new();
        for pair in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = pair.split_once('=').ok_or_else(|| bad(spec, format!("`{pair}` is not key=value")))?;
            let v: f64 = v.trim().parse().map_err(|_| bad(spec, format!("`{v}` is not a number")))?;
            args.insert(k.trim().to_string(), v);
        }
        Ok(Source::Generator {
            kind: kind.to_string(),
            args,
        })
    }

    pub fn is_file(&self) -> bool {
        matches!(self, Source::File(_))
    }

    /// The same source with the swept parameter set to `value`.
    pub fn with_swept(&self, vary: Vary, value: f64) -> Result<Source, ConfigError> {
        let Source::Generator { kind, args } = self else {
            return Err(ConfigError::Invalid("sweeps over n or m need a generator stream".into()));
        };
        let mut args = args.clone();
        let key = match (vary, kind.as_str()) {
            (Vary::N, "uniform") => "d",
            (Vary::N, _) => "n",
            (Vary::M, "zipf") => "m",
            (Vary::M, "uniform") => "copies",
            (Vary::M, "perm") => "n",
            (Vary::M, _) => {
                return Err(ConfigError::Invalid(format!("`{kind}` streams have length fixed by n")));
            }
            (Vary::Eps, _) => return Ok(self.clone()),
        };
        let value = if key == "copies" {
            (value / args.get("d").copied().unwrap_or(1.0)).round().max(1.0)
        } else {
            value
        };
        args.insert(key.to_string(), value);
        Ok(Source::Generator { kind: kind.clone(), args })
    }

    /// Build the stream for `seed`; `p` fills in a missing `p` argument.
    pub fn build(&self, seed: u64, p: f64) -> Result<Stream, SourceError> {
        let (kind, args) = match self {
            Source::File(path) => return Ok(read_stream(path)?),
            Source::Generator { kind, args } => (kind.as_str(), args),
        };
        let spec = || format!("{kind}:...");
        let get = |key: &str| -> Result<f64, ConfigError> {
            args.get(key).copied().ok_or_else(|| bad(&spec(), format!("missing `{key}`")))
        };
        let int = |key: &str| -> Result<u64, ConfigError> {
            let v = get(key)?;
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as u64)
            } else {
                Err(bad(&spec(), format!("`{key}` must be a positive integer")))
            }
        };
        let core = |e: fewstate_core::Error| SourceError::Config(bad(&spec(), e.to_string()));
        let p_arg = args.get("p").copied().unwrap_or(p);
        let stream = match kind {
            "zipf" => generators::zipf(int("n")?, int("m")?, get("s")?, seed).map_err(core)?,
            "uniform" => generators::uniform(int("d")?, int("copies")?, seed),
            "perm" => generators::permutation(int("n")?, seed),
            "s1" => generators::lowerbound_pair(int("n")?, p_arg, seed).map_err(core)?.s1.stream,
            "s2" => generators::lowerbound_pair(int("n")?, p_arg, seed).map_err(core)?.s2,
            "planted" => generators::planted_hh(int("n")?, p_arg, get("eps")?, seed).map_err(core)?.stream,
            "pseudoheavy" => generators::pseudoheavy(int("n")?, seed).map_err(core)?.stream,
            _ => unreachable!("kind checked at parse time"),
        };
        Ok(stream)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_generators_and_paths() {
        let s = Source::parse("zipf:n=64,m=100,s=1.1").unwrap();
        assert_eq!(s.build(1, 2.0).unwrap().items.len(), 100);
        assert!(Source::parse("data/stream.txt").unwrap().is_file());
        assert!(Source::parse("C:/x").unwrap().is_file());
        assert!(Source::parse("zipf:n=64,m").is_err());
    }

    #[test]
    fn sweep_substitution() {
        let s = Source::parse("perm:n=16").unwrap();
        let t = s.with_swept(Vary::N, 256.0).unwrap();
        assert_eq!(t.build(3, 2.0).unwrap().items.len(), 256);
        let u = Source::parse("uniform:d=8,copies=2").unwrap().with_swept(Vary::M, 64.0).unwrap();
        assert_eq!(u.build(3, 2.0).unwrap().items.len(), 64);
        assert!(Source::parse("s1:n=256").unwrap().with_swept(Vary::M, 10.0).is_err());
    }

    #[test]
    fn missing_and_bad_arguments() {
        assert!(Source::parse("perm:m=4").unwrap().build(1, 2.0).is_err());
        assert!(Source::parse("perm:n=4.5").unwrap().build(1, 2.0).is_err());
        assert!(Source::parse("pseudoheavy:n=1000").unwrap().build(1, 2.0).is_err());
    }
}
