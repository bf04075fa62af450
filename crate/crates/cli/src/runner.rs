//! Trials, sweeps and comparisons, and their CSV output.

use std::io::Write;
use std::time::Instant;

use fewstate_core::baselines::{CountMin, MisraGries, SpaceSaving};
use fewstate_core::entropy::{EntropyConfig, EntropySketch};
use fewstate_core::fp::FpEstimator;
use fewstate_core::full_sample_hold::FullSampleAndHold;
use fewstate_core::oracle::FrequencyOracle;
use fewstate_core::sample_hold::SampleAndHold;
use fewstate_core::stable::{Halves, StableConfig, StableFp};
use fewstate_core::{derive_params, run_metered, StateMeter, Stream, StreamSketch};
use rayon::prelude::*;

use crate::config::{Algo, Config, ConfigError, Vary};
use crate::source::{Source, SourceError};
use crate::CliError;

pub const COLUMNS: [&str; 13] = [
    "trial",
    "seed",
    "algo",
    "n",
    "m",
    "p",
    "eps",
    "estimate",
    "oracle",
    "rel_err",
    "state_changes",
    "peak_words",
    "wall_ms",
];

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub trial: u64,
    pub seed: u64,
    pub algo: Algo,
    pub n: u64,
    pub m: u64,
    pub p: f64,
    pub eps: f64,
    pub estimate: f64,
    pub oracle: f64,
    pub rel_err: f64,
    pub state_changes: u64,
    pub peak_words: u64,
    pub wall_ms: u64,
}

impl Row {
    fn record(&self) -> [String; 13] {
        [
            self.trial.to_string(),
            self.seed.to_string(),
            self.algo.to_string(),
            self.n.to_string(),
            self.m.to_string(),
            self.p.to_string(),
            self.eps.to_string(),
            self.estimate.to_string(),
            self.oracle.to_string(),
            self.rel_err.to_string(),
            self.state_changes.to_string(),
            self.peak_words.to_string(),
            self.wall_ms.to_string(),
        ]
    }
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

fn core_err(e: fewstate_core::Error) -> CliError {
    CliError::Config(ConfigError::Invalid(e.to_string()))
}

fn drive<S: StreamSketch>(mut sketch: S, items: &[u64]) -> (S, StateMeter) {
    let mut meter = StateMeter::new();
    run_metered(&mut sketch, items, &mut meter);
    (sketch, meter)
}

/// Run `config.algo` once on `stream` with sketch seed `seed`; returns the
/// estimate, the oracle value and the meter.
pub fn measure(config: &Config, stream: &Stream, seed: u64) -> Result<(f64, f64, StateMeter), CliError> {
    let items = &stream.items;
    let m = items.len() as u64;
    let oracle = FrequencyOracle::from_items(items);
    let (top, top_count) = oracle.top().unwrap_or((0, 0));
    let params = || derive_params(stream.n.max(2), m.max(1), config.eps, config.delta, config.p, config.preset());
    let top_count = top_count as f64;
    let out = match config.algo {
        Algo::SampleHold => {
            let (s, meter) = drive(SampleAndHold::from_params(&params().map_err(core_err)?, seed).map_err(core_err)?, items);
            (s.estimate(top).unwrap_or(0.0), top_count, meter)
        }
        Algo::FullSampleHold => {
            let sketch = FullSampleAndHold::from_params(&params().map_err(core_err)?, seed).map_err(core_err)?;
            let (s, meter) = drive(sketch, items);
            (s.estimate(top), top_count, meter)
        }
        Algo::Fp => {
            let (s, meter) = drive(FpEstimator::from_params(&params().map_err(core_err)?, seed).map_err(core_err)?, items);
            (s.estimate(m), oracle.exact_fp(config.p), meter)
        }
        Algo::StableFp => {
            let mut sc = StableConfig::new(config.p, config.eps, config.stable_base.max(f64::MIN_POSITIVE))
                .map_err(core_err)?;
            if config.stable_base == 0.0 {
                sc.halves = Halves::Exact;
            }
            if let Some(rows) = config.stable_rows {
                sc.rows = rows;
            }
            sc.estimator = config.estimator;
            let (s, meter) = drive(StableFp::new(sc, seed).map_err(core_err)?, items);
            (s.estimate(), oracle.exact_fp(config.p), meter)
        }
        Algo::Entropy => {
            let ec = EntropyConfig::new(config.eps, m.max(4), config.entropy_rows);
            let (s, meter) = drive(EntropySketch::new(ec, seed).map_err(core_err)?, items);
            (s.estimate(m).unwrap_or(f64::NAN), oracle.exact_entropy(), meter)
        }
        Algo::MisraGries => {
            let (s, meter) = drive(MisraGries::for_eps(config.eps).map_err(core_err)?, items);
            (s.estimate(top), top_count, meter)
        }
        Algo::SpaceSaving => {
            let k = (2.0 / config.eps).ceil() as usize;
            let (s, meter) = drive(SpaceSaving::new(k).map_err(core_err)?, items);
            (s.estimate(top), top_count, meter)
        }
        Algo::CountMin => {
            let cm = CountMin::for_eps(config.eps, config.delta, config.cm_candidates, seed).map_err(core_err)?;
            let (s, meter) = drive(cm, items);
            (s.estimate(top), top_count, meter)
        }
    };
    Ok(out)
}

/// `(estimate - oracle) / oracle`; the plain difference when the oracle
/// value is zero.
pub fn relative_error(estimate: f64, oracle: f64) -> f64 {
    if oracle == 0.0 {
        estimate - oracle
    } else {
        (estimate - oracle) / oracle
    }
}

fn trial_row(config: &Config, source: &Source, shared: Option<&Stream>, trial: u64) -> Result<Row, CliError> {
    let seed = config.seed.wrapping_add(trial);
    let built;
    let stream = match shared {
        Some(s) => s,
        None => {
            built = source.build(seed, config.p)?;
            &built
        }
    };
    let start = Instant::now();
    let (estimate, oracle, meter) = measure(config, stream, seed)?;
    let wall_ms = if config.timing { start.elapsed().as_millis() as u64 } else { 0 };
    Ok(Row {
        trial,
        seed,
        algo: config.algo,
        n: stream.n,
        m: stream.items.len() as u64,
        p: config.p,
        eps: config.eps,
        estimate,
        oracle,
        rel_err: relative_error(estimate, oracle),
        state_changes: meter.total_state_changes(),
        peak_words: meter.peak_words(),
        wall_ms,
    })
}

/// All trials of `config`, in trial order.
pub fn run(config: &Config) -> Result<Vec<Row>, CliError> {
    config.validate()?;
    let source = Source::parse(&config.stream)?;
    run_source(config, &source)
}

fn run_source(config: &Config, source: &Source) -> Result<Vec<Row>, CliError> {
    // a file is read once and shared by every trial
    let shared = if source.is_file() { Some(source.build(config.seed, config.p)?) } else { None };
    (0..config.trials as u64)
        .into_par_iter()
        .map(|t| trial_row(config, source, shared.as_ref(), t))
        .collect()
}

/// Every algorithm of `config.algos` on the same streams.
pub fn compare(config: &Config) -> Result<Vec<Row>, CliError> {
    let mut rows = Vec::new();
    for &algo in &config.algos {
        let c = Config { algo, ..config.clone() };
        rows.extend(run(&c)?);
    }
    Ok(rows)
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub points: usize,
}

pub fn fit_slope(points: &[(f64, f64)]) -> Result<Fit, ConfigError> {
    if points.len() < 4 {
        return Err(ConfigError::Invalid(format!("a slope fit needs at least 4 points, got {}", points.len())));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(ConfigError::Invalid("a log-log fit needs positive values".into()));
    }
    let k = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(ConfigError::Invalid("sweep values must differ".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(Fit {
        slope,
        intercept,
        stderr: (sse / (k - 2.0) / sxx).sqrt(),
        points: points.len(),
    })
}

/// Run every sweep value and fit the mean state changes against it.
pub fn sweep(config: &Config) -> Result<(Vec<Row>, Fit), CliError> {
    config.validate()?;
    if config.values.len() < 4 {
        return Err(ConfigError::Invalid(format!("a sweep needs at least 4 values, got {}", config.values.len())).into());
    }
    let base = Source::parse(&config.stream)?;
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for &v in &config.values {
        let mut c = config.clone();
        if config.vary == Vary::Eps {
            c.eps = v;
            c.validate()?;
        }
        let source = base.with_swept(config.vary, v)?;
        let point = run_source(&c, &source)?;
        let mean = point.iter().map(|r| r.state_changes as f64).sum::<f64>() / point.len() as f64;
        points.push((v, mean));
        rows.extend(point);
    }
    let fit = fit_slope(&points)?;
    Ok((rows, fit))
}

impl From<SourceError> for CliError {
    fn from(e: SourceError) -> Self {
        match e {
            SourceError::Config(c) => CliError::Config(c),
            SourceError::File(f) => CliError::Stream(f),
        }
    }
}
