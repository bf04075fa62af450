//! `F_p` for `p` in `(0, 2]` from p-stable projections.
//!
//! Row `i` holds the inner product of the frequency vector with a vector of
//! i.i.d. symmetric p-stable entries `D_i[j]`, each a PRF of `(i, j)`. The
//! positive and negative parts are kept in two monotone
//! [`ApproxAccumulator`]s, so each row only ever grows. The estimate is
//! `(median_i |plus_i - minus_i| / scale)^p` where `scale` is the median of
//! `|X|` for a standard p-stable `X`.
//!
//! All rows share one rounding uniform per update. Each row's rounding is
//! still unbiased, while level changes of different rows tend to coincide
//! on the same updates.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::meter::StateMeter;
use crate::morris::ApproxAccumulator;
use crate::prf::{to_open_unit, SeededPrf};
use crate::stats::{compensated_sum, lower_median};
use crate::stream::StreamSketch;

const HALF_PI: f64 = core::f64::consts::FRAC_PI_2;

/// Chambers-Mallows-Stuck transform of `theta` in `(-pi/2, pi/2)` and
/// `w = -ln r > 0`.
#[inline]
pub fn stable_variate(alpha: f64, theta: f64, w: f64) -> f64 {
    if alpha == 1.0 {
        return libm::tan(theta);
    }
    let a = libm::sin(alpha * theta) / libm::pow(libm::cos(theta), 1.0 / alpha);
    a * libm::pow(libm::cos((1.0 - alpha) * theta) / w, (1.0 - alpha) / alpha)
}

/// `|X|` magnitude factor `A(theta)` with `|X| = A(theta) w^(-(1-alpha)/alpha)`.
fn magnitude(alpha: f64, theta: f64) -> f64 {
    libm::fabs(libm::sin(alpha * theta)) / libm::pow(libm::cos(theta), 1.0 / alpha)
        * libm::pow(libm::cos((1.0 - alpha) * theta), (1.0 - alpha) / alpha)
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || !delta.is_finite() || libm::fabs(delta) <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    // a floor on the per-piece tolerance keeps steep but smooth steps
    // (orders near 1) from splitting without bound
    let half = (tol / 2.0).max(1e-17);
    simpson(f, a, m, fa, flm, fm, left, half, depth - 1) + simpson(f, m, b, fm, frm, fb, right, half, depth - 1)
}

fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    // split into panels so the adaptive rule sees sharp transitions
    let panels = 64;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let lo = a + h * k as f64;
            let hi = lo + h;
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = h / 6.0 * (fa + 4.0 * fm + fb);
            simpson(&f, lo, hi, fa, fm, fb, whole, tol / panels as f64, 40)
        })
        .sum()
}

/// `P(|X| <= x)` for a standard symmetric `alpha`-stable `X`.
pub fn stable_abs_cdf(alpha: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if alpha == 1.0 {
        return 2.0 / core::f64::consts::PI * libm::atan(x);
    }
    let e = alpha / (1.0 - alpha);
    // keep theta strictly inside the open interval
    let lo = 1e-12;
    let hi = HALF_PI - 1e-12;
    let integral = if alpha < 1.0 {
        integrate(|th| libm::exp(-libm::pow(magnitude(alpha, th) / x, e)), lo, hi, 1e-13)
    } else {
        integrate(|th| -libm::expm1(-libm::pow(x / magnitude(alpha, th), -e)), lo, hi, 1e-13)
    };
    (integral * 2.0 / core::f64::consts::PI).clamp(0.0, 1.0)
}

/// Median of `|X|` for a standard symmetric `alpha`-stable `X`.
pub fn stable_abs_median(alpha: f64) -> f64 {
    if alpha == 1.0 {
        return 1.0;
    }
    stable_abs_quantile(alpha, 0.5)
}

/// `q`-quantile of `|X|` for `q` in `(0, 1)`.
pub fn stable_abs_quantile(alpha: f64, q: f64) -> f64 {
    if alpha == 1.0 {
        return libm::tan(q * HALF_PI);
    }
    // bisection on log x
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if stable_abs_cdf(alpha, libm::exp(mid)) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    libm::exp(0.5 * (lo + hi))
}

/// Index range of the middle half of `len` sorted values.
pub fn trimmed_range(len: usize) -> (usize, usize) {
    let lo = len / 4;
    (lo, (len - lo).max(lo + 1).min(len))
}

/// `E[ln|X| given |X| between its quartiles]` for a standard symmetric
/// `alpha`-stable `X`.
///
/// Integration by parts turns it into
/// `2 (0.75 ln b - 0.25 ln a - int_{ln a}^{ln b} F(e^t) dt)` with `a`, `b`
/// the quartiles and `F` the cdf of `|X|`.
pub fn trimmed_log_center(alpha: f64) -> f64 {
    let la = libm::log(stable_abs_quantile(alpha, 0.25));
    let lb = libm::log(stable_abs_quantile(alpha, 0.75));
    // composite Simpson; the integrand is smooth between the quartiles
    let panels = 256;
    let h = (lb - la) / f64::from(panels);
    let f = |t: f64| stable_abs_cdf(alpha, libm::exp(t));
    let mut acc = f(la) + f(lb);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(la + h * f64::from(i));
    }
    let integral = acc * h / 3.0;
    2.0 * (0.75 * lb - 0.25 * la - integral)
}

/// How the two halves of each row are stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Halves {
    /// Approximate accumulators with base `a`.
    Approximate { base: f64 },
    /// Plain floating sums (reference mode, one change per update).
    Exact,
}

/// How row values are turned into a norm estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Estimator {
    /// `median_i |row_i| / median|X|`.
    #[default]
    Median,
    /// `exp(mean of ln|row_i| over the middle half of the rows - c)` where
    /// `c` is the same trimmed mean for a standard p-stable variable. Half
    /// of the rows contribute, so estimates at nearby orders built from the
    /// same randomness move together smoothly.
    TrimmedLogMean,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableConfig {
    pub p: f64,
    pub rows: usize,
    pub halves: Halves,
    pub estimator: Estimator,
    /// One rounding uniform per update shared by all rows.
    pub shared_rounding: bool,
}

impl StableConfig {
    /// `rows = ceil(64 / eps^2)`.
    pub fn new(p: f64, eps: f64, base: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::param("eps", "must lie in (0, 1)"));
        }
        Ok(StableConfig {
            p,
            rows: libm::ceil(64.0 / (eps * eps) - 1e-9) as usize,
            halves: Halves::Approximate { base },
            estimator: Estimator::Median,
            shared_rounding: true,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p <= 2.0) {
            return Err(Error::param("p", "stable sketches need p in (0, 2]"));
        }
        if self.rows == 0 {
            return Err(Error::param("rows", "need at least one row"));
        }
        if let Halves::Approximate { base } = self.halves {
            if !(base > 0.0 && base.is_finite()) {
                return Err(Error::param("base", "accumulator base must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Half {
    Approx(ApproxAccumulator),
    Exact(f64),
}

impl Half {
    fn value(&self) -> f64 {
        match self {
            Half::Approx(a) => a.value(),
            Half::Exact(v) => *v,
        }
    }

    fn add(&mut self, w: f64, u: f64) -> bool {
        match self {
            Half::Approx(a) => a.accumulate_with(w, u).expect("magnitudes are non-negative"),
            Half::Exact(v) => {
                *v += w;
                w != 0.0
            }
        }
    }
}

/// The p-stable sketch.
#[derive(Debug, Clone)]
pub struct StableFp {
    config: StableConfig,
    prf: SeededPrf,
    scale: f64,
    /// Trimmed mean of `ln|X|`; only computed for the trimmed estimator.
    log_center: f64,
    plus: Vec<Half>,
    minus: Vec<Half>,
}

impl StableFp {
    pub fn new(config: StableConfig, seed: u64) -> Result<Self> {
        Self::with_prf(config, SeededPrf::new(seed, "stable"))
    }

    /// Sketches built from the same `prf` use the same random angles and
    /// exponentials for every `(row, item)`, whatever their `p`.
    pub fn with_prf(config: StableConfig, prf: SeededPrf) -> Result<Self> {
        config.validate()?;
        let half = match config.halves {
            Halves::Approximate { base } => Half::Approx(ApproxAccumulator::new(base)?),
            Halves::Exact => Half::Exact(0.0),
        };
        Ok(StableFp {
            config,
            prf,
            scale: stable_abs_median(config.p),
            log_center: match config.estimator {
                Estimator::Median => 0.0,
                Estimator::TrimmedLogMean => trimmed_log_center(config.p),
            },
            plus: alloc::vec![half; config.rows],
            minus: alloc::vec![half; config.rows],
        })
    }

    pub fn config(&self) -> &StableConfig {
        &self.config
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Angle `theta` and exponential `w` behind the entry `D_row[item]`.
    pub fn angles(&self, row: usize, item: u64) -> (f64, f64) {
        let bits = self.prf.bits2(row as u64, item);
        let theta = (to_open_unit(bits) - 0.5) * core::f64::consts::PI;
        let r = to_open_unit(crate::prf::mix64(bits ^ 0xa076_1d64_78bd_642f));
        (theta, -libm::log(r))
    }

    /// Projection entry `D_row[item]`.
    pub fn entry(&self, row: usize, item: u64) -> f64 {
        let (theta, w) = self.angles(row, item);
        stable_variate(self.config.p, theta, w)
    }

    /// Rounding uniform shared by all rows at update `t`.
    pub(crate) fn shared_uniform(&self, t: u64) -> f64 {
        self.prf.derive("round").draws(t).unit()
    }

    /// Add entry `d` to `row` using rounding uniform `u`.
    pub(crate) fn add_entry(&mut self, row: usize, d: f64, u: f64) -> bool {
        let half = if d > 0.0 { &mut self.plus[row] } else { &mut self.minus[row] };
        half.add(libm::fabs(d), u)
    }

    /// Current `plus - minus` of `row`.
    pub fn row_value(&self, row: usize) -> f64 {
        self.plus[row].value() - self.minus[row].value()
    }

    /// Median of `|row value|` over rows.
    pub fn median_abs(&self) -> f64 {
        let mut v: Vec<f64> = (0..self.config.rows).map(|i| libm::fabs(self.row_value(i))).collect();
        lower_median(&mut v)
    }

    /// Mean of `ln |row value|` over the rows ranked in the middle half.
    pub fn trimmed_log_mean(&self) -> f64 {
        let mut v: Vec<f64> = (0..self.config.rows).map(|i| libm::fabs(self.row_value(i))).collect();
        v.sort_unstable_by(f64::total_cmp);
        let (lo, hi) = trimmed_range(v.len());
        let mid = &v[lo..hi];
        if mid.iter().any(|&x| x <= 0.0) {
            return f64::NEG_INFINITY;
        }
        compensated_sum(mid.iter().map(|&x| libm::log(x))) / mid.len() as f64
    }

    /// Estimate of `||f||_p`.
    pub fn norm_estimate(&self) -> f64 {
        match self.config.estimator {
            Estimator::Median => self.median_abs() / self.scale,
            Estimator::TrimmedLogMean => libm::exp(self.trimmed_log_mean() - self.log_center),
        }
    }

    /// Estimate of `F_p`.
    pub fn estimate(&self) -> f64 {
        libm::pow(self.norm_estimate(), self.config.p)
    }
}

impl StreamSketch for StableFp {
    fn process(&mut self, t: u64, item: u64, meter: &mut StateMeter) {
        let mut draws = self.prf.derive("round").draws(t);
        let shared = draws.unit();
        let mut changed = false;
        for i in 0..self.config.rows {
            let d = self.entry(i, item);
            let u = if self.config.shared_rounding { shared } else { draws.unit() };
            changed |= self.add_entry(i, d, u);
        }
        if changed {
            meter.mark_dirty();
        }
    }

    fn words(&self) -> usize {
        2 * self.config.rows
    }
}
