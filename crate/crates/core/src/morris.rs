//! Approximate counters.
//!
//! A [`MorrisCounter`] stores, per independent copy, an exponent `c` that
//! represents the count `((1+a)^c - 1) / a`. An increment raises `c` with
//! probability `(1+a)^-c`, so the stored state changes only about
//! `log_{1+a}(1 + a m)` times over `m` increments. The estimate is the
//! median over copies.
//!
//! [`ApproxAccumulator`] extends the same representation to non-negative
//! real increments: the new value is rounded up or down to one of the two
//! neighbouring representable values with probabilities that keep the
//! represented value unbiased.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::prf::Draws;
use crate::stats::lower_median;

/// Base and copy count shared by many counters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorrisConfig {
    a: f64,
    ln1pa: f64,
    copies: usize,
}

impl MorrisConfig {
    /// Counter with `(1 + eps)` accuracy and failure probability `delta`.
    ///
    /// Each copy uses base `a = 2 eps^2` (relative standard deviation about
    /// `eps`); the median of `2 ceil(ln(1/delta)) + 1` copies concentrates
    /// inside `(1 +- eps)`.
    pub fn new(eps: f64, delta: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::param("eps", "must lie in (0, 1)"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::param("delta", "must lie in (0, 1)"));
        }
        let copies = 2 * libm::ceil(libm::log(1.0 / delta)) as usize + 1;
        Self::with_base(2.0 * eps * eps, copies)
    }

    pub fn with_base(a: f64, copies: usize) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::param("a", "base must be positive"));
        }
        if copies == 0 {
            return Err(Error::param("copies", "need at least one copy"));
        }
        Ok(MorrisConfig {
            a,
            ln1pa: libm::log1p(a),
            copies,
        })
    }

    pub fn base(&self) -> f64 {
        self.a
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    /// Value represented by level `c`.
    #[inline]
    pub fn value(&self, c: u32) -> f64 {
        libm::expm1(f64::from(c) * self.ln1pa) / self.a
    }

    /// `ceil(log_{1+a}(1 + a m))`, the level a copy reaches in expectation
    /// (by Jensen) after `m` increments.
    pub fn level_bound(&self, m: u64) -> u64 {
        libm::ceil(libm::log1p(self.a * m as f64) / self.ln1pa) as u64
    }
}

/// Median-of-copies Morris counter.
#[derive(Debug, Clone, PartialEq)]
pub struct MorrisCounter {
    config: MorrisConfig,
    levels: Vec<u32>,
    /// Cached `(1+a)^-c` per copy; a function of `levels`.
    step_prob: Vec<f64>,
}

impl MorrisCounter {
    pub fn new(config: MorrisConfig) -> Self {
        MorrisCounter {
            config,
            levels: alloc::vec![0; config.copies],
            step_prob: alloc::vec![1.0; config.copies],
        }
    }

    pub fn config(&self) -> &MorrisConfig {
        &self.config
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    /// Count one occurrence. Returns `true` when any level changed.
    pub fn increment(&mut self, draws: &mut Draws) -> bool {
        let mut changed = false;
        for (c, prob) in self.levels.iter_mut().zip(self.step_prob.iter_mut()) {
            if *prob >= 1.0 || draws.unit() < *prob {
                *c += 1;
                *prob = libm::exp(-f64::from(*c) * self.config.ln1pa);
                changed = true;
            }
        }
        changed
    }

    /// Median over copies of the represented count.
    pub fn estimate(&self) -> f64 {
        if self.levels.len() == 1 {
            return self.config.value(self.levels[0]);
        }
        let mut v: Vec<f64> = self.levels.iter().map(|&c| self.config.value(c)).collect();
        lower_median(&mut v)
    }

    /// Words of memory: one per copy.
    pub fn words(&self) -> usize {
        self.levels.len()
    }
}

/// Monotone approximate accumulator for non-negative real increments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxAccumulator {
    a: f64,
    ln1pa: f64,
    level: u32,
    /// Cached values of `level` and `level + 1`.
    cur: f64,
    next: f64,
}

impl ApproxAccumulator {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::param("a", "base must be positive"));
        }
        Ok(ApproxAccumulator {
            a,
            ln1pa: libm::log1p(a),
            level: 0,
            cur: 0.0,
            next: 1.0,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn base(&self) -> f64 {
        self.a
    }

    #[inline]
    fn value_at(&self, c: u32) -> f64 {
        libm::expm1(f64::from(c) * self.ln1pa) / self.a
    }

    /// Currently represented value `((1+a)^c - 1) / a`.
    pub fn value(&self) -> f64 {
        self.cur
    }

    /// The two candidate levels after adding `w` and the probability of
    /// taking the upper one.
    pub fn step_distribution(&self, w: f64) -> (u32, u32, f64) {
        let target = self.cur + w;
        if target < self.next {
            return (self.level, self.level + 1, ((target - self.cur) / (self.next - self.cur)).clamp(0.0, 1.0));
        }
        let mut lo = libm::floor(libm::log1p(self.a * target) / self.ln1pa).max(f64::from(self.level)) as u32;
        while lo > self.level && self.value_at(lo) > target {
            lo -= 1;
        }
        while self.value_at(lo + 1) <= target {
            lo += 1;
        }
        let base = self.value_at(lo);
        let up = (target - base) / (self.value_at(lo + 1) - base);
        (lo, lo + 1, up.clamp(0.0, 1.0))
    }

    /// Add `w >= 0` using the uniform `u` for the rounding decision.
    /// Returns `true` when the level changed.
    pub fn accumulate_with(&mut self, w: f64, u: f64) -> Result<bool> {
        if w < 0.0 || w.is_nan() {
            return Err(Error::NegativeIncrement(w));
        }
        if w == 0.0 {
            return Ok(false);
        }
        let (lo, hi, up) = self.step_distribution(w);
        let next = if u < up { hi } else { lo };
        if next == self.level {
            return Ok(false);
        }
        self.level = next;
        self.cur = self.value_at(next);
        self.next = self.value_at(next + 1);
        Ok(true)
    }

    pub fn accumulate(&mut self, w: f64, draws: &mut Draws) -> Result<bool> {
        let u = draws.unit();
        self.accumulate_with(w, u)
    }
}
