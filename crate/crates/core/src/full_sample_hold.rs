//! Heavy hitters from a grid of sample-and-hold instances over nested time
//! subsamples.
//!
//! Row `r` thresholds one PRF value per update: update `t` reaches levels
//! `1..=d_r(t)` where level `x` keeps a `2^(1-x)` fraction of time. Each
//! `(r, x)` cell runs its own [`SampleAndHold`] with constants derived for
//! the induced stream length, and a Morris counter tracks the induced
//! length `m_x`. An item's estimate takes the lower median over rows at
//! each level, picks the shallowest level whose length dominates the
//! estimate's `p`-th power, and rescales by the inverse sampling rate.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::meter::StateMeter;
use crate::morris::{MorrisConfig, MorrisCounter};
use crate::params::SketchParams;
use crate::prf::SeededPrf;
use crate::sample_hold::{CounterMode, HoldConfig, Maintenance, SampleAndHold};
use crate::stats::lower_median;
use crate::stream::StreamSketch;
use crate::subsample::deepest_level;

/// What [`FullSampleAndHold::estimate`] returns for the selected level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReturnMode {
    /// Median estimate at the selected level times `2^(level-1)`.
    #[default]
    Rescaled,
    /// Median estimate at the selected level, not rescaled.
    Literal,
    /// Largest rescaled median over all levels.
    MaxOverLevels,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullConfig {
    pub p: f64,
    pub rows: usize,
    pub levels: u32,
    /// Per-level instance configuration, index `x - 1`.
    pub hold: Vec<HoldConfig>,
    pub length_counter: MorrisConfig,
    /// Level `x` qualifies when `slack * m_x >= f_x^p`.
    pub slack: f64,
    pub mode: ReturnMode,
}

impl FullConfig {
    pub fn from_params(params: &SketchParams) -> Result<Self> {
        let levels = params.time_levels.max(1);
        let mut hold = Vec::with_capacity(levels as usize);
        for x in 1..=levels {
            let m_x = params.m_bound.checked_shr(x - 1).unwrap_or(0).max(1);
            hold.push(HoldConfig::from_params(&params.for_substream(params.n, m_x))?);
        }
        Ok(FullConfig {
            p: params.p,
            rows: params.hh_rows.max(1),
            levels,
            hold,
            length_counter: MorrisConfig::with_base(1.0, 1)?,
            slack: libm::pow(800.0 / (params.eps * params.eps), params.p),
            mode: ReturnMode::Rescaled,
        })
    }

    /// Replace every held Morris counter by an exact counter.
    pub fn exact_counters(mut self) -> Self {
        for h in &mut self.hold {
            h.counter = CounterMode::Exact;
        }
        self
    }

    pub fn maintenance(mut self, maintenance: Maintenance) -> Self {
        for h in &mut self.hold {
            h.maintenance = maintenance;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.levels == 0 || self.hold.len() != self.levels as usize {
            return Err(Error::param("grid", "needs at least one row and one level"));
        }
        if !(self.slack > 0.0) {
            return Err(Error::param("slack", "must be positive"));
        }
        for h in &self.hold {
            h.validate()?;
        }
        Ok(())
    }
}

/// The `R x Y` grid.
#[derive(Debug, Clone)]
pub struct FullSampleAndHold {
    config: FullConfig,
    prf: SeededPrf,
    row_prfs: Vec<SeededPrf>,
    /// Cell `(r, x)` at index `r * levels + (x - 1)`, created on first use.
    cells: Vec<Option<SampleAndHold>>,
    lengths: Vec<Option<MorrisCounter>>,
    words: usize,
}

impl FullSampleAndHold {
    pub fn new(config: FullConfig, prf: SeededPrf) -> Result<Self> {
        config.validate()?;
        let cells = config.rows * config.levels as usize;
        let row_prfs = (0..config.rows).map(|r| prf.derive("time").child(r as u64)).collect();
        Ok(FullSampleAndHold {
            config,
            prf,
            row_prfs,
            cells: alloc::vec![None; cells],
            lengths: alloc::vec![None; cells],
            words: 0,
        })
    }

    pub fn from_params(params: &SketchParams, seed: u64) -> Result<Self> {
        Self::new(FullConfig::from_params(params)?, SeededPrf::new(seed, "full-sample-hold"))
    }

    pub fn config(&self) -> &FullConfig {
        &self.config
    }

    fn index(&self, r: usize, x: u32) -> usize {
        r * self.config.levels as usize + (x as usize - 1)
    }

    /// Deepest level that update `t` reaches in row `r`.
    pub fn depth(&self, r: usize, t: u64) -> u32 {
        deepest_level(self.row_prfs[r].bits(t), self.config.levels)
    }

    pub fn cell(&self, r: usize, x: u32) -> Option<&SampleAndHold> {
        self.cells[self.index(r, x)].as_ref()
    }

    /// Morris estimate of the induced length at `(r, x)`.
    pub fn length_estimate(&self, r: usize, x: u32) -> f64 {
        self.lengths[self.index(r, x)].as_ref().map_or(0.0, MorrisCounter::estimate)
    }

    /// Lower median over rows of the cell estimates at level `x`.
    pub fn level_estimate(&self, item: u64, x: u32) -> f64 {
        let mut v: Vec<f64> = (0..self.config.rows)
            .map(|r| self.cell(r, x).and_then(|c| c.estimate(item)).unwrap_or(0.0))
            .collect();
        lower_median(&mut v)
    }

    fn level_length(&self, x: u32) -> f64 {
        let mut v: Vec<f64> = (0..self.config.rows).map(|r| self.length_estimate(r, x)).collect();
        lower_median(&mut v)
    }

    /// Level chosen for `item`: the shallowest `x` with
    /// `slack * m_x >= f_x^p`, falling back to the deepest level.
    pub fn selected_level(&self, item: u64) -> u32 {
        (1..=self.config.levels)
            .find(|&x| self.config.slack * self.level_length(x) >= libm::pow(self.level_estimate(item, x), self.config.p))
            .unwrap_or(self.config.levels)
    }

    /// Frequency estimate; 0 for items tracked nowhere.
    pub fn estimate(&self, item: u64) -> f64 {
        match self.config.mode {
            ReturnMode::MaxOverLevels => (1..=self.config.levels)
                .map(|x| libm::ldexp(self.level_estimate(item, x), x as i32 - 1))
                .fold(0.0, f64::max),
            ReturnMode::Rescaled => {
                let x = self.selected_level(item);
                libm::ldexp(self.level_estimate(item, x), x as i32 - 1)
            }
            ReturnMode::Literal => self.level_estimate(item, self.selected_level(item)),
        }
    }

    /// Every item tracked by some cell.
    pub fn tracked_items(&self) -> BTreeSet<u64> {
        self.cells.iter().flatten().flat_map(|c| c.tracked_items()).collect()
    }

    /// `(item, estimate)` for every tracked item with a positive estimate.
    pub fn estimates(&self) -> Vec<(u64, f64)> {
        self.tracked_items()
            .into_iter()
            .map(|i| (i, self.estimate(i)))
            .filter(|&(_, f)| f > 0.0)
            .collect()
    }

    /// Items whose estimate is at least `0.75 eps norm`.
    pub fn report_heavy(&self, norm: Option<f64>, eps: f64) -> Result<Vec<(u64, f64)>> {
        let norm = norm.ok_or(Error::MissingNorm)?;
        let threshold = 0.75 * eps * norm;
        Ok(self.estimates().into_iter().filter(|&(_, f)| f >= threshold).collect())
    }

    /// Total maintenance events across cells.
    pub fn prunes(&self) -> u64 {
        self.cells.iter().flatten().map(SampleAndHold::prunes).sum()
    }
}

impl StreamSketch for FullSampleAndHold {
    fn process(&mut self, t: u64, item: u64, meter: &mut StateMeter) {
        let mut len_draws = self.prf.derive("length").draws(t);
        for r in 0..self.config.rows {
            let depth = self.depth(r, t);
            for x in 1..=depth {
                let idx = self.index(r, x);
                if self.cells[idx].is_none() {
                    let prf = self.prf.derive("cell").child(idx as u64);
                    let cell = SampleAndHold::new(self.config.hold[x as usize - 1], prf)
                        .expect("validated configuration");
                    self.words += cell.words();
                    self.cells[idx] = Some(cell);
                    self.lengths[idx] = Some(MorrisCounter::new(self.config.length_counter));
                    self.words += self.config.length_counter.copies();
                    meter.mark_dirty();
                }
                let cell = self.cells[idx].as_mut().expect("created above");
                let before = cell.words();
                cell.process(t, item, meter);
                self.words = self.words + cell.words() - before;
                let len = self.lengths[idx].as_mut().expect("created with the cell");
                if len.increment(&mut len_draws) {
                    meter.mark_dirty();
                }
            }
        }
    }

    fn words(&self) -> usize {
        self.words
    }
}
