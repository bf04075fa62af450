//! Classical heavy-hitter summaries under the same state-change meter.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::meter::StateMeter;
use crate::prf::SeededPrf;
use crate::stream::StreamSketch;

/// Misra-Gries with at most `k` counters.
#[derive(Debug, Clone)]
pub struct MisraGries {
    k: usize,
    counters: BTreeMap<u64, u64>,
    processed: u64,
}

impl MisraGries {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("k", "need at least one counter"));
        }
        Ok(MisraGries {
            k,
            counters: BTreeMap::new(),
            processed: 0,
        })
    }

    /// `k = ceil(2 / eps)`.
    pub fn for_eps(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::param("eps", "must lie in (0, 1]"));
        }
        Self::new(libm::ceil(2.0 / eps) as usize)
    }

    pub fn counters(&self) -> usize {
        self.counters.len()
    }

    pub fn estimate(&self, item: u64) -> f64 {
        self.counters.get(&item).copied().unwrap_or(0) as f64
    }

    /// Items whose count is at least `eps * norm - m / (k + 1)`.
    pub fn report(&self, eps: f64, norm: f64) -> Vec<(u64, f64)> {
        let slack = self.processed as f64 / (self.k as f64 + 1.0);
        let threshold = (eps * norm - slack).max(1.0);
        self.counters
            .iter()
            .map(|(&i, &c)| (i, c as f64))
            .filter(|&(_, c)| c >= threshold)
            .collect()
    }
}

impl StreamSketch for MisraGries {
    fn process(&mut self, _t: u64, item: u64, meter: &mut StateMeter) {
        self.processed += 1;
        meter.mark_dirty();
        if let Some(c) = self.counters.get_mut(&item) {
            *c += 1;
        } else if self.counters.len() < self.k {
            self.counters.insert(item, 1);
        } else {
            self.counters.retain(|_, c| {
                *c -= 1;
                *c > 0
            });
        }
    }

    fn words(&self) -> usize {
        2 * self.counters.len() + 1
    }
}

/// SpaceSaving with `k` counters.
#[derive(Debug, Clone)]
pub struct SpaceSaving {
    k: usize,
    counts: BTreeMap<u64, u64>,
    order: BTreeSet<(u64, u64)>,
}

impl SpaceSaving {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("k", "need at least one counter"));
        }
        Ok(SpaceSaving {
            k,
            counts: BTreeMap::new(),
            order: BTreeSet::new(),
        })
    }

    pub fn estimate(&self, item: u64) -> f64 {
        self.counts.get(&item).copied().unwrap_or(0) as f64
    }

    pub fn report(&self, eps: f64, norm: f64) -> Vec<(u64, f64)> {
        let threshold = eps * norm;
        self.counts
            .iter()
            .map(|(&i, &c)| (i, c as f64))
            .filter(|&(_, c)| c >= threshold)
            .collect()
    }
}

impl StreamSketch for SpaceSaving {
    fn process(&mut self, _t: u64, item: u64, meter: &mut StateMeter) {
        meter.mark_dirty();
        let next = if let Some(&c) = self.counts.get(&item) {
            self.order.remove(&(c, item));
            c + 1
        } else if self.counts.len() < self.k {
            1
        } else {
            let (c, victim) = self.order.pop_first().expect("full summary is non-empty");
            self.counts.remove(&victim);
            c + 1
        };
        self.counts.insert(item, next);
        self.order.insert((next, item));
    }

    fn words(&self) -> usize {
        2 * self.counts.len()
    }
}

/// CountMin with `depth` rows of `width` counters and a candidate set of
/// the `candidates` items with the largest point estimates.
#[derive(Debug, Clone)]
pub struct CountMin {
    width: usize,
    depth: usize,
    table: Vec<u64>,
    prf: SeededPrf,
    max_candidates: usize,
    candidates: BTreeMap<u64, u64>,
}

impl CountMin {
    pub fn new(width: usize, depth: usize, candidates: usize, seed: u64) -> Result<Self> {
        if width == 0 || depth == 0 {
            return Err(Error::param("width", "table must be non-empty"));
        }
        Ok(CountMin {
            width,
            depth,
            table: alloc::vec![0; width * depth],
            prf: SeededPrf::new(seed, "count-min"),
            max_candidates: candidates,
            candidates: BTreeMap::new(),
        })
    }

    /// `width = ceil(e / eps)`, `depth = ceil(ln(1/delta))`.
    pub fn for_eps(eps: f64, delta: f64, candidates: usize, seed: u64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
            return Err(Error::param("eps", "eps and delta must lie in (0, 1)"));
        }
        let width = libm::ceil(core::f64::consts::E / eps) as usize;
        let depth = libm::ceil(libm::log(1.0 / delta)).max(1.0) as usize;
        Self::new(width, depth, candidates, seed)
    }

    fn cell(&self, row: usize, item: u64) -> usize {
        row * self.width + self.prf.child(row as u64).bits(item) as usize % self.width
    }

    /// Point query; never below the true count.
    pub fn estimate(&self, item: u64) -> f64 {
        (0..self.depth).map(|r| self.table[self.cell(r, item)]).min().unwrap_or(0) as f64
    }

    pub fn report(&self, eps: f64, norm: f64) -> Vec<(u64, f64)> {
        let threshold = eps * norm;
        self.candidates
            .keys()
            .map(|&i| (i, self.estimate(i)))
            .filter(|&(_, c)| c >= threshold)
            .collect()
    }
}

impl StreamSketch for CountMin {
    fn process(&mut self, _t: u64, item: u64, meter: &mut StateMeter) {
        meter.mark_dirty();
        for r in 0..self.depth {
            let c = self.cell(r, item);
            self.table[c] += 1;
        }
        if self.max_candidates == 0 {
            return;
        }
        let est = self.estimate(item) as u64;
        if self.candidates.contains_key(&item) || self.candidates.len() < self.max_candidates {
            self.candidates.insert(item, est);
            return;
        }
        let (&weakest, &low) = self
            .candidates
            .iter()
            .min_by_key(|&(&i, &c)| (c, i))
            .expect("candidate set is full");
        if est > low {
            self.candidates.remove(&weakest);
            self.candidates.insert(item, est);
        }
    }

    fn words(&self) -> usize {
        self.table.len() + 2 * self.candidates.len()
    }
}
