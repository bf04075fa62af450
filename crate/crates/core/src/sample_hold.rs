//! Sample-and-hold with age-bucketed counter maintenance.
//!
//! A reservoir of `k` slots samples stream positions with probability `rho`.
//! When an item that occupies a slot arrives again and is not yet tracked,
//! the sketch starts holding a counter for it. Held counters are grouped by
//! dyadic age: a counter born at time `s` belongs at time `t` to class `z`
//! when `t - s` lies in `[2^z, 2^(z+1))`. As soon as some class holds `k`
//! counters, `k` is redrawn, the reservoir is resized, and every class keeps
//! only its `ceil(k/2)` counters with the largest estimates.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::meter::StateMeter;
use crate::morris::{MorrisConfig, MorrisCounter};
use crate::params::SketchParams;
use crate::prf::{Draws, SeededPrf};
use crate::stream::StreamSketch;

/// How held counters count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CounterMode {
    Morris(MorrisConfig),
    /// Exact integer counts; used to check the underestimate property.
    Exact,
}

/// Which counters compete when the budget is exceeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Maintenance {
    /// Counters compete only inside their dyadic age class.
    #[default]
    AgeBucketed,
    /// Ablation: all counters compete together once `k` are held.
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoldConfig {
    pub rho: f64,
    pub k_lo: usize,
    pub k_hi: usize,
    pub counter: CounterMode,
    pub maintenance: Maintenance,
}

impl HoldConfig {
    pub fn from_params(params: &SketchParams) -> Result<Self> {
        let (k_lo, k_hi) = params.k_bounds();
        Ok(HoldConfig {
            rho: params.rho,
            k_lo: k_lo.max(2),
            k_hi: k_hi.max(2),
            counter: CounterMode::Morris(MorrisConfig::new(params.counter_eps, params.counter_delta)?),
            maintenance: Maintenance::AgeBucketed,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::param("rho", "sampling probability must lie in (0, 1]"));
        }
        if self.k_lo < 2 || self.k_hi < self.k_lo {
            return Err(Error::param("k", "reservoir range must satisfy 2 <= lo <= hi"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum HeldCount {
    Morris(MorrisCounter),
    Exact(u64),
}

impl HeldCount {
    fn estimate(&self) -> f64 {
        match self {
            HeldCount::Morris(c) => c.estimate(),
            HeldCount::Exact(v) => *v as f64,
        }
    }

    fn words(&self) -> usize {
        match self {
            HeldCount::Morris(c) => c.words(),
            HeldCount::Exact(_) => 1,
        }
    }

    fn increment(&mut self, draws: &mut Draws) -> bool {
        match self {
            HeldCount::Morris(c) => c.increment(draws),
            HeldCount::Exact(v) => {
                *v += 1;
                true
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Tracked {
    init_time: u64,
    count: HeldCount,
}

/// Single sample-and-hold instance.
#[derive(Debug, Clone)]
pub struct SampleAndHold {
    config: HoldConfig,
    prf: SeededPrf,
    k: usize,
    /// Occupied reservoir slots; absent positions are empty.
    slots: BTreeMap<usize, u64>,
    /// Number of slots holding each item.
    in_reservoir: BTreeMap<u64, u32>,
    tracked: BTreeMap<u64, Tracked>,
    /// `(init_time, item)` of tracked counters in increasing time order.
    births: Vec<(u64, u64)>,
    words: usize,
    prunes: u64,
}

impl SampleAndHold {
    pub fn new(config: HoldConfig, prf: SeededPrf) -> Result<Self> {
        config.validate()?;
        let k = draw_k(&config, &mut prf.derive("k").draws(0));
        Ok(SampleAndHold {
            config,
            prf,
            k,
            slots: BTreeMap::new(),
            in_reservoir: BTreeMap::new(),
            tracked: BTreeMap::new(),
            births: Vec::new(),
            words: 1,
            prunes: 0,
        })
    }

    pub fn from_params(params: &SketchParams, seed: u64) -> Result<Self> {
        Self::new(HoldConfig::from_params(params)?, SeededPrf::new(seed, "sample-hold"))
    }

    pub fn config(&self) -> &HoldConfig {
        &self.config
    }

    /// Current reservoir size.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn occupied_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn in_reservoir(&self, item: u64) -> bool {
        self.in_reservoir.contains_key(&item)
    }

    pub fn is_tracked(&self, item: u64) -> bool {
        self.tracked.contains_key(&item)
    }

    pub fn tracked_len(&self) -> usize {
        self.tracked.len()
    }

    /// Number of maintenance events so far.
    pub fn prunes(&self) -> u64 {
        self.prunes
    }

    pub fn init_time(&self, item: u64) -> Option<u64> {
        self.tracked.get(&item).map(|tr| tr.init_time)
    }

    pub fn estimate(&self, item: u64) -> Option<f64> {
        self.tracked.get(&item).map(|tr| tr.count.estimate())
    }

    /// Estimates of all tracked items in increasing id order.
    pub fn report(&self) -> Vec<(u64, f64)> {
        self.tracked.iter().map(|(&i, tr)| (i, tr.count.estimate())).collect()
    }

    pub fn tracked_items(&self) -> impl Iterator<Item = u64> + '_ {
        self.tracked.keys().copied()
    }

    /// Number of tracked counters in age class `z >= 1` at time `t`.
    pub fn class_size(&self, t: u64, z: u32) -> usize {
        let (lo, hi) = class_window(t, z);
        let a = self.births.partition_point(|&(s, _)| s < lo);
        let b = self.births.partition_point(|&(s, _)| s <= hi);
        b.saturating_sub(a)
    }

    fn new_count(&self) -> HeldCount {
        match self.config.counter {
            CounterMode::Morris(cfg) => HeldCount::Morris(MorrisCounter::new(cfg)),
            CounterMode::Exact => HeldCount::Exact(0),
        }
    }

    fn recompute_words(&mut self) {
        self.words = 1 + self.slots.len() + self.tracked.values().map(|tr| 2 + tr.count.words()).sum::<usize>();
    }

    fn put_slot(&mut self, pos: usize, item: u64) {
        if let Some(old) = self.slots.insert(pos, item) {
            self.remove_index(old);
        } else {
            self.words += 1;
        }
        *self.in_reservoir.entry(item).or_insert(0) += 1;
    }

    fn remove_index(&mut self, item: u64) {
        if let Some(c) = self.in_reservoir.get_mut(&item) {
            *c -= 1;
            if *c == 0 {
                self.in_reservoir.remove(&item);
            }
        }
    }

    fn start_tracking(&mut self, t: u64, item: u64, draws: &mut Draws) {
        let mut count = self.new_count();
        // the current occurrence is the first one counted
        count.increment(draws);
        self.words += 2 + count.words();
        self.tracked.insert(item, Tracked { init_time: t, count });
        self.births.push((t, item));
    }

    fn over_budget(&self, t: u64) -> bool {
        if self.tracked.len() < self.k {
            return false;
        }
        match self.config.maintenance {
            Maintenance::Global => true,
            Maintenance::AgeBucketed => {
                let zmax = 63 - t.leading_zeros();
                (1..=zmax).any(|z| self.class_size(t, z) >= self.k)
            }
        }
    }

    fn maintain(&mut self, t: u64, meter: &mut StateMeter) {
        if !self.over_budget(t) {
            return;
        }
        self.prunes += 1;
        meter.mark_dirty();
        let mut draws = self.prf.derive("k").draws(t);
        let new_k = draw_k(&self.config, &mut draws);
        self.resize(new_k, &mut draws);
        let keep = self.k.div_ceil(2);

        let mut groups: BTreeMap<u32, Vec<(f64, u64, u64)>> = BTreeMap::new();
        for (&item, tr) in &self.tracked {
            let age = t - tr.init_time;
            let group = match self.config.maintenance {
                Maintenance::Global => 0,
                Maintenance::AgeBucketed if age < 2 => continue,
                Maintenance::AgeBucketed => 63 - age.leading_zeros(),
            };
            groups.entry(group).or_default().push((tr.count.estimate(), tr.init_time, item));
        }
        for (_, mut members) in groups {
            if members.len() <= keep {
                continue;
            }
            members.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
            for &(_, _, item) in &members[keep..] {
                self.tracked.remove(&item);
            }
        }
        self.births.retain(|(_, item)| self.tracked.contains_key(item));
        self.recompute_words();
    }

    /// Keep a uniformly random `new_k`-subset of positions when shrinking;
    /// append empty positions when growing.
    fn resize(&mut self, new_k: usize, draws: &mut Draws) {
        if new_k < self.k {
            let mut remap = Vec::with_capacity(new_k);
            let mut need = new_k;
            for pos in 0..self.k {
                let left = (self.k - pos) as u64;
                if (draws.below(left) as usize) < need {
                    remap.push(pos);
                    need -= 1;
                }
            }
            let old = core::mem::take(&mut self.slots);
            self.in_reservoir.clear();
            for (new_pos, &old_pos) in remap.iter().enumerate() {
                if let Some(&item) = old.get(&old_pos) {
                    self.slots.insert(new_pos, item);
                    *self.in_reservoir.entry(item).or_insert(0) += 1;
                }
            }
        }
        self.k = new_k;
    }
}

fn class_window(t: u64, z: u32) -> (u64, u64) {
    // init_time in (t - 2^(z+1), t - 2^z]
    let hi = t.saturating_sub(1u64 << z);
    let lo = t.saturating_sub(1u64.checked_shl(z + 1).map_or(u64::MAX, |w| w - 1));
    (lo, hi)
}

fn draw_k(config: &HoldConfig, draws: &mut Draws) -> usize {
    draws.range_inclusive(config.k_lo as u64, config.k_hi as u64) as usize
}

impl StreamSketch for SampleAndHold {
    fn process(&mut self, t: u64, item: u64, meter: &mut StateMeter) {
        let mut draws = self.prf.draws(t);
        if let Some(tr) = self.tracked.get_mut(&item) {
            if tr.count.increment(&mut draws) {
                meter.mark_dirty();
            }
        } else if self.in_reservoir.contains_key(&item) {
            self.start_tracking(t, item, &mut draws);
            meter.mark_dirty();
        } else if self.config.rho >= 1.0 || draws.unit() < self.config.rho {
            let pos = draws.below(self.k as u64) as usize;
            self.put_slot(pos, item);
            meter.mark_dirty();
        }
        self.maintain(t, meter);
    }

    fn words(&self) -> usize {
        self.words
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::run_metered;

    fn exact_config(rho: f64, k: usize) -> HoldConfig {
        HoldConfig {
            rho,
            k_lo: k,
            k_hi: k,
            counter: CounterMode::Exact,
            maintenance: Maintenance::AgeBucketed,
        }
    }

    #[test]
    fn held_from_second_occurrence() {
        let mut sh = SampleAndHold::new(exact_config(1.0, 8), SeededPrf::new(1, "t")).unwrap();
        let mut meter = StateMeter::new();
        run_metered(&mut sh, &[7; 1000], &mut meter);
        assert_eq!(sh.report(), alloc::vec![(7, 999.0)]);
        assert_eq!(meter.total_state_changes(), 1000);
    }

    #[test]
    fn forced_sample_lands_in_reservoir() {
        let mut sh = SampleAndHold::new(exact_config(1.0, 4), SeededPrf::new(2, "t")).unwrap();
        let mut meter = StateMeter::new();
        sh.process(1, 42, &mut meter);
        assert!(sh.in_reservoir(42));
        assert!(!sh.is_tracked(42));
        assert!(meter.is_dirty());
    }

    #[test]
    fn nothing_tracked_reports_empty() {
        let sh = SampleAndHold::new(exact_config(0.5, 4), SeededPrf::new(3, "t")).unwrap();
        assert!(sh.report().is_empty());
    }

    #[test]
    fn class_window_matches_definition() {
        let (lo, hi) = class_window(100, 3);
        // ages 8..=15
        assert_eq!((100 - hi, 100 - lo), (8, 15));
    }

    #[test]
    fn pruning_keeps_largest_in_class() {
        let mut sh = SampleAndHold::new(exact_config(1.0, 4), SeededPrf::new(4, "t")).unwrap();
        for (item, c) in [(1u64, 5u64), (2, 9), (3, 2), (4, 7)] {
            sh.tracked.insert(item, Tracked { init_time: 10 + item, count: HeldCount::Exact(c) });
            sh.births.push((10 + item, item));
        }
        // ages 3..=6 at t = 17 fall in classes 1 and 2
        let mut meter = StateMeter::new();
        sh.maintain(17, &mut meter);
        assert_eq!(sh.prunes(), 0);
        // ages 4..=7 at t = 18 all fall in class 2
        sh.maintain(18, &mut meter);
        assert_eq!(sh.prunes(), 1);
        assert!(meter.is_dirty());
        let kept: Vec<u64> = sh.tracked_items().collect();
        assert_eq!(kept, alloc::vec![2, 4]);
    }

    #[test]
    fn classes_stay_under_budget() {
        let mut sh = SampleAndHold::new(exact_config(1.0, 4), SeededPrf::new(5, "t")).unwrap();
        let mut meter = StateMeter::new();
        let mut t = 0;
        for _ in 0..50 {
            for item in 1..=20u64 {
                t += 1;
                sh.process(t, item, &mut meter);
                meter.end_update(sh.words());
                for z in 1..=(63 - t.leading_zeros()) {
                    assert!(sh.class_size(t, z) < sh.k());
                }
                assert!(sh.occupied_slots() <= sh.k());
            }
        }
        assert!(sh.prunes() > 0);
    }
}
