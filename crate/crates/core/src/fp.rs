//! `F_p` estimation for `p >= 1` by universe subsampling and level sets.
//!
//! Row `r` subsamples the universe at nested levels `1..=U`; each
//! `(level, row)` pair runs a [`FullSampleAndHold`] on the items it keeps.
//! At query time the values `f^p` are split into geometric bands below a
//! randomized top `lambda * M~`, where `M~` is the smallest power of two at
//! least `m^p`. Band `i` is read from universe level
//! `max(1, i - shift)`, its mass is the lower median over rows of the
//! summed `f^p` of the items falling in the band, rescaled by the inverse
//! sampling rate, and the estimate is the sum over bands.

use alloc::vec::Vec;

use crate::error::Result;
use crate::full_sample_hold::{FullConfig, FullSampleAndHold};
use crate::meter::StateMeter;
use crate::params::SketchParams;
use crate::prf::SeededPrf;
use crate::stats::{compensated_sum, lower_median};
use crate::stream::StreamSketch;
use crate::subsample::deepest_level;

/// Smallest power of two that is at least `x` (and at least 1).
pub fn power_of_two_at_least(x: f64) -> f64 {
    if x <= 1.0 {
        return 1.0;
    }
    let mut e = libm::ceil(libm::log2(x)) as i32;
    if libm::ldexp(1.0, e - 1) >= x {
        e -= 1;
    }
    if libm::ldexp(1.0, e) < x {
        e += 1;
    }
    libm::ldexp(1.0, e)
}

/// Band index of the value `v = f^p`: band `i >= 1` is
/// `[top / 2^i, top / 2^(i-1))` with `top = lambda * m_tilde`; band 0 holds
/// `v >= top`. `None` for zero or values below band `bands`.
pub fn band_of(v: f64, top: f64, bands: u32) -> Option<u32> {
    if !(v > 0.0) {
        return None;
    }
    if v >= top {
        return Some(0);
    }
    let mut i = libm::ceil(libm::log2(top / v)).max(1.0) as u32;
    // repair rounding at the band edges
    while i > 1 && v >= libm::ldexp(top, -(i as i32 - 1)) {
        i -= 1;
    }
    while v < libm::ldexp(top, -(i as i32)) {
        i += 1;
    }
    (i <= bands).then_some(i)
}

#[derive(Debug, Clone)]
pub struct FpEstimator {
    p: f64,
    bands: u32,
    universe_levels: u32,
    rows: usize,
    shift: u32,
    lambda: f64,
    prf: SeededPrf,
    row_prfs: Vec<SeededPrf>,
    /// Per universe level `l` (index `l - 1`) the grid configuration.
    level_configs: Vec<FullConfig>,
    /// Instance `(l, r)` at index `(l - 1) * rows + r`.
    grids: Vec<Option<FullSampleAndHold>>,
    words: usize,
}

impl FpEstimator {
    pub fn from_params(params: &SketchParams, seed: u64) -> Result<Self> {
        Self::with_configs(params, seed, |c| c)
    }

    /// Build with every per-level grid configuration passed through `adjust`.
    pub fn with_configs(params: &SketchParams, seed: u64, adjust: impl Fn(FullConfig) -> FullConfig) -> Result<Self> {
        let prf = SeededPrf::new(seed, "fp");
        let bands = params.fp_bands.max(1);
        let universe_levels = bands.saturating_sub(params.level_shift).max(1);
        let rows = params.fp_rows.max(1);
        let mut level_configs = Vec::with_capacity(universe_levels as usize);
        for l in 1..=universe_levels {
            // bands can outnumber the 64 bits of an id when p log(nm) is large
            let n_l = params.n.checked_shr(l - 1).unwrap_or(0).max(2);
            let m_l = params.m_bound.checked_shr(l - 1).unwrap_or(0).max(1);
            let cfg = adjust(FullConfig::from_params(&params.for_substream(n_l, m_l))?);
            cfg.validate()?;
            level_configs.push(cfg);
        }
        let row_prfs = (0..rows).map(|r| prf.derive("universe").child(r as u64)).collect();
        Ok(FpEstimator {
            p: params.p,
            bands,
            universe_levels,
            rows,
            shift: params.level_shift,
            lambda: 0.5 + 0.5 * prf.derive("lambda").unit(0),
            prf,
            row_prfs,
            level_configs,
            grids: alloc::vec![None; universe_levels as usize * rows],
            words: 0,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn bands(&self) -> u32 {
        self.bands
    }

    pub fn universe_levels(&self) -> u32 {
        self.universe_levels
    }

    pub fn shift(&self) -> u32 {
        self.shift
    }

    /// Universe level that band `i` is read from.
    pub fn level_of_band(&self, i: u32) -> u32 {
        i.saturating_sub(self.shift).clamp(1, self.universe_levels)
    }

    /// Deepest universe level keeping `item` in row `r`.
    pub fn depth(&self, r: usize, item: u64) -> u32 {
        deepest_level(self.row_prfs[r].bits(item), self.universe_levels)
    }

    pub fn grid(&self, level: u32, r: usize) -> Option<&FullSampleAndHold> {
        self.grids[(level as usize - 1) * self.rows + r].as_ref()
    }

    /// Band top `lambda * M~` for stream length `m`.
    pub fn top(&self, m: u64) -> f64 {
        self.lambda * power_of_two_at_least(libm::pow(m as f64, self.p))
    }

    /// Per-band contribution estimates `C_0..=C_L` for stream length `m`.
    pub fn band_estimates(&self, m: u64) -> Vec<f64> {
        let top = self.top(m);
        let nb = self.bands as usize + 1;
        // sums[l-1][r][i]
        let mut sums = alloc::vec![alloc::vec![alloc::vec![Vec::<f64>::new(); nb]; self.rows]; self.universe_levels as usize];
        for l in 1..=self.universe_levels {
            for r in 0..self.rows {
                if let Some(g) = self.grid(l, r) {
                    for (_, f) in g.estimates() {
                        let v = libm::pow(f, self.p);
                        if let Some(i) = band_of(v, top, self.bands) {
                            if self.level_of_band(i) == l {
                                sums[l as usize - 1][r][i as usize].push(v);
                            }
                        }
                    }
                }
            }
        }
        (0..=self.bands)
            .map(|i| {
                let l = self.level_of_band(i);
                let mut per_row: Vec<f64> = (0..self.rows)
                    .map(|r| compensated_sum(sums[l as usize - 1][r][i as usize].iter().copied()))
                    .collect();
                libm::ldexp(lower_median(&mut per_row), l as i32 - 1)
            })
            .collect()
    }

    /// `F_p` estimate for a stream of length `m`.
    pub fn estimate(&self, m: u64) -> f64 {
        if m == 0 {
            return 0.0;
        }
        compensated_sum(self.band_estimates(m))
    }
}

impl StreamSketch for FpEstimator {
    fn process(&mut self, t: u64, item: u64, meter: &mut StateMeter) {
        for r in 0..self.rows {
            let depth = self.depth(r, item);
            for l in 1..=depth {
                let idx = (l as usize - 1) * self.rows + r;
                if self.grids[idx].is_none() {
                    let prf = self.prf.derive("grid").child(idx as u64);
                    let g = FullSampleAndHold::new(self.level_configs[l as usize - 1].clone(), prf)
                        .expect("validated configuration");
                    self.grids[idx] = Some(g);
                    meter.mark_dirty();
                }
                let g = self.grids[idx].as_mut().expect("created above");
                let before = g.words();
                g.process(t, item, meter);
                self.words = self.words + g.words() - before;
            }
        }
    }

    fn words(&self) -> usize {
        self.words
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powers_of_two() {
        assert_eq!(power_of_two_at_least(1.0), 1.0);
        assert_eq!(power_of_two_at_least(1024.0), 1024.0);
        assert_eq!(power_of_two_at_least(1025.0), 2048.0);
        assert_eq!(power_of_two_at_least(0.3), 1.0);
    }

    #[test]
    fn band_edges() {
        let top = 0.75 * 1024.0;
        assert_eq!(band_of(top / 2.0, top, 20), Some(1));
        assert_eq!(band_of(top, top, 20), Some(0));
        assert_eq!(band_of(top / 2.0 - 1e-9, top, 20), Some(2));
        assert_eq!(band_of(0.0, top, 20), None);
        assert_eq!(band_of(top / 8.0, top, 2), None);
    }

    #[test]
    fn band_matches_linear_scan() {
        let prf = SeededPrf::new(3, "band");
        let top = 0.6 * 65536.0;
        for j in 0..5000 {
            let v = libm::exp2(prf.unit(j) * 20.0 - 4.0);
            let scan = (0..=24u32).find(|&i| {
                if i == 0 {
                    v >= top
                } else {
                    v >= top / libm::exp2(f64::from(i)) && v < top / libm::exp2(f64::from(i - 1))
                }
            });
            assert_eq!(band_of(v, top, 24), scan, "v={v}");
        }
    }
}
