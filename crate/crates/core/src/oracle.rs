//! Exact ground truth computed from the full frequency vector.

use alloc::vec::Vec;

use crate::stats::compensated_sum;

/// Exact item counts of a stream, sorted by item id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FrequencyOracle {
    counts: Vec<(u64, u64)>,
    m: u64,
}

/// Per-band exact contributions `C_i` of the level sets.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelContributions {
    /// `bands[i]` is the mass of items whose `f^p` falls in band `i`.
    /// Band 0 collects values at or above `lambda * m_tilde`.
    pub bands: Vec<f64>,
    /// Mass of items below the last band.
    pub remainder: f64,
    pub total: f64,
}

impl LevelContributions {
    /// `phi_i = C_i / F_p`.
    pub fn fractions(&self) -> Vec<f64> {
        self.bands.iter().map(|c| if self.total > 0.0 { c / self.total } else { 0.0 }).collect()
    }

    /// Bands whose fractional contribution is at least `threshold`.
    pub fn significant(&self, threshold: f64) -> Vec<usize> {
        self.fractions()
            .iter()
            .enumerate()
            .filter(|(_, &phi)| phi >= threshold)
            .map(|(i, _)| i)
            .collect()
    }

    /// Sum of `C_i` over the bands selected by [`Self::significant`].
    pub fn significant_mass(&self, threshold: f64) -> f64 {
        compensated_sum(self.significant(threshold).into_iter().map(|i| self.bands[i]))
    }
}

impl FrequencyOracle {
    pub fn from_items(items: &[u64]) -> Self {
        let mut sorted = items.to_vec();
        sorted.sort_unstable();
        let mut counts: Vec<(u64, u64)> = Vec::new();
        for x in sorted {
            match counts.last_mut() {
                Some((item, c)) if *item == x => *c += 1,
                _ => counts.push((x, 1)),
            }
        }
        FrequencyOracle {
            counts,
            m: items.len() as u64,
        }
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    /// `(item, count)` pairs in increasing item order.
    pub fn counts(&self) -> &[(u64, u64)] {
        &self.counts
    }

    pub fn frequency(&self, item: u64) -> u64 {
        match self.counts.binary_search_by_key(&item, |&(i, _)| i) {
            Ok(k) => self.counts[k].1,
            Err(_) => 0,
        }
    }

    /// Item with the largest count (smallest id on ties).
    pub fn top(&self) -> Option<(u64, u64)> {
        self.counts.iter().copied().fold(None, |best, (i, c)| match best {
            Some((_, bc)) if bc >= c => best,
            _ => Some((i, c)),
        })
    }

    /// `F_p = sum f_i^p`. Integer `p` up to 4 is summed exactly in 128-bit
    /// arithmetic.
    pub fn exact_fp(&self, p: f64) -> f64 {
        if p == 1.0 {
            return self.m as f64;
        }
        if libm::trunc(p) == p && (2.0..=4.0).contains(&p) {
            let k = p as u32;
            let mut acc: u128 = 0;
            let mut exact = true;
            for &(_, c) in &self.counts {
                match u128::from(c).checked_pow(k).and_then(|v| acc.checked_add(v)) {
                    Some(next) => acc = next,
                    None => {
                        exact = false;
                        break;
                    }
                }
            }
            if exact {
                return acc as f64;
            }
        }
        compensated_sum(self.counts.iter().map(|&(_, c)| libm::pow(c as f64, p)))
    }

    /// `||f||_p`.
    pub fn norm(&self, p: f64) -> f64 {
        libm::pow(self.exact_fp(p), 1.0 / p)
    }

    /// Items with `f_j >= eps ||f||_p`, in increasing id order.
    pub fn exact_heavy_hitters(&self, p: f64, eps: f64) -> Vec<u64> {
        let threshold = eps * self.norm(p);
        self.counts
            .iter()
            .filter(|&&(_, c)| c as f64 >= threshold * (1.0 - 1e-12))
            .map(|&(i, _)| i)
            .collect()
    }

    /// Shannon entropy (bits) of the empirical distribution `f_i / m`.
    pub fn exact_entropy(&self) -> f64 {
        if self.m == 0 {
            return 0.0;
        }
        let m = self.m as f64;
        let h = compensated_sum(self.counts.iter().map(|&(_, c)| {
            let x = c as f64 / m;
            -x * libm::log2(x)
        }));
        h.max(0.0)
    }

    /// Exact level-set contributions for scale `lambda * m_tilde` and bands
    /// `0..=bands`. Band `i >= 1` holds values in
    /// `[lambda m_tilde / 2^i, lambda m_tilde / 2^(i-1))`.
    pub fn exact_level_contributions(&self, p: f64, lambda: f64, m_tilde: f64, bands: u32) -> LevelContributions {
        let top = lambda * m_tilde;
        let mut per_band: Vec<Vec<f64>> = alloc::vec![Vec::new(); bands as usize + 1];
        let mut rest = Vec::new();
        for &(_, c) in &self.counts {
            let v = libm::pow(c as f64, p);
            let mut upper = top;
            let mut band = 0u32;
            while band <= bands && v < upper {
                band += 1;
                upper /= 2.0;
            }
            // v >= upper now holds with upper = top / 2^band
            if band <= bands {
                per_band[band as usize].push(v);
            } else {
                rest.push(v);
            }
        }
        LevelContributions {
            bands: per_band.into_iter().map(compensated_sum).collect(),
            remainder: compensated_sum(rest),
            total: self.exact_fp(p),
        }
    }
}
