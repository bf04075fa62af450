//! Derived sketch constants.
//!
//! The paper-faithful preset evaluates the sample-and-hold constants with
//! their literal polylogarithmic factors (logarithms base 2) and
//! `gamma = 2^20 p`. Those values are far too large to run at desk scale,
//! so the practical preset keeps the shape of every formula in `n`, `m`
//! and `eps` while replacing `gamma` and each `log(nm)` factor by small
//! configurable constants.

use crate::error::{Error, Result};

/// Constants substituted for the polylogarithmic factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Practical {
    /// Replaces `gamma = 2^20 p`.
    pub gamma: f64,
    /// Replaces every `log(nm)` factor.
    pub log_factor: f64,
    /// Counter budget base; `kappa_2` scales it by `n^(1-2/p)`.
    pub kappa: f64,
    /// Replaces `200 log^2(nm)` in the reservoir size range.
    pub k_scale: f64,
    /// Morris accuracy is `eps / counter_eps_div`.
    pub counter_eps_div: f64,
    /// Failure probability of each Morris counter.
    pub counter_delta: f64,
    /// Independent repetitions `R` of the heavy-hitter grid.
    pub hh_rows: usize,
    /// Independent repetitions `R` of the moment estimator.
    pub fp_rows: usize,
}

impl Default for Practical {
    fn default() -> Self {
        Practical {
            gamma: 2.0,
            log_factor: 1.0,
            kappa: 4.0,
            k_scale: 8.0,
            counter_eps_div: 4.0,
            counter_delta: 0.2,
            hh_rows: 3,
            fp_rows: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    PaperFaithful,
    Practical(Practical),
}

impl Preset {
    pub fn practical() -> Self {
        Preset::Practical(Practical::default())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::PaperFaithful => "paper",
            Preset::Practical(_) => "practical",
        }
    }
}

/// All constants derived from `(n, m_bound, eps, delta, p, preset)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SketchParams {
    pub n: u64,
    pub m_bound: u64,
    pub eps: f64,
    pub delta: f64,
    pub p: f64,
    pub preset: Preset,
    pub gamma: f64,
    /// The `log(nm)` factor in use (literal for the paper preset).
    pub log_nm: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa: f64,
    /// Sampling probability before clamping to 1.
    pub rho_raw: f64,
    pub rho: f64,
    /// Reservoir size range `[lo, hi]` as real numbers.
    pub k_range: (f64, f64),
    /// Repetitions `R` of the heavy-hitter grid.
    pub hh_rows: usize,
    /// Time-subsampling levels `Y`.
    pub time_levels: u32,
    /// Level-set bands `L` of the moment estimator.
    pub fp_bands: u32,
    /// Repetitions `R` of the moment estimator.
    pub fp_rows: usize,
    /// Offset between a band index and the universe level it is read from.
    pub level_shift: u32,
    /// Multiplicative accuracy of each held Morris counter.
    pub counter_eps: f64,
    pub counter_delta: f64,
}

fn ceil_log2(x: f64) -> u32 {
    if x <= 1.0 {
        0
    } else {
        libm::ceil(libm::log2(x)) as u32
    }
}

/// Derive every sketch constant.
///
/// For `m >= n` the sampling probability is
/// `gamma^2 n^(1-1/p) log^4(nm) / (eps^2 m)`; for `m < n`, `m` takes the
/// place of `n`. The counter budget is `kappa_1` for `p < 2` and `kappa_2`
/// for `p >= 2`. A probability above 1 is clamped to 1 and flagged by
/// [`SketchParams::rho_clamped`].
pub fn derive_params(n: u64, m_bound: u64, eps: f64, delta: f64, p: f64, preset: Preset) -> Result<SketchParams> {
    if n < 2 {
        return Err(Error::param("n", "universe size must be at least 2"));
    }
    if m_bound < 1 {
        return Err(Error::param("m_bound", "stream length bound must be positive"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param("eps", "must lie in (0, 1)"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", "must lie in (0, 1)"));
    }
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::param("p", "moment order must be at least 1"));
    }
    let nf = n as f64;
    let mf = m_bound as f64;
    let base = if m_bound >= n { nf } else { mf };
    let literal_log = libm::log2(nf * mf);

    let (gamma, log_nm, kappa1, kappa2, k_mult, hh_rows, fp_rows, counter_eps, counter_delta, shift_log) =
        match preset {
            Preset::PaperFaithful => {
                let gamma = libm::ldexp(p, 20);
                let poly = libm::pow(literal_log, 11.0 + 3.0 * p) / libm::pow(eps, 4.0 + 4.0 * p);
                let kappa2 = libm::pow(base, 1.0 - 2.0 / p) * poly;
                let k_mult = 200.0 * p * literal_log * literal_log;
                let hh_rows = ceil_log2(nf).max(1) as usize;
                let fp_rows = ceil_log2(libm::log2(nf)).max(1) as usize;
                (
                    gamma,
                    literal_log,
                    poly,
                    kappa2,
                    k_mult,
                    hh_rows,
                    fp_rows,
                    eps / (8.0 * literal_log),
                    1.0 / (nf * mf),
                    literal_log,
                )
            }
            Preset::Practical(c) => {
                let kappa2 = c.kappa * libm::pow(base, 1.0 - 2.0 / p);
                (
                    c.gamma,
                    c.log_factor,
                    c.kappa,
                    kappa2,
                    c.k_scale * p,
                    c.hh_rows.max(1),
                    c.fp_rows.max(1),
                    eps / c.counter_eps_div,
                    c.counter_delta,
                    c.log_factor,
                )
            }
        };
    let rho_raw = gamma * gamma * libm::pow(base, 1.0 - 1.0 / p) * libm::pow(log_nm, 4.0) / (eps * eps * mf);
    let rho = rho_raw.min(1.0);
    let kappa = if p < 2.0 { kappa1 } else { kappa2 };
    let k_lo = k_mult * kappa;
    let k_hi = k_lo * 202.0 / 200.0;
    let shift = libm::floor(libm::log2(gamma * gamma * shift_log / (eps * eps))).max(0.0) as u32;

    Ok(SketchParams {
        n,
        m_bound,
        eps,
        delta,
        p,
        preset,
        gamma,
        log_nm,
        kappa1,
        kappa2,
        kappa,
        rho_raw,
        rho,
        k_range: (k_lo, k_hi),
        hh_rows,
        time_levels: ceil_log2(mf) + 1,
        fp_bands: libm::ceil(p * literal_log).max(1.0) as u32,
        fp_rows,
        level_shift: shift,
        counter_eps: counter_eps.min(0.99),
        counter_delta: counter_delta.min(0.99),
    })
}

impl SketchParams {
    /// `true` when the raw sampling probability exceeded 1.
    pub fn rho_clamped(&self) -> bool {
        self.rho_raw > 1.0
    }

    /// Integer reservoir size bounds, at least 1 and saturating at
    /// `usize::MAX`.
    pub fn k_bounds(&self) -> (usize, usize) {
        let to_usize = |x: f64| {
            if x >= usize::MAX as f64 {
                usize::MAX
            } else {
                (x as usize).max(1)
            }
        };
        let lo = to_usize(libm::ceil(self.k_range.0));
        let hi = to_usize(libm::floor(self.k_range.1)).max(lo);
        (lo, hi)
    }

    /// The same configuration re-derived for an induced stream with
    /// universe `n` and length bound `m_bound`.
    pub fn for_substream(&self, n: u64, m_bound: u64) -> SketchParams {
        let mut sub = derive_params(n.max(2), m_bound.max(1), self.eps, self.delta, self.p, self.preset)
            .expect("parameters were validated by the parent");
        // grid shapes stay those of the parent
        sub.hh_rows = self.hh_rows;
        sub.fp_rows = self.fp_rows;
        sub
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_inputs() {
        let pr = Preset::practical();
        assert!(derive_params(1, 10, 0.1, 0.1, 2.0, pr).is_err());
        assert!(derive_params(10, 0, 0.1, 0.1, 2.0, pr).is_err());
        assert!(derive_params(10, 10, 0.0, 0.1, 2.0, pr).is_err());
        assert!(derive_params(10, 10, 1.0, 0.1, 2.0, pr).is_err());
        assert!(derive_params(10, 10, 0.5, 0.1, 0.5, pr).is_err());
    }

    #[test]
    fn paper_rho_matches_line_three() {
        let n = 1u64 << 16;
        let m = 1u64 << 20;
        let eps = 0.25;
        let sp = derive_params(n, m, eps, 0.1, 2.0, Preset::PaperFaithful).unwrap();
        let gamma = 2f64.powi(21);
        let expect = gamma * gamma * 2f64.powi(8) * 36f64.powi(4) / (eps * eps * 2f64.powi(20));
        assert_eq!(sp.rho_raw, expect);
        assert_eq!(sp.rho, 1.0);
        assert!(sp.rho_clamped());
    }

    #[test]
    fn budget_branch_depends_on_p() {
        let a = derive_params(1 << 12, 1 << 12, 0.5, 0.1, 2.0, Preset::PaperFaithful).unwrap();
        assert_eq!(a.kappa, a.kappa2);
        let b = derive_params(1 << 12, 1 << 12, 0.5, 0.1, 1.5, Preset::PaperFaithful).unwrap();
        assert_eq!(b.kappa, b.kappa1);
    }

    #[test]
    fn practical_k_range_nonempty() {
        let sp = derive_params(1 << 16, 1 << 16, 0.5, 0.1, 2.0, Preset::practical()).unwrap();
        let (lo, hi) = sp.k_bounds();
        assert!(lo >= 1 && hi >= lo);
        assert!(sp.rho > 0.0 && sp.rho <= 1.0);
        assert!(sp.kappa >= 1.0);
    }
}
