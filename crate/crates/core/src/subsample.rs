//! Nested subsampling of the universe and of time.
//!
//! Level `l` keeps an element with probability `min(1, 2^(1-l))`. All levels
//! threshold the same PRF value, so membership at level `l + 1` implies
//! membership at level `l`.

use crate::prf::SeededPrf;

/// Sampling rate of level `level >= 1`.
#[inline]
pub fn level_rate(level: u32) -> f64 {
    debug_assert!(level >= 1);
    libm::ldexp(1.0, 1 - level as i32)
}

/// Deepest level (capped at `max_level`) containing the key with PRF bits
/// `bits`. Level 1 always contains it.
#[inline]
pub fn deepest_level(bits: u64, max_level: u32) -> u32 {
    // u < 2^(1-l)  <=>  the top l-1 bits of the 53-bit mantissa are zero
    let u53 = bits >> 11;
    let lz = if u53 == 0 { 53 } else { u53.leading_zeros() - 11 };
    (lz + 1).min(max_level)
}

/// `true` iff `item` survives universe subsampling at `level`.
pub fn universe_member(prf: &SeededPrf, item: u64, level: u32) -> bool {
    assert!(level >= 1, "levels start at 1");
    prf.unit(item) < level_rate(level)
}

/// `true` iff time index `t` survives time subsampling at `level`.
pub fn time_member(prf: &SeededPrf, t: u64, level: u32) -> bool {
    assert!(level >= 1, "levels start at 1");
    prf.unit(t) < level_rate(level)
}
