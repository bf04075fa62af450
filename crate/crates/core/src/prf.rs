//! Keyed pseudo-random functions.
//!
//! Every random choice made by a sketch is a pure function of
//! `(seed, tag, input)`. A sketch never holds a mutable generator: fresh
//! randomness for update `t` is obtained from [`SeededPrf::draws`], which
//! keys a short-lived counter stream on `t`. Persistent memory therefore
//! only changes when the sketch's data changes, which is what the state
//! meter measures.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const UNIT_SCALE: f64 = 1.0 / (1u64 << 53) as f64;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a over the tag bytes, then mixed.
pub fn tag_hash(tag: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    mix64(h)
}

/// Map 64 random bits to `[0, 1)` with 53-bit precision.
#[inline]
pub fn to_unit(bits: u64) -> f64 {
    (bits >> 11) as f64 * UNIT_SCALE
}

/// Map 64 random bits to the open interval `(0, 1)`.
#[inline]
pub fn to_open_unit(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * UNIT_SCALE
}

/// A keyed mixing function `(seed, tag, input) -> u64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeededPrf {
    seed: u64,
    tag: u64,
    key: u64,
}

impl SeededPrf {
    pub fn new(seed: u64, tag: &str) -> Self {
        Self::from_parts(seed, tag_hash(tag))
    }

    fn from_parts(seed: u64, tag: u64) -> Self {
        let key = mix64(seed.wrapping_add(GOLDEN) ^ mix64(tag));
        SeededPrf { seed, tag, key }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Hash of the domain tag this function was built with.
    pub fn tag(&self) -> u64 {
        self.tag
    }

    /// An independent function for a sub-domain.
    pub fn derive(&self, tag: &str) -> Self {
        Self::from_parts(self.key, tag_hash(tag))
    }

    /// An independent function for the `index`-th replica of a sub-domain.
    pub fn child(&self, index: u64) -> Self {
        Self::from_parts(self.key, mix64(index ^ 0x5bd1_e995_0000_0000))
    }

    #[inline]
    pub fn bits(&self, input: u64) -> u64 {
        mix64(mix64(input ^ self.key).wrapping_add(self.key.rotate_left(29)))
    }

    #[inline]
    pub fn bits2(&self, a: u64, b: u64) -> u64 {
        self.bits(mix64(a.wrapping_mul(GOLDEN)) ^ b)
    }

    /// Uniform value in `[0, 1)` derived only from `input`.
    #[inline]
    pub fn unit(&self, input: u64) -> f64 {
        to_unit(self.bits(input))
    }

    #[inline]
    pub fn unit2(&self, a: u64, b: u64) -> f64 {
        to_unit(self.bits2(a, b))
    }

    /// Counter-mode randomness keyed on `nonce` (usually the update index).
    #[inline]
    pub fn draws(&self, nonce: u64) -> Draws {
        Draws {
            key: self.bits(nonce),
            counter: 0,
        }
    }
}

/// A transient stream of random values for one nonce.
///
/// Lives on the stack for the duration of one update; it is never part of a
/// sketch's persistent state.
#[derive(Debug, Clone)]
pub struct Draws {
    key: u64,
    counter: u64,
}

impl Draws {
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key ^ mix64(self.counter.wrapping_mul(GOLDEN)))
    }

    #[inline]
    pub fn unit(&mut self) -> f64 {
        to_unit(self.next_u64())
    }

    #[inline]
    pub fn open_unit(&mut self) -> f64 {
        to_open_unit(self.next_u64())
    }

    /// Uniform integer in `[0, bound)`; `bound` must be positive.
    #[inline]
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        ((u128::from(self.next_u64()) * u128::from(bound)) >> 64) as u64
    }

    /// Uniform integer in `[lo, hi]`.
    #[inline]
    pub fn range_inclusive(&mut self, lo: u64, hi: u64) -> u64 {
        debug_assert!(lo <= hi);
        lo + self.below(hi - lo + 1)
    }

    /// Standard exponential variate.
    pub fn exponential(&mut self) -> f64 {
        -libm::log(self.open_unit())
    }
}
