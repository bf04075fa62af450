//! Seeded stream constructions.
//!
//! Every generator is a pure function of its arguments: the same seed gives
//! the same stream on every platform.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::prf::{Draws, SeededPrf};
use crate::stream::Stream;

fn shuffle(items: &mut [u64], draws: &mut Draws) {
    for i in (1..items.len()).rev() {
        let j = draws.below(i as u64 + 1) as usize;
        items.swap(i, j);
    }
}

/// `round(n^(1/p))`.
pub fn root_round(n: u64, p: f64) -> u64 {
    libm::round(libm::pow(n as f64, 1.0 / p)) as u64
}

/// A uniformly random permutation of `[n]`.
pub fn permutation(n: u64, seed: u64) -> Stream {
    let mut items: Vec<u64> = (1..=n).collect();
    shuffle(&mut items, &mut SeededPrf::new(seed, "gen/permutation").draws(0));
    Stream::new(n, items)
}

/// `d` distinct items `1..=d`, each repeated `copies` times, shuffled.
pub fn uniform(d: u64, copies: u64, seed: u64) -> Stream {
    let mut items = Vec::with_capacity((d * copies) as usize);
    for _ in 0..copies {
        items.extend(1..=d);
    }
    shuffle(&mut items, &mut SeededPrf::new(seed, "gen/uniform").draws(0));
    Stream::new(d.max(1), items)
}

/// `m` i.i.d. draws from Zipf(`s`) over `[n]`; item `k` has weight `k^-s`.
pub fn zipf(n: u64, m: u64, s: f64, seed: u64) -> Result<Stream> {
    if n == 0 {
        return Err(Error::param("n", "universe must be non-empty"));
    }
    if !(s >= 0.0) {
        return Err(Error::param("s", "exponent must be non-negative"));
    }
    let mut cdf = Vec::with_capacity(n as usize);
    let mut acc = 0.0f64;
    for k in 1..=n {
        acc += libm::pow(k as f64, -s);
        cdf.push(acc);
    }
    let total = acc;
    let prf = SeededPrf::new(seed, "gen/zipf");
    let items = (0..m)
        .map(|t| {
            let target = prf.unit(t) * total;
            let idx = cdf.partition_point(|&c| c <= target);
            idx.min(n as usize - 1) as u64 + 1
        })
        .collect();
    Ok(Stream::new(n, items))
}

/// A stream of length `n` made of a contiguous block of `b` copies of one
/// item and `n - b` distinct singletons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Planted {
    pub stream: Stream,
    pub item: u64,
    pub frequency: u64,
    /// 0-based offset of the block inside the stream.
    pub block_start: usize,
}

fn planted_block(n: u64, b: u64, seed: u64, tag: &str) -> Planted {
    let mut draws = SeededPrf::new(seed, tag).draws(0);
    let item = draws.range_inclusive(1, n);
    let mut others: Vec<u64> = (1..=n).filter(|&x| x != item).collect();
    shuffle(&mut others, &mut draws);
    others.truncate((n - b) as usize);
    let block_start = draws.below(others.len() as u64 + 1) as usize;
    let mut items = Vec::with_capacity(n as usize);
    items.extend_from_slice(&others[..block_start]);
    items.extend(core::iter::repeat(item).take(b as usize));
    items.extend_from_slice(&others[block_start..]);
    Planted {
        stream: Stream::new(n, items),
        item,
        frequency: b,
        block_start,
    }
}

/// The two streams of the moment lower bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowerBoundPair {
    /// Block of `b` copies plus `n - b` singletons.
    pub s1: Planted,
    /// A permutation of `[n]`.
    pub s2: Stream,
    pub b: u64,
}

pub fn lowerbound_pair(n: u64, p: f64, seed: u64) -> Result<LowerBoundPair> {
    if n < 4 {
        return Err(Error::param("n", "must be at least 4"));
    }
    if !(p >= 1.0) {
        return Err(Error::param("p", "must be at least 1"));
    }
    let b = root_round(n, p).min(n);
    if b < 2 {
        return Err(Error::param("p", "n^(1/p) rounds below 2"));
    }
    Ok(LowerBoundPair {
        s1: planted_block(n, b, seed, "gen/s1"),
        s2: permutation(n, mix_seed(seed)),
        b,
    })
}

fn mix_seed(seed: u64) -> u64 {
    crate::prf::mix64(seed ^ 0x2545_f491_4f6c_dd1d)
}

/// One item of frequency `ceil(eps n^(1/p))` in a stream of `n`
/// otherwise distinct updates.
pub fn planted_hh(n: u64, p: f64, eps: f64, seed: u64) -> Result<Planted> {
    if n < 2 {
        return Err(Error::param("n", "must be at least 2"));
    }
    if !(p >= 1.0) {
        return Err(Error::param("p", "must be at least 1"));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::param("eps", "must lie in (0, 1]"));
    }
    let f = libm::ceil(eps * libm::pow(n as f64, 1.0 / p) - 1e-9).max(1.0) as u64;
    Ok(planted_block(n, f.min(n), seed, "gen/planted"))
}

/// Layout of the pseudo-heavy stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoHeavy {
    pub stream: Stream,
    /// The single heavy item (frequency `sqrt(n)`).
    pub heavy: u64,
    /// Pseudo-heavy ids `first..=last`, each of frequency `n^(1/4)`.
    pub pseudo: (u64, u64),
    /// 0-based indices of the special blocks.
    pub special_blocks: Vec<usize>,
}

fn exact_root(n: u64, k: u32) -> Option<u64> {
    let r = libm::round(libm::pow(n as f64, 1.0 / f64::from(k))) as u64;
    (r.checked_pow(k) == Some(n)).then_some(r)
}

/// `sqrt(n)` blocks of `sqrt(n)` updates. Special blocks, spaced
/// `n^(1/4)` blocks apart, hold `n^(1/4)` pseudo-heavy items repeated
/// `n^(1/4)` times. Each of the `n^(1/8)` blocks after a special block
/// holds `n^(1/8)` copies of the heavy item padded with fresh singletons.
/// Every other block is fresh singletons. Order inside a block is shuffled.
pub fn pseudoheavy(n: u64, seed: u64) -> Result<PseudoHeavy> {
    let r8 = exact_root(n, 8).filter(|&r| r >= 2).ok_or_else(|| Error::param("n", "must be a perfect 8th power of at least 2"))?;
    let r4 = r8 * r8;
    let r2 = r4 * r4;
    let heavy = 1u64;
    let pseudo_first = 2u64;
    let mut next_pseudo = pseudo_first;
    let mut next_fresh = pseudo_first + r4 * r4;
    let mut draws = SeededPrf::new(seed, "gen/pseudoheavy").draws(0);
    let mut items = Vec::with_capacity(n as usize);
    let mut special_blocks = Vec::new();
    let mut block = Vec::with_capacity(r2 as usize);
    let mut heavy_blocks_left = 0u64;
    for j in 0..r2 {
        block.clear();
        if j % r4 == 0 {
            special_blocks.push(j as usize);
            for _ in 0..r4 {
                let id = next_pseudo;
                next_pseudo += 1;
                block.extend(core::iter::repeat(id).take(r4 as usize));
            }
            heavy_blocks_left = r8;
        } else if heavy_blocks_left > 0 {
            heavy_blocks_left -= 1;
            block.extend(core::iter::repeat(heavy).take(r8 as usize));
            for _ in r8..r2 {
                block.push(next_fresh);
                next_fresh += 1;
            }
        } else {
            for _ in 0..r2 {
                block.push(next_fresh);
                next_fresh += 1;
            }
        }
        shuffle(&mut block, &mut draws);
        items.extend_from_slice(&block);
    }
    debug_assert!(next_fresh - 1 <= n);
    Ok(PseudoHeavy {
        stream: Stream::new(n, items),
        heavy,
        pseudo: (pseudo_first, next_pseudo - 1),
        special_blocks,
    })
}
