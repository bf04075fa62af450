//! Stream events and the metered driver loop.

use alloc::vec::Vec;

use crate::meter::StateMeter;

/// One stream event: the 1-based time index and the universe id in `[n]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Update {
    pub t: u64,
    pub item: u64,
}

/// An insertion-only stream over the universe `[n]`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Stream {
    pub n: u64,
    pub items: Vec<u64>,
}

impl Stream {
    pub fn new(n: u64, items: Vec<u64>) -> Self {
        Stream { n, items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn updates(&self) -> impl Iterator<Item = Update> + '_ {
        self.items.iter().enumerate().map(|(i, &item)| Update {
            t: i as u64 + 1,
            item,
        })
    }
}

/// A sketch driven one update at a time under the state-change meter.
pub trait StreamSketch {
    /// Process update `t` (strictly increasing, 1-based).
    fn process(&mut self, t: u64, item: u64, meter: &mut StateMeter);

    /// Current memory footprint in words.
    fn words(&self) -> usize;
}

/// Feed `items` to `sketch` as updates `1..=m`, closing each update on the
/// meter.
pub fn run_metered<S: StreamSketch + ?Sized>(sketch: &mut S, items: &[u64], meter: &mut StateMeter) {
    for (i, &item) in items.iter().enumerate() {
        sketch.process(i as u64 + 1, item, meter);
        meter.end_update(sketch.words());
    }
}
