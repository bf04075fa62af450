//! Streaming sketches that change their memory state on only a small
//! fraction of stream updates.
//!
//! The crate is `no_std` (it needs `alloc`) and holds the algorithmic core:
//! the state-change cost model, seeded randomness, approximate counters,
//! the sample-and-hold heavy-hitter family, the subsampling `F_p`
//! estimator, p-stable sketches, entropy interpolation, exact oracles,
//! classical baselines and seeded stream generators. File formats, the
//! experiment runner and the command line live in the `fewstate-cli` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod entropy;
pub mod error;
pub mod fp;
pub mod full_sample_hold;
pub mod generators;
pub mod meter;
pub mod morris;
pub mod oracle;
pub mod params;
pub mod prf;
pub mod sample_hold;
pub mod stable;
pub mod stats;
pub mod stream;
pub mod subsample;

pub use error::Error;
pub use meter::StateMeter;
pub use params::{derive_params, Preset, Practical, SketchParams};
pub use prf::{Draws, SeededPrf};
pub use stream::{run_metered, Stream, StreamSketch, Update};
