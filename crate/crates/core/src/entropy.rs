//! Shannon entropy from moments at orders close to 1.
//!
//! With `k = ceil(log2(1/eps) + log2 log2 m)` the nodes are
//! `z_i = cos(i pi / k)` for `i = 0..=k` and the orders are
//! `p_i = 1 + g(z_i)` with `g(z) = l (k^2 (z - 1) + 1) / (2k^2 + 1)` and
//! `l = 1 / (2 (k+1) log2 m)`. For each node the Renyi entropy
//! `R_i = log2(F_{p_i} / F_1^{p_i}) / (1 - p_i)` is formed, the degree-`k`
//! polynomial through `(z_i, R_i)` is evaluated at `z* = 1 - 1/k^2`, where
//! `g` vanishes, and the result is the entropy estimate in bits.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::meter::StateMeter;
use crate::prf::SeededPrf;
use crate::stable::{stable_variate, Estimator, Halves, StableConfig, StableFp};
use crate::stream::StreamSketch;

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyNodes {
    pub k: u32,
    pub ell: f64,
    pub z: Vec<f64>,
    pub p: Vec<f64>,
    pub z_star: f64,
    /// Per-node accuracy `eps / (12 (k+1)^3 log2 m)`.
    pub eps_prime: f64,
}

impl EntropyNodes {
    /// Node map `g`.
    pub fn g(&self, z: f64) -> f64 {
        let k2 = f64::from(self.k * self.k);
        self.ell * (k2 * (z - 1.0) + 1.0) / (2.0 * k2 + 1.0)
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }
}

pub fn build_nodes(eps: f64, m: u64) -> Result<EntropyNodes> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param("eps", "must lie in (0, 1)"));
    }
    if m < 4 {
        return Err(Error::param("m", "stream length must be at least 4"));
    }
    let log_m = libm::log2(m as f64);
    let k = libm::ceil(libm::log2(1.0 / eps) + libm::log2(log_m)).max(1.0) as u32;
    let ell = 1.0 / (2.0 * f64::from(k + 1) * log_m);
    let mut nodes = EntropyNodes {
        k,
        ell,
        z: Vec::with_capacity(k as usize + 1),
        p: Vec::with_capacity(k as usize + 1),
        z_star: 1.0 - 1.0 / f64::from(k * k),
        eps_prime: eps / (12.0 * libm::pow(f64::from(k + 1), 3.0) * log_m),
    };
    for i in 0..=k {
        let z = libm::cos(f64::from(i) * core::f64::consts::PI / f64::from(k));
        let p = 1.0 + nodes.g(z);
        if !(p > 0.0 && p < 2.0) || p == 1.0 {
            return Err(Error::param("nodes", "an order fell outside (0, 2) or on 1"));
        }
        nodes.z.push(z);
        nodes.p.push(p);
    }
    Ok(nodes)
}

/// Barycentric interpolation through Chebyshev-Lobatto points `z`.
pub fn interpolate(z: &[f64], values: &[f64], at: f64) -> f64 {
    let last = z.len() - 1;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, (&zi, &vi)) in z.iter().zip(values).enumerate() {
        let d = at - zi;
        if d == 0.0 {
            return vi;
        }
        let mut w = if i % 2 == 0 { 1.0 } else { -1.0 };
        if i == 0 || i == last {
            w *= 0.5;
        }
        num += w * vi / d;
        den += w / d;
    }
    num / den
}

/// Entropy (bits) from moment estimates `moments[i]` of order `p_i` and
/// the first moment `norm1`.
pub fn entropy_from_moments(nodes: &EntropyNodes, moments: &[f64], norm1: f64) -> Result<f64> {
    if !(norm1 > 0.0) {
        return Err(Error::NonPositiveMoment { node: usize::MAX, value: norm1 });
    }
    let mut renyi = Vec::with_capacity(nodes.len());
    for (i, (&f, &p)) in moments.iter().zip(&nodes.p).enumerate() {
        if !(f > 0.0) {
            return Err(Error::NonPositiveMoment { node: i, value: f });
        }
        let y = libm::log2(f) - p * libm::log2(norm1);
        renyi.push(y / (1.0 - p));
    }
    Ok(interpolate(&nodes.z, &renyi, nodes.z_star))
}

/// `2^H`, the multiplicative form of an entropy value.
pub fn entropy_to_multiplicative(h: f64) -> f64 {
    libm::exp2(h)
}

/// Which first moment normalizes the node moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// `F_1` estimated by a p = 1 sketch sharing the node sketches'
    /// randomness.
    #[default]
    Sketched,
    /// The exact stream length.
    StreamLength,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyConfig {
    pub eps: f64,
    /// Stream length bound used to place the nodes.
    pub m_bound: u64,
    pub rows: usize,
    pub halves: Halves,
    pub estimator: Estimator,
    pub normalization: Normalization,
}

impl EntropyConfig {
    /// Defaults that hold up at desk scale: `rows` rows per node, exact
    /// halves, the trimmed estimator and a sketched first moment.
    pub fn new(eps: f64, m_bound: u64, rows: usize) -> Self {
        EntropyConfig {
            eps,
            m_bound,
            rows,
            halves: Halves::Exact,
            estimator: Estimator::TrimmedLogMean,
            normalization: Normalization::Sketched,
        }
    }
}

/// One stable sketch per node plus a `p = 1` sketch, all sharing angles,
/// exponentials and rounding uniforms.
#[derive(Debug, Clone)]
pub struct EntropySketch {
    config: EntropyConfig,
    nodes: EntropyNodes,
    sketches: Vec<StableFp>,
    unit: StableFp,
}

impl EntropySketch {
    pub fn new(config: EntropyConfig, seed: u64) -> Result<Self> {
        let nodes = build_nodes(config.eps, config.m_bound)?;
        let prf = SeededPrf::new(seed, "entropy");
        let make = |p: f64| {
            StableFp::with_prf(
                StableConfig {
                    p,
                    rows: config.rows,
                    halves: config.halves,
                    estimator: config.estimator,
                    shared_rounding: true,
                },
                prf,
            )
        };
        let sketches = nodes.p.iter().map(|&p| make(p)).collect::<Result<Vec<_>>>()?;
        let unit = make(1.0)?;
        Ok(EntropySketch {
            config,
            nodes,
            sketches,
            unit,
        })
    }

    pub fn nodes(&self) -> &EntropyNodes {
        &self.nodes
    }

    /// Moment estimate at every node.
    pub fn moments(&self) -> Vec<f64> {
        self.sketches.iter().map(StableFp::estimate).collect()
    }

    /// Entropy estimate in bits for a stream of length `m`.
    pub fn estimate(&self, m: u64) -> Result<f64> {
        let norm1 = match self.config.normalization {
            Normalization::Sketched => self.unit.estimate(),
            Normalization::StreamLength => m as f64,
        };
        entropy_from_moments(&self.nodes, &self.moments(), norm1)
    }
}

impl StreamSketch for EntropySketch {
    fn process(&mut self, t: u64, item: u64, meter: &mut StateMeter) {
        // every sketch shares angles, exponentials and the rounding uniform,
        // so they are drawn once per update
        let u = self.unit.shared_uniform(t);
        let sketched = self.config.normalization == Normalization::Sketched;
        let mut changed = false;
        for row in 0..self.config.rows {
            let (theta, w) = self.unit.angles(row, item);
            for (s, &p) in self.sketches.iter_mut().zip(&self.nodes.p) {
                changed |= s.add_entry(row, stable_variate(p, theta, w), u);
            }
            if sketched {
                changed |= self.unit.add_entry(row, stable_variate(1.0, theta, w), u);
            }
        }
        if changed {
            meter.mark_dirty();
        }
    }

    fn words(&self) -> usize {
        let unit = if self.config.normalization == Normalization::Sketched {
            self.unit.words()
        } else {
            0
        };
        self.sketches.iter().map(StableFp::words).sum::<usize>() + unit
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_formulas() {
        let nodes = build_nodes(0.1, 1 << 20).unwrap();
        assert_eq!(nodes.k, 8);
        assert!((nodes.ell - 1.0 / 360.0).abs() < 1e-15);
        assert!((nodes.p[0] - (1.0 + nodes.ell / 129.0)).abs() < 1e-15);
        assert!(nodes.g(nodes.z_star).abs() < 1e-15);
        for &p in &nodes.p {
            assert!((1.0 - 0.003..=1.0 + 0.000022).contains(&p), "{p}");
        }
    }

    #[test]
    fn interpolation_reproduces_nodes() {
        let nodes = build_nodes(0.1, 1 << 12).unwrap();
        let vals: Vec<f64> = nodes.z.iter().map(|z| 3.0 * z * z - z + 0.5).collect();
        for (i, &z) in nodes.z.iter().enumerate() {
            assert!((interpolate(&nodes.z, &vals, z) - vals[i]).abs() < 1e-9);
        }
        let at = 0.3;
        assert!((interpolate(&nodes.z, &vals, at) - (3.0 * at * at - at + 0.5)).abs() < 1e-9);
    }

    #[test]
    fn uniform_and_single_item() {
        let m = 1u64 << 12;
        let nodes = build_nodes(0.1, m).unwrap();
        let d = 1024.0f64;
        let per = m as f64 / d;
        let uni: Vec<f64> = nodes.p.iter().map(|&p| d * libm::pow(per, p)).collect();
        let h = entropy_from_moments(&nodes, &uni, m as f64).unwrap();
        assert!((h - 10.0).abs() < 1e-6, "{h}");
        let single: Vec<f64> = nodes.p.iter().map(|&p| libm::pow(m as f64, p)).collect();
        assert!(entropy_from_moments(&nodes, &single, m as f64).unwrap().abs() < 1e-6);
    }

    #[test]
    fn multiplicative_duality() {
        let (h, h_hat, e) = (5.0, 5.2, 0.25);
        let ratio = entropy_to_multiplicative(h_hat) / entropy_to_multiplicative(h);
        assert_eq!((h_hat - h as f64).abs() <= e, (libm::exp2(-e)..=libm::exp2(e)).contains(&ratio));
    }

    #[test]
    fn sketch_tracks_uniform_entropy() {
        use crate::stream::run_metered;
        let items: alloc::vec::Vec<u64> = (0..2048u64).map(|i| i % 256 + 1).collect();
        let mut sk = EntropySketch::new(EntropyConfig::new(0.2, 2048, 400), 5).unwrap();
        run_metered(&mut sk, &items, &mut StateMeter::new());
        let h = sk.estimate(2048).unwrap();
        assert!((h - 8.0).abs() < 0.6, "{h}");
    }

    #[test]
    fn rejects_non_positive_moments() {
        let nodes = build_nodes(0.2, 1 << 10).unwrap();
        let mut mom = alloc::vec![1.0; nodes.len()];
        mom[2] = 0.0;
        assert!(matches!(entropy_from_moments(&nodes, &mom, 10.0), Err(Error::NonPositiveMoment { node: 2, .. })));
    }
}
