use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Spatial scaling of the Brownian increments.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// Independent `sqrt(dt) xi` per node.
    #[default]
    NodeIid,
    /// `sqrt(dt / W_j) xi`: cell-averaged space-time white noise.
    WhiteNoiseScaled,
    Off,
}

impl NoiseMode {
    pub fn label(self) -> &'static str {
        match self {
            NoiseMode::NodeIid => "node_iid",
            NoiseMode::WhiteNoiseScaled => "white_noise_scaled",
            NoiseMode::Off => "off",
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Counter-based standard normal draws: the value at `(step, node)` depends
/// only on the seed, the realization index, the step and the node's position
/// in the draw order, never on thread scheduling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseStream {
    seed: u64,
    realization: u64,
}

impl NoiseStream {
    pub fn new(seed: u64, realization: usize) -> Self {
        NoiseStream {
            seed,
            realization: realization as u64,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn realization(&self) -> usize {
        self.realization as usize
    }

    fn rng(&self, step: usize) -> ChaCha8Rng {
        let key = splitmix64(splitmix64(splitmix64(self.seed) ^ self.realization) ^ step as u64);
        ChaCha8Rng::seed_from_u64(key)
    }

    /// Writes the draws of `step` into `out`, consuming them in `order`
    /// (`out[order[i]]` receives the i-th draw).
    pub fn fill(&self, step: usize, order: &[usize], out: &mut [f64]) {
        let mut rng = self.rng(step);
        for &node in order {
            out[node] = rng.sample(StandardNormal);
        }
    }

    /// The `count` draws of `step` in draw order.
    pub fn draws(&self, step: usize, count: usize) -> Vec<f64> {
        let mut rng = self.rng(step);
        (0..count).map(|_| rng.sample(StandardNormal)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_pure_functions_of_their_coordinates() {
        let s = NoiseStream::new(42, 7);
        assert_eq!(s.draws(3, 50), NoiseStream::new(42, 7).draws(3, 50));
        assert_ne!(s.draws(3, 50), s.draws(4, 50));
        assert_ne!(s.draws(3, 50), NoiseStream::new(42, 8).draws(3, 50));
        assert_ne!(s.draws(3, 50), NoiseStream::new(43, 7).draws(3, 50));
    }

    #[test]
    fn shorter_grids_share_the_leading_draws() {
        let s = NoiseStream::new(1, 0);
        assert_eq!(s.draws(9, 20)[..], s.draws(9, 95)[..20]);
    }

    #[test]
    fn fill_follows_the_order() {
        let s = NoiseStream::new(5, 2);
        let order = [3, 0, 2, 1];
        let mut out = [0.0; 4];
        s.fill(0, &order, &mut out);
        let d = s.draws(0, 4);
        assert_eq!(out, [d[1], d[3], d[2], d[0]]);
    }

    #[test]
    fn draws_are_standard_normal() {
        let s = NoiseStream::new(2024, 0);
        let xs: Vec<f64> = (0..200).flat_map(|k| s.draws(k, 100)).collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 4.0 / n.sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 4.0 * (2.0 / n).sqrt(), "var {var}");
    }
}
