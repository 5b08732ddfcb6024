//! Synthetic stand-ins for the real datasets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Points scanned from a desk: a 2 x 1 tabletop at height 0.75 on four legs,
/// with small Gaussian sensor noise. Two calls with different seeds behave
/// like two scans of the same object.
pub fn desk_cloud(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let legs = [(-0.9, -0.4), (-0.9, 0.4), (0.9, -0.4), (0.9, 0.4)];
    (0..n)
        .map(|_| {
            let mut p = if rng.random_bool(0.7) {
                vec![rng.random_range(-1.0..1.0), rng.random_range(-0.5..0.5), 0.75]
            } else {
                let (x, y) = legs[rng.random_range(0..4)];
                let t = rng.random_range(0.0..std::f64::consts::TAU);
                vec![x + 0.04 * t.cos(), y + 0.04 * t.sin(), rng.random_range(0.0..0.75)]
            };
            for c in &mut p {
                *c += 0.005 * normal(&mut rng);
            }
            p
        })
        .collect()
}

/// Mixture of `clusters` isotropic Gaussians with unit spread around centers
/// drawn from `N(0, 25 I)`.
pub fn gaussian_clusters(n: usize, dim: usize, clusters: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..clusters.max(1))
        .map(|_| (0..dim).map(|_| 5.0 * normal(&mut rng)).collect())
        .collect();
    (0..n)
        .map(|_| {
            let c = &centers[rng.random_range(0..centers.len())];
            c.iter().map(|x| x + normal(&mut rng)).collect()
        })
        .collect()
}
