use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::par::{self, Execution};

/// Linear Gaussian map from l2 into l1.
///
/// Each output coordinate is a standard normal projection scaled by
/// `1 / (k * sqrt(2/pi))`, so the l1 norm of an image estimates the l2 norm
/// of its source.
#[derive(Debug, Clone)]
pub struct EmbeddingMap {
    dim: usize,
    k: usize,
    /// Row-major `k x dim`, already scaled.
    matrix: Vec<f64>,
}

impl EmbeddingMap {
    /// Default constant in `k = ceil(c * d / eps^2)`.
    pub const DEFAULT_C: f64 = 4.0;

    pub fn new(dim: usize, eps: f64, seed: u64) -> Result<Self> {
        Self::with_constant(dim, eps, Self::DEFAULT_C, seed)
    }

    pub fn with_constant(dim: usize, eps: f64, c: f64, seed: u64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParam(format!("eps {eps} not in (0, 1)")));
        }
        if dim == 0 {
            return Err(Error::InvalidParam("dimension must be at least 1".into()));
        }
        let k = (c * dim as f64 / (eps * eps)).ceil() as usize;
        let scale = 1.0 / (k as f64 * (2.0 / std::f64::consts::PI).sqrt());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let matrix = (0..k * dim)
            .map(|_| {
                let g: f64 = StandardNormal.sample(&mut rng);
                g * scale
            })
            .collect();
        Ok(EmbeddingMap { dim, k, matrix })
    }

    pub fn source_dim(&self) -> usize {
        self.dim
    }

    pub fn target_dim(&self) -> usize {
        self.k
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(self
            .matrix
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(x).map(|(m, v)| m * v).sum())
            .collect())
    }

    pub fn apply_all(&self, exec: Execution, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        par::map(exec, points, |p| self.apply(p)).into_iter().collect()
    }
}

/// Embeds every point with a fresh map of dimension `ceil(4 d / eps^2)`.
pub fn embed_l2_to_l1(points: &[Vec<f64>], eps: f64, seed: u64) -> Result<Vec<Vec<f64>>> {
    let Some(first) = points.first() else {
        return Ok(Vec::new());
    };
    EmbeddingMap::new(first.len(), eps, seed)?.apply_all(Execution::default(), points)
}
