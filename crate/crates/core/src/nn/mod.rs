//! Dynamic nearest-neighbour oracles over `B` under the l1 metric.
//!
//! An oracle with slack `alpha` returns `mu` with
//! `mu <= min_b |a - b|_1 <= (1 + alpha) * mu`. Both oracles here are exact.

mod embed;
mod kdtree;
mod scan;

use std::fmt::Debug;

pub use embed::{embed_l2_to_l1, EmbeddingMap};
pub use kdtree::KdTreeOracle;
pub use scan::ScanOracle;

use crate::error::Result;
use crate::geometry::Point;

/// Highest dimension for which [`OracleKind::Auto`] picks the KD-tree.
pub const KD_TREE_MAX_DIM: usize = 16;

pub trait NnOracle: Debug + Send {
    fn insert(&mut self, b: &Point) -> Result<()>;

    fn delete(&mut self, b: &Point) -> Result<()>;

    /// Approximate distance from `a` to its nearest neighbour in `B`.
    fn value(&self, a: &Point) -> Result<f64>;

    /// Approximation slack; zero for exact oracles.
    fn alpha(&self) -> f64 {
        0.0
    }

    /// Number of points in `B`, counting multiplicity.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OracleKind {
    Scan,
    KdTree,
    /// KD-tree up to [`KD_TREE_MAX_DIM`] dimensions, linear scan above.
    #[default]
    Auto,
}

impl OracleKind {
    pub fn build(self, dim: usize) -> Box<dyn NnOracle> {
        match self {
            OracleKind::Scan => Box::new(ScanOracle::new()),
            OracleKind::KdTree => Box::new(KdTreeOracle::new(dim)),
            OracleKind::Auto if dim <= KD_TREE_MAX_DIM => Box::new(KdTreeOracle::new(dim)),
            OracleKind::Auto => Box::new(ScanOracle::new()),
        }
    }
}
