//! Dynamic maintenance of an approximate Chamfer distance between two point
//! sets under insertions and deletions.
//!
//! The estimator samples points of `A` through a randomly shifted quad-tree
//! with probability proportional to the side of the cell where each point
//! first meets `B`, then reweights exact or approximate nearest-neighbour
//! distances by the inverse probability.

pub mod baselines;
pub mod error;
pub mod estimator;
pub mod geometry;
pub mod harness;
pub mod nn;
pub mod par;
pub mod quadtree;
pub mod sampler;
pub mod verify;
pub mod wsampler;

pub use error::{Error, Result};
pub use estimator::{ChamferEstimate, DynamicChamfer};
pub use geometry::{
    chamfer_exact, l1_dist, EstimatorParams, InstanceConfig, Point, Side, UpdateEvent, UpdateOp,
};
pub use quadtree::DynQuadTree;
pub use wsampler::WeightedSampler;
