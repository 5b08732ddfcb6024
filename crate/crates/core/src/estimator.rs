//! Importance-sampling estimate of the Chamfer distance over a dynamic
//! quad-tree, with median boosting.
//!
//! A sampled point `a` contributes `nn(a) * W / side(v_a)` where `W` is the
//! tree's total matched weight; with an exact oracle the sample mean is an
//! unbiased estimate of `sum_a min_b |a - b|_1`.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{default_sample_count, EstimatorParams, InstanceConfig, Point, Side, UpdateEvent, UpdateOp};
use crate::nn::{NnOracle, OracleKind};
use crate::quadtree::DynQuadTree;
use crate::sampler::{exact_law, sample_matched_point};

#[derive(Debug, Clone, PartialEq)]
pub struct ChamferEstimate {
    /// `raw_mean / (1 + eps/2)`.
    pub value: f64,
    pub m_used: usize,
    /// Mean of the per-sample weights.
    pub raw_mean: f64,
    pub per_sample_weights: Option<Vec<f64>>,
}

#[derive(Debug)]
pub struct DynamicChamfer {
    tree: DynQuadTree,
    oracle: Box<dyn NnOracle>,
    params: EstimatorParams,
    sets: [HashMap<Point, u64>; 2],
    sizes: [usize; 2],
    rng: ChaCha8Rng,
    record_weights: bool,
}

fn idx(side: Side) -> usize {
    match side {
        Side::A => 0,
        Side::B => 1,
    }
}

impl DynamicChamfer {
    pub fn new(cfg: InstanceConfig, params: EstimatorParams, oracle: OracleKind) -> Result<Self> {
        let dim = cfg.dim;
        Self::with_oracle(cfg, params, oracle.build(dim))
    }

    /// All randomness (the tree shift, then every query) comes from one
    /// generator seeded with `cfg.seed`.
    pub fn with_oracle(cfg: InstanceConfig, params: EstimatorParams, oracle: Box<dyn NnOracle>) -> Result<Self> {
        params.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let tree = DynQuadTree::new(cfg, &mut rng)?;
        Ok(DynamicChamfer {
            tree,
            oracle,
            params,
            sets: [HashMap::new(), HashMap::new()],
            sizes: [0, 0],
            rng,
            record_weights: false,
        })
    }

    /// Keep every sample's weight in returned estimates.
    pub fn record_weights(&mut self, on: bool) {
        self.record_weights = on;
    }

    pub fn params(&self) -> &EstimatorParams {
        &self.params
    }

    pub fn tree(&self) -> &DynQuadTree {
        &self.tree
    }

    pub fn oracle(&self) -> &dyn NnOracle {
        self.oracle.as_ref()
    }

    pub fn len(&self, side: Side) -> usize {
        self.sizes[idx(side)]
    }

    pub fn contains(&self, p: &Point, side: Side) -> bool {
        self.sets[idx(side)].contains_key(p)
    }

    pub fn points(&self, side: Side) -> Vec<Point> {
        self.sets[idx(side)]
            .iter()
            .flat_map(|(p, &c)| std::iter::repeat_n(p.clone(), c as usize))
            .collect()
    }

    /// Applies one update to the tree, the oracle, and the point sets. An
    /// invalid update leaves everything unchanged.
    pub fn apply_update(&mut self, ev: &UpdateEvent) -> Result<()> {
        self.tree.config().check_point(&ev.point)?;
        let s = idx(ev.side);
        match ev.op {
            UpdateOp::Insert => {
                self.tree.insert(&ev.point, ev.side)?;
                if ev.side == Side::B {
                    self.oracle.insert(&ev.point)?;
                }
                *self.sets[s].entry(ev.point.clone()).or_default() += 1;
                self.sizes[s] += 1;
            }
            UpdateOp::Delete => {
                let Some(count) = self.sets[s].get_mut(&ev.point) else {
                    return Err(Error::Absent(ev.side));
                };
                *count -= 1;
                if *count == 0 {
                    self.sets[s].remove(&ev.point);
                }
                self.sizes[s] -= 1;
                self.tree.delete(&ev.point, ev.side)?;
                if ev.side == Side::B {
                    self.oracle.delete(&ev.point)?;
                }
            }
        }
        Ok(())
    }

    pub fn insert(&mut self, side: Side, p: Point) -> Result<()> {
        self.apply_update(&UpdateEvent::insert(side, p))
    }

    pub fn delete(&mut self, side: Side, p: Point) -> Result<()> {
        self.apply_update(&UpdateEvent::delete(side, p))
    }

    /// Sample count for `params` at the current instance size.
    pub fn sample_count(&self, params: &EstimatorParams) -> usize {
        params.samples.unwrap_or_else(|| {
            let n = self.sizes[0].max(self.sizes[1]).max(2);
            default_sample_count(params, self.tree.levels(), n)
        })
    }

    /// One importance-sampling estimate with the stored parameters.
    pub fn estimate(&mut self) -> Result<ChamferEstimate> {
        let params = self.params.clone();
        if params.boost_reps > 1 {
            self.query_boosted(&params)
        } else {
            self.query(&params)
        }
    }

    pub fn query(&mut self, params: &EstimatorParams) -> Result<ChamferEstimate> {
        params.validate()?;
        if self.sizes[0] == 0 {
            return Err(Error::Empty("A"));
        }
        if self.sizes[1] == 0 {
            return Err(Error::Empty("B"));
        }
        let m = self.sample_count(params);
        let mut weights = self.record_weights.then(|| Vec::with_capacity(m));
        let mut sum = 0.0;
        for _ in 0..m {
            let s = sample_matched_point(&self.tree, &mut self.rng)?;
            let nn = self.oracle.value(&s.point)?;
            let x = nn * s.total_weight as f64 / s.cell_side as f64;
            sum += x;
            if let Some(w) = weights.as_mut() {
                w.push(x);
            }
        }
        let raw_mean = sum / m as f64;
        Ok(ChamferEstimate {
            value: raw_mean / (1.0 + params.eps / 2.0),
            m_used: m,
            raw_mean,
            per_sample_weights: weights,
        })
    }

    /// Median (by value) of `params.boost_reps` independent queries.
    pub fn query_boosted(&mut self, params: &EstimatorParams) -> Result<ChamferEstimate> {
        params.validate()?;
        let mut runs = (0..params.boost_reps).map(|_| self.query(params)).collect::<Result<Vec<_>>>()?;
        runs.sort_by(|x, y| x.value.total_cmp(&y.value));
        Ok(runs.swap_remove(params.boost_reps / 2))
    }

    /// `sum_a P(a) * x_a` over the exact sampling law, without sampling.
    pub fn expected_raw_mean(&self) -> Result<f64> {
        let total = self.tree.total_gamma_weight() as f64;
        let mut sum = 0.0;
        for (p, prob, side) in exact_law(&self.tree)? {
            sum += prob * self.oracle.value(&p)? * total / side as f64;
        }
        Ok(sum)
    }
}
