//! Points on the integer grid, the l1 metric, quantization of real-valued
//! data, and the brute-force Chamfer distance used as ground truth.

use std::fmt;

use crate::error::{Error, Result};
use crate::par::{self, Execution};

/// Default grid extent `U`.
pub const DEFAULT_EXTENT: i64 = 1 << 20;

/// A point with integer grid coordinates.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point(Vec<i64>);

impl Point {
    pub fn new(coords: Vec<i64>) -> Self {
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<Vec<i64>> for Point {
    fn from(v: Vec<i64>) -> Self {
        Point(v)
    }
}

impl<const N: usize> From<[i64; N]> for Point {
    fn from(v: [i64; N]) -> Self {
        Point(v.to_vec())
    }
}

/// Which of the two point sets an update or query refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    B,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::A => f.write_str("A"),
            Side::B => f.write_str("B"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateOp {
    Insert,
    Delete,
}

/// One insertion into or deletion from `A` or `B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateEvent {
    pub side: Side,
    pub op: UpdateOp,
    pub point: Point,
}

impl UpdateEvent {
    pub fn insert(side: Side, point: Point) -> Self {
        UpdateEvent { side, op: UpdateOp::Insert, point }
    }

    pub fn delete(side: Side, point: Point) -> Self {
        UpdateEvent { side, op: UpdateOp::Delete, point }
    }
}

#[inline]
pub(crate) fn l1_unchecked(p: &[i64], q: &[i64]) -> u64 {
    p.iter().zip(q).map(|(a, b)| a.abs_diff(*b)).sum()
}

/// `sum_i |p_i - q_i|`.
pub fn l1_dist(p: &Point, q: &Point) -> Result<u64> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: q.dim() });
    }
    Ok(l1_unchecked(&p.0, &q.0))
}

/// Distance from `a` to its nearest neighbour in `b` by linear scan.
pub fn nearest_dist(a: &Point, b: &[Point]) -> Result<u64> {
    let mut best = None;
    for q in b {
        let d = l1_dist(a, q)?;
        best = Some(best.map_or(d, |x: u64| x.min(d)));
    }
    best.ok_or(Error::Empty("B"))
}

/// Exact Chamfer distance `sum_{a in A} min_{b in B} |a - b|_1` by brute force.
pub fn chamfer_exact(a: &[Point], b: &[Point]) -> Result<u64> {
    chamfer_exact_with(Execution::default(), a, b)
}

pub fn chamfer_exact_with(exec: Execution, a: &[Point], b: &[Point]) -> Result<u64> {
    let first = b.first().ok_or(Error::Empty("B"))?;
    let d = first.dim();
    if let Some(p) = a.iter().chain(b).find(|p| p.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: p.dim() });
    }
    Ok(par::sum_u64(exec, a, |p| {
        b.iter().map(|q| l1_unchecked(&p.0, &q.0)).min().unwrap_or(0)
    }))
}

/// Grid and randomness configuration of one tree instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceConfig {
    pub dim: usize,
    /// Grid extent `U`; input coordinates live in `[0, U)`.
    pub extent: i64,
    pub seed: u64,
    /// Fixed shift vector replacing the random draw.
    pub shift_override: Option<Vec<i64>>,
}

impl InstanceConfig {
    pub fn new(dim: usize, extent: i64, seed: u64) -> Result<Self> {
        let cfg = InstanceConfig { dim, extent, seed, shift_override: None };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_shift(mut self, shift: Vec<i64>) -> Result<Self> {
        self.shift_override = Some(shift);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidParam("dimension must be at least 1".into()));
        }
        if self.extent < 1 || self.extent.count_ones() != 1 || self.extent > 1 << 40 {
            return Err(Error::InvalidParam(format!(
                "extent {} is not a power of two in [1, 2^40]",
                self.extent
            )));
        }
        if let Some(s) = &self.shift_override {
            if s.len() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, got: s.len() });
            }
            if let Some((axis, &v)) = s.iter().enumerate().find(|(_, &v)| v < 0 || v >= self.extent) {
                return Err(Error::OutOfRange { axis, value: v, extent: self.extent });
            }
        }
        Ok(())
    }

    /// Number of levels below the root, `log2(2U)`.
    pub fn levels(&self) -> u32 {
        self.extent.trailing_zeros() + 1
    }

    /// Side length of a cell at `level`: `2U / 2^level`.
    pub fn side(&self, level: u32) -> u64 {
        1u64 << (self.levels() - level)
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        if p.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: p.dim() });
        }
        match p.0.iter().enumerate().find(|(_, &v)| v < 0 || v >= self.extent) {
            Some((axis, &value)) => Err(Error::OutOfRange { axis, value, extent: self.extent }),
            None => Ok(()),
        }
    }
}

/// Accuracy and sampling parameters of a query.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorParams {
    pub eps: f64,
    /// Approximation slack of the nearest-neighbour oracle.
    pub alpha: f64,
    /// Explicit sample count; `None` uses [`default_sample_count`].
    pub samples: Option<usize>,
    pub boost_reps: usize,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        EstimatorParams { eps: 0.2, alpha: 0.0, samples: None, boost_reps: 1 }
    }
}

impl EstimatorParams {
    pub fn with_samples(eps: f64, samples: usize) -> Self {
        EstimatorParams { eps, samples: Some(samples), ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidParam(format!("eps {} not in (0, 1)", self.eps)));
        }
        if self.alpha.is_nan() || self.alpha < 0.0 {
            return Err(Error::InvalidParam(format!("alpha {} is negative", self.alpha)));
        }
        if self.samples == Some(0) {
            return Err(Error::InvalidParam("sample count must be at least 1".into()));
        }
        if self.boost_reps == 0 || self.boost_reps.is_multiple_of(2) {
            return Err(Error::InvalidParam(format!(
                "boost_reps {} must be odd and positive",
                self.boost_reps
            )));
        }
        Ok(())
    }
}

/// `m = 120 * levels * log2(n) * max(alpha^2, 1) / eps^2`, rounded up.
pub fn default_sample_count(params: &EstimatorParams, levels: u32, n: usize) -> usize {
    let log_n = (n.max(2) as f64).log2();
    let m = 120.0 * levels as f64 * log_n * (params.alpha * params.alpha).max(1.0)
        / (params.eps * params.eps);
    m.ceil().max(1.0) as usize
}

/// Affine map from real coordinates onto `[0, U-1]^d`: translate the minimum
/// corner to the origin and scale uniformly so the widest axis spans `U-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizeMap {
    pub origin: Vec<f64>,
    pub scale: f64,
    pub extent: i64,
}

impl QuantizeMap {
    /// Fits the map to every vector yielded by `data`.
    pub fn fit<'a, I>(data: I, extent: i64) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut iter = data.into_iter();
        let first = iter.next().ok_or(Error::Empty("dataset"))?;
        let mut lo = first.to_vec();
        let mut hi = first.to_vec();
        for (row, v) in iter.enumerate() {
            if v.len() != lo.len() {
                return Err(Error::Malformed {
                    location: format!("vector {}", row + 1),
                    reason: format!("dimension {} differs from {}", v.len(), lo.len()),
                });
            }
            for (i, &x) in v.iter().enumerate() {
                lo[i] = lo[i].min(x);
                hi[i] = hi[i].max(x);
            }
        }
        let width = lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0, f64::max);
        let scale = if width > 0.0 { (extent - 1) as f64 / width } else { 0.0 };
        Ok(QuantizeMap { origin: lo, scale, extent })
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    /// Maps one vector; values outside the fitted box are clamped to the grid.
    pub fn apply(&self, v: &[f64]) -> Result<Point> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        let top = (self.extent - 1) as f64;
        Ok(Point(
            v.iter()
                .zip(&self.origin)
                .map(|(x, o)| ((x - o) * self.scale).round().clamp(0.0, top) as i64)
                .collect(),
        ))
    }

    pub fn apply_all(&self, data: &[Vec<f64>]) -> Result<Vec<Point>> {
        data.iter().map(|v| self.apply(v)).collect()
    }
}

/// Quantizes `raw` with a map fitted to `raw` itself.
pub fn quantize_dataset(raw: &[Vec<f64>], cfg: &InstanceConfig) -> Result<Vec<Point>> {
    let map = QuantizeMap::fit(raw.iter().map(|v| v.as_slice()), cfg.extent)?;
    if map.dim() != cfg.dim {
        return Err(Error::DimensionMismatch { expected: cfg.dim, got: map.dim() });
    }
    map.apply_all(raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[&[i64]]) -> Vec<Point> {
        v.iter().map(|c| Point::new(c.to_vec())).collect()
    }

    #[test]
    fn l1_examples() {
        assert_eq!(l1_dist(&[0, 0].into(), &[3, 4].into()).unwrap(), 7);
        assert_eq!(l1_dist(&[5, -2].into(), &[5, -2].into()).unwrap(), 0);
        assert_eq!(l1_dist(&[1, 2, 3].into(), &[4, 0, 3].into()).unwrap(), 5);
        assert!(matches!(
            l1_dist(&[1].into(), &[1, 2].into()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn chamfer_examples() {
        assert_eq!(chamfer_exact(&pts(&[&[0, 0], &[2, 2]]), &pts(&[&[0, 1]])).unwrap(), 4);
        let a = pts(&[&[0, 0], &[5, 0], &[9, 9]]);
        assert_eq!(chamfer_exact(&a, &a).unwrap(), 0);
        assert_eq!(chamfer_exact(&a, &pts(&[&[1, 0], &[8, 8]])).unwrap(), 7);
        assert_eq!(chamfer_exact(&a, &[]), Err(Error::Empty("B")));
        assert_eq!(chamfer_exact(&[], &a).unwrap(), 0);
    }

    #[test]
    fn chamfer_modes_agree() {
        let a: Vec<Point> = (0..300).map(|i| Point::new(vec![i * 7 % 101, i % 13])).collect();
        let b: Vec<Point> = (0..50).map(|i| Point::new(vec![i * 3, 2 * i % 17])).collect();
        assert_eq!(
            chamfer_exact_with(Execution::Sequential, &a, &b).unwrap(),
            chamfer_exact_with(Execution::Parallel, &a, &b).unwrap()
        );
    }

    #[test]
    fn quantize_examples() {
        let cfg = InstanceConfig::new(2, 8, 0).unwrap();
        let q = quantize_dataset(&[vec![0.0, 0.0], vec![1.0, 1.0]], &cfg).unwrap();
        assert_eq!(q, pts(&[&[0, 0], &[7, 7]]));
        let q = quantize_dataset(&[vec![5.0, 5.0]], &cfg).unwrap();
        assert_eq!(q, pts(&[&[0, 0]]));
        let q = quantize_dataset(&[vec![0.0, 0.0], vec![0.5, 0.25], vec![1.0, 1.0]], &cfg).unwrap();
        assert_eq!(q, pts(&[&[0, 0], &[4, 2], &[7, 7]]));
    }

    #[test]
    fn quantize_rejects_ragged_input() {
        let cfg = InstanceConfig::new(2, 8, 0).unwrap();
        assert!(quantize_dataset(&[vec![0.0, 0.0], vec![1.0]], &cfg).is_err());
        assert!(quantize_dataset(&[], &cfg).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(InstanceConfig::new(2, 12, 0).is_err());
        assert!(InstanceConfig::new(0, 8, 0).is_err());
        let cfg = InstanceConfig::new(1, 8, 0).unwrap();
        assert_eq!(cfg.levels(), 4);
        assert_eq!(cfg.side(0), 16);
        assert_eq!(cfg.side(4), 1);
        assert_eq!(InstanceConfig::new(3, DEFAULT_EXTENT, 0).unwrap().levels(), 21);
        assert!(cfg.clone().with_shift(vec![8]).is_err());
        assert!(cfg.check_point(&[8].into()).is_err());
        assert!(cfg.check_point(&[-1].into()).is_err());
        assert!(cfg.check_point(&[7].into()).is_ok());
    }

    #[test]
    fn sample_count_formula() {
        let p = EstimatorParams { eps: 0.5, alpha: 1.0, samples: None, boost_reps: 1 };
        assert_eq!(default_sample_count(&p, 21, 1024), 100_800);
        let p2 = EstimatorParams { alpha: 2.0, ..p.clone() };
        assert_eq!(default_sample_count(&p2, 21, 1024), 4 * 100_800);
        assert!(EstimatorParams { boost_reps: 2, ..p.clone() }.validate().is_err());
        assert!(EstimatorParams { eps: 1.0, ..p }.validate().is_err());
    }
}
