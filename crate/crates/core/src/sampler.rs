//! Two-stage sampling of `A`-points: a node is drawn in proportion to
//! `side * matched` from the tree sampler, then the descent follows the child
//! samplers (children free of `B`, weighted by their `A` count) down to a leaf.
//! Point `a` is returned with probability `side(v_a) / sum_v side(v) gamma(v)`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{Point, Side};
use crate::quadtree::{DynQuadTree, NodeId};

#[derive(Debug, Clone, PartialEq)]
pub struct MatchedSample {
    pub point: Point,
    /// Side length of the cell where `point` is matched.
    pub cell_side: u64,
    /// `sum_v gamma(v) * side(v)` at draw time.
    pub total_weight: u64,
}

pub fn sample_matched_point<R: Rng + ?Sized>(tree: &DynQuadTree, rng: &mut R) -> Result<MatchedSample> {
    if tree.len(Side::A) == 0 {
        return Err(Error::Empty("A"));
    }
    if tree.len(Side::B) == 0 {
        return Err(Error::Empty("B"));
    }
    let v = tree.tree_sampler().sample(rng)? as NodeId;
    let matched = tree.node(v);
    let cell_side = tree.side_of(matched.level);
    // Every A-point below a B-free child of `v` is matched exactly at `v`.
    let mut node = matched;
    while !node.is_leaf() {
        let child = node.child_sampler.sample(rng)? as NodeId;
        node = tree.node(child);
    }
    let point = node.point.clone().expect("leaf holds its point");
    Ok(MatchedSample { point, cell_side, total_weight: tree.total_gamma_weight() })
}

/// `sum_v gamma(v) * side(v)`.
pub fn total_gamma_weight(tree: &DynQuadTree) -> u64 {
    tree.total_gamma_weight()
}

/// Exact sampling law over distinct `A`-points, from each point's matched
/// cell: `(point, multiplicity * side(v_a) / total, side(v_a))`.
pub fn exact_law(tree: &DynQuadTree) -> Result<Vec<(Point, f64, u64)>> {
    let total = tree.total_gamma_weight() as f64;
    let mut law = Vec::new();
    for (p, a, _) in tree.members() {
        if a == 0 {
            continue;
        }
        let (_, side) = tree.matched_node_of(p)?;
        law.push((p.clone(), a as f64 * side as f64 / total, side));
    }
    law.sort_by(|x, y| x.0.cmp(&y.0));
    Ok(law)
}

/// Total-variation distance between `draws` empirical frequencies and `law`.
pub fn tv_distance(law: &[(Point, f64, u64)], draws: &[Point]) -> f64 {
    let mut counts = std::collections::HashMap::<&Point, usize>::new();
    for d in draws {
        *counts.entry(d).or_default() += 1;
    }
    let n = draws.len() as f64;
    let mut tv = 0.0;
    let mut covered = 0usize;
    for (p, prob, _) in law {
        let c = counts.get(p).copied().unwrap_or(0);
        covered += c;
        tv += (c as f64 / n - prob).abs();
    }
    // Draws outside the support count in full.
    tv += (draws.len() - covered) as f64 / n;
    tv / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::InstanceConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn line_tree() -> DynQuadTree {
        let cfg = InstanceConfig::new(1, 8, 0).unwrap().with_shift(vec![0]).unwrap();
        DynQuadTree::new(cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap()
    }

    #[test]
    fn single_pair() {
        let mut t = line_tree();
        t.insert(&Point::from([1]), Side::A).unwrap();
        t.insert(&Point::from([5]), Side::B).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let s = sample_matched_point(&t, &mut rng).unwrap();
            assert_eq!(s.point, Point::from([1]));
            assert_eq!(s.cell_side, 8);
        }
    }

    #[test]
    fn two_point_law() {
        let mut t = line_tree();
        t.insert(&Point::from([1]), Side::A).unwrap();
        t.insert(&Point::from([6]), Side::A).unwrap();
        t.insert(&Point::from([5]), Side::B).unwrap();
        assert_eq!(total_gamma_weight(&t), 12);
        let law = exact_law(&t).unwrap();
        assert_eq!(law[0], (Point::from([1]), 8.0 / 12.0, 8));
        assert_eq!(law[1], (Point::from([6]), 4.0 / 12.0, 4));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut draws = Vec::new();
        for _ in 0..100_000 {
            let s = sample_matched_point(&t, &mut rng).unwrap();
            assert_eq!(s.cell_side, t.matched_node_of(&s.point).unwrap().1);
            draws.push(s.point);
        }
        assert!(tv_distance(&law, &draws) < 0.02);
    }

    #[test]
    fn empty_sides_rejected() {
        let mut t = line_tree();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(total_gamma_weight(&t), 0);
        assert_eq!(sample_matched_point(&t, &mut rng), Err(Error::Empty("A")));
        t.insert(&Point::from([1]), Side::A).unwrap();
        assert_eq!(sample_matched_point(&t, &mut rng), Err(Error::Empty("B")));
    }

    #[test]
    fn tv_of_exact_frequencies_is_zero() {
        let law = vec![(Point::from([0]), 0.5, 1), (Point::from([1]), 0.5, 1)];
        let draws = vec![Point::from([0]), Point::from([1])];
        assert_eq!(tv_distance(&law, &draws), 0.0);
        assert_eq!(tv_distance(&law, &[Point::from([2])]), 1.0);
    }
}
