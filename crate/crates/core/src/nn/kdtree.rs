use std::collections::HashMap;

use super::NnOracle;
use crate::error::{Error, Result};
use crate::geometry::{l1_unchecked, Point, Side};

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct KdNode {
    point: Point,
    /// Multiplicity; zero marks a tombstone that still routes searches.
    count: u32,
    axis: u32,
    left: u32,
    right: u32,
}

/// Exact l1 nearest-neighbour oracle over a KD-tree.
///
/// Insertions attach leaves; deletions leave tombstones. The tree is rebuilt
/// balanced when tombstones outnumber live points or an insertion lands too
/// deep, which keeps updates at `O(log n)` amortized.
#[derive(Debug, Clone)]
pub struct KdTreeOracle {
    dim: usize,
    nodes: Vec<KdNode>,
    root: u32,
    lookup: HashMap<Point, u32>,
    live: usize,
    dead: usize,
    len: usize,
    rebuilds: usize,
}

impl KdTreeOracle {
    pub fn new(dim: usize) -> Self {
        KdTreeOracle {
            dim: dim.max(1),
            nodes: Vec::new(),
            root: NONE,
            lookup: HashMap::new(),
            live: 0,
            dead: 0,
            len: 0,
            rebuilds: 0,
        }
    }

    pub fn rebuilds(&self) -> usize {
        self.rebuilds
    }

    fn depth_limit(&self) -> usize {
        2 * ((self.live + self.dead + 1) as f64).log2().ceil() as usize + 8
    }

    fn rebuild(&mut self) {
        let mut items: Vec<(Point, u32)> = self
            .nodes
            .drain(..)
            .filter(|n| n.count > 0)
            .map(|n| (n.point, n.count))
            .collect();
        self.lookup.clear();
        self.dead = 0;
        self.live = items.len();
        self.root = self.build(&mut items, 0);
        self.rebuilds += 1;
    }

    fn build(&mut self, items: &mut [(Point, u32)], depth: usize) -> u32 {
        if items.is_empty() {
            return NONE;
        }
        let axis = depth % self.dim;
        let mid = items.len() / 2;
        items.select_nth_unstable_by_key(mid, |(p, _)| p.coords()[axis]);
        // Searches send equal keys right, so the split point is the first
        // element equal to the median: pack strictly smaller keys in front.
        let key = items[mid].0.coords()[axis];
        let mut w = 0;
        for r in 0..mid {
            if items[r].0.coords()[axis] < key {
                items.swap(w, r);
                w += 1;
            }
        }
        let mid = w;
        let (left, rest) = items.split_at_mut(mid);
        let (here, right) = rest.split_first_mut().expect("nonempty");
        let id = self.nodes.len() as u32;
        self.nodes.push(KdNode {
            point: here.0.clone(),
            count: here.1,
            axis: axis as u32,
            left: NONE,
            right: NONE,
        });
        self.lookup.insert(here.0.clone(), id);
        let l = self.build(left, depth + 1);
        let r = self.build(right, depth + 1);
        self.nodes[id as usize].left = l;
        self.nodes[id as usize].right = r;
        id
    }
}

impl NnOracle for KdTreeOracle {
    fn insert(&mut self, b: &Point) -> Result<()> {
        if b.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: b.dim() });
        }
        self.len += 1;
        if let Some(&id) = self.lookup.get(b) {
            let n = &mut self.nodes[id as usize];
            if n.count == 0 {
                self.dead -= 1;
                self.live += 1;
            }
            n.count += 1;
            return Ok(());
        }
        let id = self.nodes.len() as u32;
        let mut depth = 0;
        let mut axis = 0;
        if self.root == NONE {
            self.root = id;
        } else {
            let mut cur = self.root;
            loop {
                depth += 1;
                let n = &self.nodes[cur as usize];
                let a = n.axis as usize;
                let next = if b.coords()[a] < n.point.coords()[a] { n.left } else { n.right };
                if next == NONE {
                    axis = (a + 1) % self.dim;
                    let n = &mut self.nodes[cur as usize];
                    if b.coords()[a] < n.point.coords()[a] {
                        n.left = id;
                    } else {
                        n.right = id;
                    }
                    break;
                }
                cur = next;
            }
        }
        self.nodes.push(KdNode { point: b.clone(), count: 1, axis: axis as u32, left: NONE, right: NONE });
        self.lookup.insert(b.clone(), id);
        self.live += 1;
        if depth > self.depth_limit() {
            self.rebuild();
        }
        Ok(())
    }

    fn delete(&mut self, b: &Point) -> Result<()> {
        let id = *self.lookup.get(b).ok_or(Error::Absent(Side::B))?;
        let n = &mut self.nodes[id as usize];
        if n.count == 0 {
            return Err(Error::Absent(Side::B));
        }
        n.count -= 1;
        self.len -= 1;
        if n.count == 0 {
            self.live -= 1;
            self.dead += 1;
            if self.dead > self.live.max(16) {
                self.rebuild();
            }
        }
        Ok(())
    }

    fn value(&self, a: &Point) -> Result<f64> {
        if self.len == 0 {
            return Err(Error::Empty("B"));
        }
        let q = a.coords();
        let mut best = u64::MAX;
        let mut stack = vec![(self.root, 0u64)];
        while let Some((id, bound)) = stack.pop() {
            if id == NONE || bound >= best {
                continue;
            }
            let n = &self.nodes[id as usize];
            if n.count > 0 {
                best = best.min(l1_unchecked(q, n.point.coords()));
            }
            let axis = n.axis as usize;
            let split = n.point.coords()[axis];
            let gap = q[axis].abs_diff(split);
            let (near, far) = if q[axis] < split { (n.left, n.right) } else { (n.right, n.left) };
            // Far side is pushed first so the near side is explored first.
            stack.push((far, gap));
            stack.push((near, 0));
        }
        Ok(best as f64)
    }

    fn len(&self) -> usize {
        self.len
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rebuild_on_tombstones_keeps_answers() {
        let mut kd = KdTreeOracle::new(2);
        for i in 0..100 {
            kd.insert(&Point::new(vec![i, 100 - i])).unwrap();
        }
        for i in 0..80 {
            kd.delete(&Point::new(vec![i, 100 - i])).unwrap();
        }
        assert!(kd.rebuilds() >= 1);
        assert_eq!(kd.len(), 20);
        assert_eq!(kd.value(&Point::new(vec![0, 100])).unwrap(), 160.0);
    }

    #[test]
    fn sorted_insertions_trigger_rebalancing() {
        let mut kd = KdTreeOracle::new(1);
        for i in 0..1000 {
            kd.insert(&Point::new(vec![i])).unwrap();
        }
        assert!(kd.rebuilds() >= 1);
        assert_eq!(kd.value(&Point::new(vec![2000])).unwrap(), 1001.0);
    }

    #[test]
    fn duplicate_axis_keys() {
        let mut kd = KdTreeOracle::new(2);
        for i in 0..50 {
            kd.insert(&Point::new(vec![3, i])).unwrap();
        }
        for i in 0..40 {
            kd.delete(&Point::new(vec![3, i])).unwrap();
        }
        assert_eq!(kd.value(&Point::new(vec![3, 0])).unwrap(), 40.0);
        assert_eq!(kd.value(&Point::new(vec![0, 45])).unwrap(), 3.0);
    }
}
