//! Randomly shifted dynamic quad-tree augmented with per-cell counts of
//! `A`-points, `B`-points, and matched `A`-points.
//!
//! A point is *matched* at the lowest cell containing it together with some
//! point of `B`. Every node keeps a sampler over its children that contain no
//! `B` point (weighted by their `A` count), and the tree keeps a global
//! sampler over nodes with matched points, weighted by `side * matched`.
//!
//! Cells are materialized down to the first level at which a cell holds a
//! single point, or to the bottom level where the side is 1. Bottom cells may
//! hold several copies of one coordinate vector.

mod bruteforce;
mod cell;

use std::collections::HashMap;

use rand::Rng;

pub use bruteforce::recompute as recompute_counters;
pub use cell::{CellId, CellKey};

use crate::error::{Error, Result};
use crate::geometry::{InstanceConfig, Point, Side};
use crate::wsampler::WeightedSampler;
use cell::cell_key;

/// Per-cell counts: `A`-points, `B`-points, and `A`-points matched here.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub gamma_a: u64,
    pub gamma_b: u64,
    pub gamma: u64,
}

pub(crate) type NodeId = u32;

#[derive(Debug, Clone)]
pub(crate) struct Node {
    pub(crate) key: CellKey,
    pub(crate) level: u32,
    pub(crate) counts: Counters,
    parent: Option<NodeId>,
    pos_in_parent: u32,
    children: Vec<NodeId>,
    /// Children without `B` points, weighted by their `A` count.
    pub(crate) child_sampler: WeightedSampler<u64>,
    /// Resident point of a leaf (unshifted).
    pub(crate) point: Option<Point>,
}

impl Node {
    fn total(&self) -> u64 {
        self.counts.gamma_a + self.counts.gamma_b
    }

    fn count_mut(&mut self, side: Side) -> &mut u64 {
        match side {
            Side::A => &mut self.counts.gamma_a,
            Side::B => &mut self.counts.gamma_b,
        }
    }

    pub(crate) fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct DynQuadTree {
    cfg: InstanceConfig,
    levels: u32,
    shift: Vec<i64>,
    nodes: Vec<Option<Node>>,
    free: Vec<NodeId>,
    index: HashMap<CellKey, NodeId>,
    root: Option<NodeId>,
    /// Nodes with matched points, weighted by `side * gamma`.
    tree_sampler: WeightedSampler<u64>,
    members: HashMap<Point, [u64; 2]>,
    size: [usize; 2],
    visits: u64,
    pending_visits: u64,
    last_update_visits: u64,
}

fn side_idx(side: Side) -> usize {
    match side {
        Side::A => 0,
        Side::B => 1,
    }
}

impl DynQuadTree {
    /// An empty tree; the shift is drawn from `rng` unless overridden.
    pub fn new<R: Rng + ?Sized>(cfg: InstanceConfig, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        let shift = match &cfg.shift_override {
            Some(s) => s.clone(),
            None => (0..cfg.dim).map(|_| rng.random_range(0..cfg.extent)).collect(),
        };
        Ok(DynQuadTree {
            levels: cfg.levels(),
            cfg,
            shift,
            nodes: Vec::new(),
            free: Vec::new(),
            index: HashMap::new(),
            root: None,
            tree_sampler: WeightedSampler::new(),
            members: HashMap::new(),
            size: [0, 0],
            visits: 0,
            pending_visits: 0,
            last_update_visits: 0,
        })
    }

    pub fn config(&self) -> &InstanceConfig {
        &self.cfg
    }

    pub fn shift(&self) -> &[i64] {
        &self.shift
    }

    /// Number of levels below the root.
    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn len(&self, side: Side) -> usize {
        self.size[side_idx(side)]
    }

    pub fn node_count(&self) -> usize {
        self.index.len()
    }

    pub fn contains(&self, x: &Point, side: Side) -> bool {
        self.members.get(x).is_some_and(|c| c[side_idx(side)] > 0)
    }

    /// Distinct points with their `(A, B)` multiplicities.
    pub fn members(&self) -> impl Iterator<Item = (&Point, u64, u64)> {
        self.members.iter().map(|(p, c)| (p, c[0], c[1]))
    }

    /// The `A` and `B` multisets expanded into point lists.
    pub fn point_sets(&self) -> (Vec<Point>, Vec<Point>) {
        let mut a = Vec::with_capacity(self.size[0]);
        let mut b = Vec::with_capacity(self.size[1]);
        for (p, c) in &self.members {
            a.extend(std::iter::repeat_n(p.clone(), c[0] as usize));
            b.extend(std::iter::repeat_n(p.clone(), c[1] as usize));
        }
        (a, b)
    }

    /// `sum_v gamma(v) * side(v)`.
    pub fn total_gamma_weight(&self) -> u64 {
        self.tree_sampler.total_weight()
    }

    /// Cumulative node and sampler-entry visits across all updates.
    pub fn visits(&self) -> u64 {
        self.visits
    }

    pub fn last_update_visits(&self) -> u64 {
        self.last_update_visits
    }

    pub fn shifted(&self, x: &Point) -> Vec<i64> {
        x.coords().iter().zip(&self.shift).map(|(c, z)| c + z).collect()
    }

    pub(crate) fn node(&self, id: NodeId) -> &Node {
        self.nodes[id as usize].as_ref().expect("live node id")
    }

    fn node_mut(&mut self, id: NodeId) -> &mut Node {
        self.nodes[id as usize].as_mut().expect("live node id")
    }

    pub(crate) fn tree_sampler(&self) -> &WeightedSampler<u64> {
        &self.tree_sampler
    }

    pub(crate) fn side_of(&self, level: u32) -> u64 {
        1 << (self.levels - level)
    }

    pub fn insert(&mut self, x: &Point, side: Side) -> Result<()> {
        self.cfg.check_point(x)?;
        let before = self.tree_sampler.visits();
        let s = self.shifted(x);
        // Structure and A/B counts first; the matched-count pass runs on the
        // resulting path.
        let path = self.insert_structural(x, &s, side);
        match side {
            Side::A => self.gamma_add_a(&path, true),
            Side::B => self.gamma_insert_b(&path),
        }
        self.members.entry(x.clone()).or_default()[side_idx(side)] += 1;
        self.size[side_idx(side)] += 1;
        self.finish_update(before);
        Ok(())
    }

    pub fn delete(&mut self, x: &Point, side: Side) -> Result<()> {
        self.cfg.check_point(x)?;
        if !self.contains(x, side) {
            return Err(Error::Absent(side));
        }
        let before = self.tree_sampler.visits();
        let s = self.shifted(x);
        // Matched counts are settled on the tree that still holds `x`, then
        // the structure contracts.
        let path = self.path_of(&s);
        self.pending_visits += path.len() as u64;
        match side {
            Side::A => self.gamma_add_a(&path, false),
            Side::B => self.gamma_delete_b(&path),
        }
        self.delete_structural(&path, side);
        let entry = self.members.get_mut(x).expect("checked above");
        entry[side_idx(side)] -= 1;
        if *entry == [0, 0] {
            self.members.remove(x);
        }
        self.size[side_idx(side)] -= 1;
        self.finish_update(before);
        Ok(())
    }

    fn finish_update(&mut self, tree_visits_before: u64) {
        let v = self.pending_visits + self.tree_sampler.visits() - tree_visits_before;
        self.pending_visits = 0;
        self.last_update_visits = v;
        self.visits += v;
    }

    /// Root-to-leaf node ids on the path of a shifted point.
    fn path_of(&self, s: &[i64]) -> Vec<NodeId> {
        let mut path = Vec::new();
        for level in 0..=self.levels {
            let Some(&id) = self.index.get(&cell_key(s, level, self.levels)) else {
                break;
            };
            path.push(id);
            if self.node(id).is_leaf() {
                break;
            }
        }
        path
    }

    fn insert_structural(&mut self, x: &Point, s: &[i64], side: Side) -> Vec<NodeId> {
        let mut path = Vec::with_capacity(self.levels as usize + 1);
        let mut parent = None;
        for level in 0..=self.levels {
            self.pending_visits += 1;
            let key = cell_key(s, level, self.levels);
            let Some(&id) = self.index.get(&key) else {
                let id = self.alloc(key, level, parent, x.clone());
                *self.node_mut(id).count_mut(side) += 1;
                self.sync_child_entry(id);
                path.push(id);
                return path;
            };
            if level < self.levels && self.node(id).total() == 1 {
                self.push_down(id);
            }
            *self.node_mut(id).count_mut(side) += 1;
            self.sync_child_entry(id);
            path.push(id);
            parent = Some(id);
        }
        path
    }

    /// Moves the single resident of leaf `id` into a new child one level down.
    fn push_down(&mut self, id: NodeId) {
        let node = self.node_mut(id);
        let y = node.point.take().expect("single-point leaf holds its point");
        let y_side = if node.counts.gamma_a == 1 { Side::A } else { Side::B };
        let level = node.level + 1;
        let key = cell_key(&self.shifted(&y), level, self.levels);
        let child = self.alloc(key, level, Some(id), y);
        *self.node_mut(child).count_mut(y_side) += 1;
        self.sync_child_entry(child);
    }

    fn alloc(&mut self, key: CellKey, level: u32, parent: Option<NodeId>, point: Point) -> NodeId {
        let mut node = Node {
            key,
            level,
            counts: Counters::default(),
            parent,
            pos_in_parent: 0,
            children: Vec::new(),
            child_sampler: WeightedSampler::new(),
            point: Some(point),
        };
        let id = match self.free.pop() {
            Some(id) => id,
            None => {
                self.nodes.push(None);
                (self.nodes.len() - 1) as NodeId
            }
        };
        match parent {
            Some(p) => {
                let pn = self.node_mut(p);
                node.pos_in_parent = pn.children.len() as u32;
                pn.children.push(id);
            }
            None => self.root = Some(id),
        }
        self.nodes[id as usize] = Some(node);
        self.index.insert(key, id);
        id
    }

    fn free_node(&mut self, id: NodeId) {
        let node = self.nodes[id as usize].take().expect("live node id");
        debug_assert!(node.children.is_empty());
        debug_assert_eq!(node.counts.gamma, 0, "freed node still has matched points");
        self.pending_visits += 1;
        self.tree_sampler.set(id as u64, None).expect("set never fails on removal");
        match node.parent {
            Some(p) => {
                let before = self.node(p).child_sampler.visits();
                let pn = self.node_mut(p);
                pn.child_sampler.set(id as u64, None).expect("removal");
                let pos = node.pos_in_parent as usize;
                pn.children.swap_remove(pos);
                let moved = pn.children.get(pos).copied();
                let after = pn.child_sampler.visits();
                if let Some(m) = moved {
                    self.node_mut(m).pos_in_parent = pos as u32;
                }
                self.pending_visits += after - before;
            }
            None => self.root = None,
        }
        self.index.remove(&node.key);
        self.free.push(id);
    }

    fn delete_structural(&mut self, path: &[NodeId], side: Side) {
        for &v in path {
            *self.node_mut(v).count_mut(side) -= 1;
            self.sync_child_entry(v);
        }
        let first_empty = path.iter().position(|&v| self.node(v).total() == 0).unwrap_or(path.len());
        for &v in path[first_empty..].iter().rev() {
            self.free_node(v);
        }
        let single = path[..first_empty]
            .iter()
            .copied()
            .find(|&v| self.node(v).total() == 1 && self.node(v).level < self.levels);
        if let Some(v) = single {
            self.contract(v);
        }
    }

    /// Collapses the single-point chain below `id` into `id` itself.
    fn contract(&mut self, id: NodeId) {
        let mut chain = Vec::new();
        let mut cur = id;
        while !self.node(cur).is_leaf() {
            debug_assert_eq!(self.node(cur).children.len(), 1);
            cur = self.node(cur).children[0];
            chain.push(cur);
        }
        if chain.is_empty() {
            return;
        }
        let y = self.node(cur).point.clone().expect("leaf holds its point");
        for &c in chain.iter().rev() {
            self.free_node(c);
        }
        self.node_mut(id).point = Some(y);
    }

    fn sync_child_entry(&mut self, id: NodeId) {
        let node = self.node(id);
        let Some(p) = node.parent else { return };
        let c = node.counts;
        let weight = (c.gamma_b == 0 && c.gamma_a > 0).then_some(c.gamma_a);
        let sampler = &mut self.node_mut(p).child_sampler;
        let before = sampler.visits();
        sampler.set(id as u64, weight).expect("valid weight");
        let after = sampler.visits();
        self.pending_visits += after - before;
    }

    fn sync_tree_entry(&mut self, id: NodeId) {
        let node = self.node(id);
        let weight = (node.counts.gamma > 0).then(|| node.counts.gamma * self.side_of(node.level));
        self.tree_sampler.set(id as u64, weight).expect("valid weight");
    }

    fn set_gamma(&mut self, id: NodeId, gamma: u64) {
        self.pending_visits += 1;
        self.node_mut(id).counts.gamma = gamma;
        self.sync_tree_entry(id);
    }

    /// Length of the bottom segment of `path` whose cells hold no `B` point
    /// other than the one being inserted or deleted.
    fn b_exclusive_len(&self, path: &[NodeId]) -> usize {
        path.iter().rev().take_while(|&&v| self.node(v).counts.gamma_b == 1).count()
    }

    /// `A`-insertion or deletion: adjust the count at the lowest cell on the
    /// path that contains a `B` point.
    fn gamma_add_a(&mut self, path: &[NodeId], insert: bool) {
        let Some(&v) = path.iter().rev().find(|&&v| self.node(v).counts.gamma_b > 0) else {
            return;
        };
        let g = self.node(v).counts.gamma;
        let g = if insert { g + 1 } else { g.checked_sub(1).expect("matched count underflow") };
        self.set_gamma(v, g);
    }

    /// `B`-insertion: points in the newly `B`-occupied cells become matched
    /// at the lowest of them containing each point; they leave the ancestor
    /// that previously matched them.
    fn gamma_insert_b(&mut self, path: &[NodeId]) {
        let k = self.b_exclusive_len(path);
        if k == 0 {
            return;
        }
        let n = path.len();
        if k < n {
            let parent = path[n - 1 - k];
            let top_a = self.node(path[n - k]).counts.gamma_a;
            let g = self.node(parent).counts.gamma.checked_sub(top_a).expect("matched count underflow");
            self.set_gamma(parent, g);
        }
        let mut below = 0;
        for &v in path[n - k..].iter().rev() {
            let a = self.node(v).counts.gamma_a;
            self.set_gamma(v, a - below);
            below = a;
        }
    }

    /// `B`-deletion: points matched in cells that lose their only `B` point
    /// move up to the nearest ancestor that still has one.
    fn gamma_delete_b(&mut self, path: &[NodeId]) {
        let k = self.b_exclusive_len(path);
        if k == 0 {
            return;
        }
        let n = path.len();
        let mut moved = 0;
        for &v in &path[n - k..] {
            moved += self.node(v).counts.gamma;
            if self.node(v).counts.gamma != 0 {
                self.set_gamma(v, 0);
            }
        }
        if k < n {
            let parent = path[n - 1 - k];
            let g = self.node(parent).counts.gamma + moved;
            self.set_gamma(parent, g);
        }
    }

    /// The cell where `x` is matched and its side length.
    pub fn matched_node_of(&self, x: &Point) -> Result<(CellId, u64)> {
        if self.len(Side::B) == 0 {
            return Err(Error::Empty("B"));
        }
        if !self.contains(x, Side::A) {
            return Err(Error::Absent(Side::A));
        }
        let s = self.shifted(x);
        let path = self.path_of(&s);
        let v = *path
            .iter()
            .rev()
            .find(|&&v| self.node(v).counts.gamma_b > 0)
            .expect("root holds every B point");
        let level = self.node(v).level;
        Ok((CellId::of(&s, level, self.levels), self.side_of(level)))
    }

    /// Incremental counters of every node, keyed by hashed cell id.
    pub fn counters(&self) -> HashMap<CellKey, Counters> {
        self.nodes.iter().flatten().map(|n| (n.key, n.counts)).collect()
    }

    /// Counters recomputed from scratch from the stored point multisets.
    pub fn recompute_gammas_bruteforce(&self) -> HashMap<CellId, Counters> {
        let (a, b) = self.point_sets();
        recompute_counters(self.levels, &self.shift, &a, &b)
    }

    /// Compares incremental counters against [`Self::recompute_gammas_bruteforce`].
    pub fn check_against_bruteforce(&self) -> std::result::Result<(), String> {
        let brute = self.recompute_gammas_bruteforce();
        let inc = self.counters();
        if brute.len() != inc.len() {
            return Err(format!("node count {} differs from recomputed {}", inc.len(), brute.len()));
        }
        for (cell, want) in &brute {
            match inc.get(&cell.key()) {
                None => return Err(format!("cell {cell:?} missing")),
                Some(got) if got != want => {
                    return Err(format!("cell {cell:?}: incremental {got:?}, recomputed {want:?}"))
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    /// Checks the structural and sampler invariants of every node.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut gamma_sum = 0;
        let mut weight_sum = 0;
        for (id, node) in self.nodes.iter().enumerate() {
            let Some(node) = node else { continue };
            let c = node.counts;
            gamma_sum += c.gamma;
            weight_sum += c.gamma * self.side_of(node.level);
            if c.gamma > 0 && c.gamma_b == 0 {
                return Err(format!("node {id} matches points without holding B"));
            }
            let kids: Vec<&Node> = node.children.iter().map(|&k| self.node(k)).collect();
            if !kids.is_empty() {
                let sa: u64 = kids.iter().map(|k| k.counts.gamma_a).sum();
                let sb: u64 = kids.iter().map(|k| k.counts.gamma_b).sum();
                if (sa, sb) != (c.gamma_a, c.gamma_b) {
                    return Err(format!("node {id} counts disagree with children"));
                }
            }
            let occupied: u64 = kids.iter().filter(|k| k.counts.gamma_b > 0).map(|k| k.counts.gamma_a).sum();
            let want_gamma = if c.gamma_b > 0 { c.gamma_a - occupied } else { 0 };
            if c.gamma != want_gamma {
                return Err(format!("node {id} matched count {} != {want_gamma}", c.gamma));
            }
            let free: u64 = kids.iter().filter(|k| k.counts.gamma_b == 0).map(|k| k.counts.gamma_a).sum();
            if node.child_sampler.total_weight() != free || !node.child_sampler.check_consistency() {
                return Err(format!("node {id} child sampler out of sync"));
            }
            let entry = self.tree_sampler.weight(id as u64);
            let want_entry = (c.gamma > 0).then(|| c.gamma * self.side_of(node.level));
            if entry != want_entry {
                return Err(format!("node {id} tree sampler entry {entry:?} != {want_entry:?}"));
            }
        }
        if self.len(Side::B) > 0 && gamma_sum != self.len(Side::A) as u64 {
            return Err(format!("matched total {gamma_sum} != |A| = {}", self.len(Side::A)));
        }
        if self.tree_sampler.total_weight() != weight_sum || !self.tree_sampler.check_consistency() {
            return Err("tree sampler total out of sync".into());
        }
        Ok(())
    }

    /// Bumps the root's matched count without any bookkeeping.
    #[doc(hidden)]
    pub fn debug_corrupt_gamma(&mut self) {
        if let Some(r) = self.root {
            self.node_mut(r).counts.gamma += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn line_tree() -> DynQuadTree {
        let cfg = InstanceConfig::new(1, 8, 0).unwrap().with_shift(vec![0]).unwrap();
        DynQuadTree::new(cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap()
    }

    fn p(x: i64) -> Point {
        Point::from([x])
    }

    #[test]
    fn zero_shift_is_identity() {
        let t = line_tree();
        assert_eq!(t.shifted(&p(5)), vec![5]);
    }

    #[test]
    fn shift_is_seeded_and_in_range() {
        let cfg = InstanceConfig::new(6, 1 << 10, 3).unwrap();
        let t1 = DynQuadTree::new(cfg.clone(), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let t2 = DynQuadTree::new(cfg, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(t1.shift(), t2.shift());
        assert!(t1.shift().iter().all(|&z| (0..1 << 10).contains(&z)));
    }

    #[test]
    fn hand_simulated_updates() {
        let mut t = line_tree();
        t.insert(&p(1), Side::A).unwrap();
        t.insert(&p(5), Side::B).unwrap();
        assert_eq!(t.matched_node_of(&p(1)).unwrap(), (CellId { level: 1, coords: vec![0] }, 8));
        assert_eq!(t.total_gamma_weight(), 8);
        t.check_invariants().unwrap();

        let snapshot = t.counters();
        t.insert(&p(2), Side::B).unwrap();
        assert_eq!(t.matched_node_of(&p(1)).unwrap(), (CellId { level: 2, coords: vec![0] }, 4));
        assert_eq!(t.total_gamma_weight(), 4);
        t.check_invariants().unwrap();
        t.check_against_bruteforce().unwrap();

        t.delete(&p(2), Side::B).unwrap();
        assert_eq!(t.total_gamma_weight(), 8);
        assert_eq!(t.counters(), snapshot);

        t.delete(&p(1), Side::A).unwrap();
        assert_eq!(t.total_gamma_weight(), 0);
        assert!(t.tree_sampler().is_empty());
        t.check_invariants().unwrap();
    }

    #[test]
    fn coincident_points_match_at_bottom() {
        let mut t = line_tree();
        t.insert(&p(3), Side::B).unwrap();
        t.insert(&p(6), Side::B).unwrap();
        t.insert(&p(3), Side::A).unwrap();
        let (cell, side) = t.matched_node_of(&p(3)).unwrap();
        assert_eq!((cell.level, side), (4, 1));
        let before = t.total_gamma_weight();
        t.insert(&p(3), Side::A).unwrap();
        assert_eq!(t.total_gamma_weight(), before + 1);
        t.check_against_bruteforce().unwrap();
        t.check_invariants().unwrap();
    }

    #[test]
    fn matched_node_moves_up_when_b_leaves() {
        let mut t = line_tree();
        t.insert(&p(0), Side::A).unwrap();
        t.insert(&p(1), Side::B).unwrap();
        t.insert(&p(7), Side::B).unwrap();
        let (low, _) = t.matched_node_of(&p(0)).unwrap();
        t.delete(&p(1), Side::B).unwrap();
        let (high, _) = t.matched_node_of(&p(0)).unwrap();
        assert!(high.level < low.level);
    }

    #[test]
    fn errors() {
        let mut t = line_tree();
        assert_eq!(t.delete(&p(1), Side::A), Err(Error::Absent(Side::A)));
        assert!(matches!(t.insert(&p(8), Side::A), Err(Error::OutOfRange { .. })));
        t.insert(&p(1), Side::A).unwrap();
        assert_eq!(t.matched_node_of(&p(1)), Err(Error::Empty("B")));
        assert_eq!(t.delete(&p(1), Side::B), Err(Error::Absent(Side::B)));
        t.insert(&p(2), Side::B).unwrap();
        assert_eq!(t.matched_node_of(&p(2)), Err(Error::Absent(Side::A)));
    }

    #[test]
    fn b_empty_means_no_matches() {
        let mut t = line_tree();
        t.insert(&p(4), Side::A).unwrap();
        assert!(t.counters().values().all(|c| c.gamma == 0));
        assert!(t.recompute_gammas_bruteforce().values().all(|c| c.gamma == 0));
        t.check_against_bruteforce().unwrap();
    }

    #[test]
    fn random_trace_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let cfg = InstanceConfig::new(2, 16, 1).unwrap();
        let mut t = DynQuadTree::new(cfg, &mut rng).unwrap();
        let mut live: Vec<(Point, Side)> = Vec::new();
        for _ in 0..600 {
            if live.is_empty() || rng.random_bool(0.55) {
                let x = Point::new(vec![rng.random_range(0..16), rng.random_range(0..16)]);
                let side = if rng.random_bool(0.5) { Side::A } else { Side::B };
                t.insert(&x, side).unwrap();
                live.push((x, side));
            } else {
                let (x, side) = live.swap_remove(rng.random_range(0..live.len()));
                t.delete(&x, side).unwrap();
            }
            t.check_against_bruteforce().unwrap();
            t.check_invariants().unwrap();
        }
        while let Some((x, side)) = live.pop() {
            t.delete(&x, side).unwrap();
        }
        assert_eq!(t.node_count(), 0);
    }

    #[test]
    fn corruption_is_detected() {
        let mut t = line_tree();
        t.insert(&p(1), Side::A).unwrap();
        t.insert(&p(5), Side::B).unwrap();
        t.debug_corrupt_gamma();
        assert!(t.check_against_bruteforce().is_err());
    }
}
