//! Comparison algorithms: exact maintenance of every `dist(a, B)`
//! ("Benchmark") and uniform sampling over `A` ("Uniform").

use std::collections::{HashMap, HashSet};

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{l1_unchecked, Point, Side, UpdateEvent, UpdateOp};
use crate::nn::{NnOracle, OracleKind};

#[derive(Debug, Clone)]
struct Entry {
    point: Point,
    /// Current nearest point of `B` and its distance; `None` while `B` is empty.
    nearest: Option<(Point, u64)>,
}

/// Exact Chamfer distance maintained under updates.
///
/// A `B`-insertion scans all of `A`; a `B`-deletion rescans `B` only for the
/// points whose recorded nearest neighbour was removed.
#[derive(Debug, Clone, Default)]
pub struct Benchmark {
    entries: Vec<Option<Entry>>,
    free: Vec<usize>,
    a_index: HashMap<Point, Vec<usize>>,
    b: IndexMap<Point, u64>,
    b_len: usize,
    by_nearest: HashMap<Point, HashSet<usize>>,
    total: u64,
    rescans: u64,
}

impl Benchmark {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self, side: Side) -> usize {
        match side {
            Side::A => self.entries.len() - self.free.len(),
            Side::B => self.b_len,
        }
    }

    /// Exact Chamfer distance of the current sets.
    pub fn total(&self) -> Result<u64> {
        if self.b_len == 0 {
            return Err(Error::Empty("B"));
        }
        Ok(self.total)
    }

    /// Number of single-point rescans of `B` so far.
    pub fn rescans(&self) -> u64 {
        self.rescans
    }

    /// Recorded `dist(a, B)` for every point of `A`.
    pub fn distances(&self) -> Vec<(Point, Option<u64>)> {
        self.entries.iter().flatten().map(|e| (e.point.clone(), e.nearest.as_ref().map(|n| n.1))).collect()
    }

    pub fn apply(&mut self, ev: &UpdateEvent) -> Result<()> {
        match (ev.side, ev.op) {
            (Side::A, UpdateOp::Insert) => self.insert_a(&ev.point),
            (Side::A, UpdateOp::Delete) => self.delete_a(&ev.point)?,
            (Side::B, UpdateOp::Insert) => self.insert_b(&ev.point),
            (Side::B, UpdateOp::Delete) => self.delete_b(&ev.point)?,
        }
        Ok(())
    }

    fn scan(&mut self, a: &Point) -> Option<(Point, u64)> {
        self.rescans += 1;
        self.b
            .keys()
            .map(|b| (b, l1_unchecked(a.coords(), b.coords())))
            .min_by_key(|&(_, d)| d)
            .map(|(b, d)| (b.clone(), d))
    }

    fn link(&mut self, id: usize, nearest: Option<(Point, u64)>) {
        if let Some((b, d)) = &nearest {
            self.by_nearest.entry(b.clone()).or_default().insert(id);
            self.total += d;
        }
        self.entries[id].as_mut().expect("live entry").nearest = nearest;
    }

    fn unlink(&mut self, id: usize) {
        let entry = self.entries[id].as_mut().expect("live entry");
        if let Some((b, d)) = entry.nearest.take() {
            self.total -= d;
            if let Some(set) = self.by_nearest.get_mut(&b) {
                set.remove(&id);
                if set.is_empty() {
                    self.by_nearest.remove(&b);
                }
            }
        }
    }

    fn insert_a(&mut self, a: &Point) {
        let entry = Entry { point: a.clone(), nearest: None };
        let id = match self.free.pop() {
            Some(id) => {
                self.entries[id] = Some(entry);
                id
            }
            None => {
                self.entries.push(Some(entry));
                self.entries.len() - 1
            }
        };
        self.a_index.entry(a.clone()).or_default().push(id);
        let nearest = self.scan(a);
        self.link(id, nearest);
    }

    fn delete_a(&mut self, a: &Point) -> Result<()> {
        let ids = self.a_index.get_mut(a).ok_or(Error::Absent(Side::A))?;
        let id = ids.pop().expect("index lists are nonempty");
        if ids.is_empty() {
            self.a_index.remove(a);
        }
        self.unlink(id);
        self.entries[id] = None;
        self.free.push(id);
        Ok(())
    }

    fn insert_b(&mut self, b: &Point) {
        self.b_len += 1;
        let count = self.b.entry(b.clone()).or_default();
        *count += 1;
        if *count > 1 {
            return;
        }
        for id in 0..self.entries.len() {
            let Some(e) = &self.entries[id] else { continue };
            let d = l1_unchecked(e.point.coords(), b.coords());
            if e.nearest.as_ref().is_none_or(|n| d < n.1) {
                self.unlink(id);
                self.link(id, Some((b.clone(), d)));
            }
        }
    }

    fn delete_b(&mut self, b: &Point) -> Result<()> {
        let count = self.b.get_mut(b).ok_or(Error::Absent(Side::B))?;
        *count -= 1;
        self.b_len -= 1;
        if *count > 0 {
            return Ok(());
        }
        self.b.swap_remove(b);
        let affected = self.by_nearest.remove(b).unwrap_or_default();
        for id in affected {
            let entry = self.entries[id].as_mut().expect("live entry");
            let (_, d) = entry.nearest.take().expect("affected entries have a neighbour");
            self.total -= d;
            let point = entry.point.clone();
            let nearest = self.scan(&point);
            self.link(id, nearest);
        }
        Ok(())
    }
}

/// `|A| * mean(nn(a))` over `m` points drawn uniformly from `A`.
pub fn uniform_query<R: Rng + ?Sized>(a: &[Point], m: usize, oracle: &dyn NnOracle, rng: &mut R) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::Empty("A"));
    }
    if oracle.is_empty() {
        return Err(Error::Empty("B"));
    }
    if m == 0 {
        return Err(Error::InvalidParam("sample count must be at least 1".into()));
    }
    let mut sum = 0.0;
    for _ in 0..m {
        sum += oracle.value(&a[rng.random_range(0..a.len())])?;
    }
    Ok(a.len() as f64 * sum / m as f64)
}

/// Uniform-sampling estimator with its own copy of `A` and oracle over `B`.
#[derive(Debug)]
pub struct UniformEstimator {
    a: Vec<Point>,
    positions: HashMap<Point, Vec<usize>>,
    oracle: Box<dyn NnOracle>,
    rng: ChaCha8Rng,
}

impl UniformEstimator {
    pub fn new(dim: usize, oracle: OracleKind, seed: u64) -> Self {
        UniformEstimator {
            a: Vec::new(),
            positions: HashMap::new(),
            oracle: oracle.build(dim),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn len(&self, side: Side) -> usize {
        match side {
            Side::A => self.a.len(),
            Side::B => self.oracle.len(),
        }
    }

    pub fn apply(&mut self, ev: &UpdateEvent) -> Result<()> {
        match (ev.side, ev.op) {
            (Side::B, UpdateOp::Insert) => self.oracle.insert(&ev.point)?,
            (Side::B, UpdateOp::Delete) => self.oracle.delete(&ev.point)?,
            (Side::A, UpdateOp::Insert) => {
                self.positions.entry(ev.point.clone()).or_default().push(self.a.len());
                self.a.push(ev.point.clone());
            }
            (Side::A, UpdateOp::Delete) => {
                let slots = self.positions.get_mut(&ev.point).ok_or(Error::Absent(Side::A))?;
                let pos = slots.pop().expect("position lists are nonempty");
                if slots.is_empty() {
                    self.positions.remove(&ev.point);
                }
                let last = self.a.len() - 1;
                self.a.swap_remove(pos);
                if pos != last {
                    let moved = &self.a[pos];
                    let slots = self.positions.get_mut(moved).expect("moved point indexed");
                    *slots.iter_mut().find(|s| **s == last).expect("last slot indexed") = pos;
                }
            }
        }
        Ok(())
    }

    pub fn query(&mut self, m: usize) -> Result<f64> {
        uniform_query(&self.a, m, self.oracle.as_ref(), &mut self.rng)
    }
}
