//! Dynamic weighted sampler backed by an implicit sum tree.
//!
//! Elements occupy dense leaf slots `0..n`; level `j` of the tree stores the
//! sums of consecutive blocks of `2^j` leaves, so every internal entry is the
//! sum of its two children. Removal swaps the last slot into the hole, which
//! keeps the tree complete and its height at `ceil(log2 n) + 1` levels.

use std::collections::HashMap;
use std::fmt::Debug;
use std::ops::{Add, Sub};
use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;

use crate::error::{Error, Result};

/// A sampler weight. Integer weights give exact sum caches.
pub trait Weight: Copy + PartialOrd + Debug + Add<Output = Self> + Sub<Output = Self> {
    const ZERO: Self;

    /// A uniform draw from `[0, total)`.
    fn draw<R: Rng + ?Sized>(rng: &mut R, total: Self) -> Self;

    fn is_valid(self) -> bool;
}

impl Weight for u64 {
    const ZERO: Self = 0;

    fn draw<R: Rng + ?Sized>(rng: &mut R, total: Self) -> Self {
        rng.random_range(0..total)
    }

    fn is_valid(self) -> bool {
        true
    }
}

impl Weight for f64 {
    const ZERO: Self = 0.0;

    fn draw<R: Rng + ?Sized>(rng: &mut R, total: Self) -> Self {
        rng.random::<f64>() * total
    }

    fn is_valid(self) -> bool {
        self.is_finite() && self >= 0.0
    }
}

#[derive(Debug)]
pub struct WeightedSampler<W: Weight = u64> {
    /// `levels[0]` holds leaf weights; the last level has a single root entry.
    levels: Vec<Vec<W>>,
    keys: Vec<u64>,
    slots: HashMap<u64, usize>,
    visits: AtomicU64,
}

impl<W: Weight> Clone for WeightedSampler<W> {
    fn clone(&self) -> Self {
        WeightedSampler {
            levels: self.levels.clone(),
            keys: self.keys.clone(),
            slots: self.slots.clone(),
            visits: AtomicU64::new(self.visits.load(Ordering::Relaxed)),
        }
    }
}

impl<W: Weight> Default for WeightedSampler<W> {
    fn default() -> Self {
        Self::new()
    }
}

impl<W: Weight> WeightedSampler<W> {
    pub fn new() -> Self {
        WeightedSampler {
            levels: vec![Vec::new()],
            keys: Vec::new(),
            slots: HashMap::new(),
            visits: AtomicU64::new(0),
        }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn contains(&self, key: u64) -> bool {
        self.slots.contains_key(&key)
    }

    pub fn weight(&self, key: u64) -> Option<W> {
        self.slots.get(&key).map(|&s| self.levels[0][s])
    }

    pub fn total_weight(&self) -> W {
        self.levels.last().and_then(|top| top.first().copied()).unwrap_or(W::ZERO)
    }

    /// `(key, weight)` pairs in slot order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, W)> + '_ {
        self.keys.iter().copied().zip(self.levels[0].iter().copied())
    }

    /// Cumulative count of tree entries touched by all operations so far.
    pub fn visits(&self) -> u64 {
        self.visits.load(Ordering::Relaxed)
    }

    pub fn insert(&mut self, key: u64, weight: W) -> Result<()> {
        check_weight(weight)?;
        if self.slots.contains_key(&key) {
            return Err(Error::DuplicateKey(key));
        }
        let slot = self.keys.len();
        self.keys.push(key);
        self.slots.insert(key, slot);
        self.levels[0].push(weight);
        self.resize();
        self.fix_path(slot);
        Ok(())
    }

    pub fn remove(&mut self, key: u64) -> Result<W> {
        let slot = self.slots.remove(&key).ok_or(Error::MissingKey(key))?;
        let weight = self.levels[0][slot];
        let last = self.keys.len() - 1;
        if slot != last {
            let moved = self.keys[last];
            self.keys[slot] = moved;
            self.levels[0][slot] = self.levels[0][last];
            self.slots.insert(moved, slot);
            self.fix_path(slot);
        }
        self.keys.pop();
        self.levels[0].pop();
        self.resize();
        self.fix_path(last);
        Ok(weight)
    }

    pub fn reweight(&mut self, key: u64, weight: W) -> Result<()> {
        check_weight(weight)?;
        let slot = *self.slots.get(&key).ok_or(Error::MissingKey(key))?;
        self.levels[0][slot] = weight;
        self.fix_path(slot);
        Ok(())
    }

    /// Inserts, reweights, or removes `key` so that it is present exactly
    /// when `weight` is `Some`.
    pub fn set(&mut self, key: u64, weight: Option<W>) -> Result<()> {
        match (weight, self.contains(key)) {
            (Some(w), true) => self.reweight(key, w),
            (Some(w), false) => self.insert(key, w),
            (None, true) => self.remove(key).map(|_| ()),
            (None, false) => Ok(()),
        }
    }

    /// Draws a key with probability proportional to its weight.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<u64> {
        let total = self.total_weight();
        if total.partial_cmp(&W::ZERO) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::ZeroWeight);
        }
        let mut r = W::draw(rng, total);
        let mut idx = 0usize;
        let mut touched = 0u64;
        for j in (1..self.levels.len()).rev() {
            let below = &self.levels[j - 1];
            let left = below[2 * idx];
            let right = below.get(2 * idx + 1).copied();
            touched += 2;
            // A draw equal to the left sum descends right.
            if r < left {
                idx *= 2;
            } else {
                match right {
                    Some(w) if w > W::ZERO => {
                        r = r - left;
                        idx = 2 * idx + 1;
                    }
                    // Only reachable through float rounding at the right edge.
                    _ => idx *= 2,
                }
            }
        }
        self.visits.fetch_add(touched, Ordering::Relaxed);
        Ok(self.keys[idx])
    }

    /// Recomputes every internal entry from its children and reports whether
    /// the cache matches.
    pub fn check_consistency(&self) -> bool {
        for j in 1..self.levels.len() {
            let below = &self.levels[j - 1];
            let expected_len = below.len().div_ceil(2).max(1);
            if self.levels[j].len() != expected_len {
                return false;
            }
            for (i, &v) in self.levels[j].iter().enumerate() {
                if v != child_sum(below, i) {
                    return false;
                }
            }
        }
        self.keys.len() == self.levels[0].len()
            && self.slots.len() == self.keys.len()
            && self.slots.iter().all(|(k, &s)| self.keys[s] == *k)
    }

    /// Matches the number and lengths of levels to the current leaf count.
    fn resize(&mut self) {
        let n = self.levels[0].len();
        let height = if n <= 1 { 1 } else { (n - 1).ilog2() as usize + 2 };
        self.levels.truncate(height);
        while self.levels.len() < height {
            self.levels.push(Vec::new());
        }
        for j in 1..height {
            let want = ((n + (1 << j) - 1) >> j).max(1);
            self.levels[j].resize(want, W::ZERO);
        }
    }

    fn fix_path(&mut self, slot: usize) {
        let mut touched = 1u64;
        for j in 1..self.levels.len() {
            let i = slot >> j;
            if i >= self.levels[j].len() {
                continue;
            }
            let s = child_sum(&self.levels[j - 1], i);
            self.levels[j][i] = s;
            touched += 1;
        }
        self.visits.fetch_add(touched, Ordering::Relaxed);
    }
}

fn child_sum<W: Weight>(below: &[W], i: usize) -> W {
    let l = below.get(2 * i).copied().unwrap_or(W::ZERO);
    let r = below.get(2 * i + 1).copied().unwrap_or(W::ZERO);
    l + r
}

fn check_weight<W: Weight>(w: W) -> Result<()> {
    if w.is_valid() {
        Ok(())
    } else {
        Err(Error::InvalidParam(format!("weight {w:?} is not a finite nonnegative number")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn freqs(s: &WeightedSampler, keys: &[u64], n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![0usize; keys.len()];
        for _ in 0..n {
            let k = s.sample(&mut rng).unwrap();
            counts[keys.iter().position(|&x| x == k).unwrap()] += 1;
        }
        counts.into_iter().map(|c| c as f64 / n as f64).collect()
    }

    #[test]
    fn zero_weight_never_sampled() {
        let mut s = WeightedSampler::<u64>::new();
        s.insert(7, 0).unwrap();
        s.insert(8, 2).unwrap();
        s.insert(9, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            assert_eq!(s.sample(&mut rng).unwrap(), 8);
        }
    }

    #[test]
    fn totals_and_errors() {
        let mut s = WeightedSampler::<u64>::new();
        assert_eq!(s.total_weight(), 0);
        for k in 0..3 {
            s.insert(k, 1).unwrap();
        }
        assert_eq!(s.total_weight(), 3);
        assert_eq!(s.insert(1, 4), Err(Error::DuplicateKey(1)));
        assert_eq!(s.remove(42), Err(Error::MissingKey(42)));
        assert_eq!(s.reweight(42, 1), Err(Error::MissingKey(42)));
        let mut t = WeightedSampler::<u64>::new();
        t.insert(1, 5).unwrap();
        t.remove(1).unwrap();
        assert_eq!(t.total_weight(), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(t.sample(&mut rng), Err(Error::ZeroWeight));
        t.insert(2, 0).unwrap();
        assert_eq!(t.sample(&mut rng), Err(Error::ZeroWeight));
    }

    #[test]
    fn two_element_law() {
        let mut s = WeightedSampler::<u64>::new();
        s.insert(0, 1).unwrap();
        s.insert(1, 3).unwrap();
        let f = freqs(&s, &[0, 1], 100_000, 3);
        assert!((f[1] - 0.75).abs() < 0.01, "{f:?}");
        s.remove(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!((0..500).all(|_| s.sample(&mut rng).unwrap() == 0));
    }

    #[test]
    fn reweight_law() {
        let mut s = WeightedSampler::<u64>::new();
        s.insert(0, 1).unwrap();
        s.insert(1, 1).unwrap();
        s.reweight(0, 3).unwrap();
        let f = freqs(&s, &[0, 1], 100_000, 5);
        assert!((f[0] - 0.75).abs() < 0.01, "{f:?}");
        s.reweight(0, 3).unwrap();
        assert_eq!(s.total_weight(), 4);
        s.reweight(0, 0).unwrap();
        assert!(s.contains(0));
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        assert!((0..500).all(|_| s.sample(&mut rng).unwrap() == 1));
    }

    #[test]
    fn three_element_frequencies() {
        let mut s = WeightedSampler::<u64>::new();
        s.insert(10, 1).unwrap();
        s.insert(11, 1).unwrap();
        s.insert(12, 2).unwrap();
        let f = freqs(&s, &[10, 11, 12], 100_000, 7);
        for (got, want) in f.iter().zip([0.25, 0.25, 0.5]) {
            assert!((got - want).abs() < 0.01, "{f:?}");
        }
    }

    #[test]
    fn single_element_and_determinism() {
        let mut s = WeightedSampler::<u64>::new();
        s.insert(99, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!((0..100).all(|_| s.sample(&mut rng).unwrap() == 99));
        for k in 0..50 {
            s.insert(k, k + 1).unwrap();
        }
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..200).map(|_| s.sample(&mut rng).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
    }

    #[test]
    fn tie_descends_right() {
        // Draws are uniform on [0, 2); a draw of exactly 1 lands on the right key.
        let mut s = WeightedSampler::<f64>::new();
        s.insert(0, 1.0).unwrap();
        s.insert(1, 1.0).unwrap();
        struct Fixed;
        impl rand::RngCore for Fixed {
            fn next_u32(&mut self) -> u32 {
                0
            }
            fn next_u64(&mut self) -> u64 {
                // Standard f64 sampling uses the top 53 bits: this yields 0.5.
                1 << 63
            }
            fn fill_bytes(&mut self, _: &mut [u8]) {}
        }
        assert_eq!(s.sample(&mut Fixed).unwrap(), 1);
    }

    #[test]
    fn random_ops_keep_sums_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut s = WeightedSampler::<u64>::new();
        let mut shadow: HashMap<u64, u64> = HashMap::new();
        for _ in 0..1000 {
            let key = rng.random_range(0..64u64);
            let w = rng.random_range(0..100u64);
            match rng.random_range(0..3) {
                0 => {
                    let r = s.insert(key, w);
                    assert_eq!(r.is_ok(), !shadow.contains_key(&key));
                    shadow.entry(key).or_insert(w);
                }
                1 => {
                    assert_eq!(s.remove(key).ok(), shadow.remove(&key));
                }
                _ => {
                    if shadow.contains_key(&key) {
                        s.reweight(key, w).unwrap();
                        shadow.insert(key, w);
                    }
                }
            }
            assert_eq!(s.total_weight(), shadow.values().sum::<u64>());
            assert!(s.check_consistency());
        }
    }

    #[test]
    fn real_weights_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut s = WeightedSampler::<f64>::new();
        for k in 0..200u64 {
            s.insert(k, rng.random::<f64>()).unwrap();
        }
        for k in (0..200u64).step_by(3) {
            s.remove(k).unwrap();
        }
        let sum: f64 = s.iter().map(|(_, w)| w).sum();
        assert!((s.total_weight() - sum).abs() <= 1e-9 * sum);
        assert!(s.check_consistency());
        assert!(s.insert(1000, f64::NAN).is_err());
        assert!(s.insert(1000, -1.0).is_err());
    }
}
