/// A grid cell: `coords[i] = floor(shifted[i] / side(level))`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellId {
    pub level: u32,
    pub coords: Vec<i64>,
}

/// Compact hashed form of a [`CellId`], used as the node-map key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellKey {
    pub level: u32,
    pub hash: u128,
}

impl CellId {
    /// The cell at `level` containing the shifted point.
    pub fn of(shifted: &[i64], level: u32, levels: u32) -> Self {
        let k = levels - level;
        CellId { level, coords: shifted.iter().map(|&c| c >> k).collect() }
    }

    pub fn parent(&self) -> Option<CellId> {
        (self.level > 0).then(|| CellId {
            level: self.level - 1,
            coords: self.coords.iter().map(|&c| c >> 1).collect(),
        })
    }

    /// Side length `2U / 2^level` for a tree with `levels` levels.
    pub fn side(&self, levels: u32) -> u64 {
        1 << (levels - self.level)
    }

    pub fn key(&self) -> CellKey {
        hash_coords(self.level, self.coords.iter().copied())
    }
}

#[inline]
pub(crate) fn cell_key(shifted: &[i64], level: u32, levels: u32) -> CellKey {
    let k = levels - level;
    hash_coords(level, shifted.iter().map(|&c| c >> k))
}

#[inline]
fn fmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn hash_coords(level: u32, coords: impl Iterator<Item = i64>) -> CellKey {
    let mut h1: u64 = 0x243f_6a88_85a3_08d3 ^ level as u64;
    let mut h2: u64 = 0x1319_8a2e_0370_7344 ^ ((level as u64) << 32);
    let mut len = 0u64;
    for c in coords {
        let v = c as u64;
        h1 = fmix64(h1.rotate_left(23) ^ v);
        h2 = fmix64(h2.wrapping_add(v).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ len);
        len += 1;
    }
    h1 = fmix64(h1 ^ len);
    h2 = fmix64(h2 ^ h1.rotate_left(17));
    CellKey { level, hash: ((h1 as u128) << 64) | h2 as u128 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_and_bottom_sides() {
        // U = 8: four levels below the root.
        let root = CellId::of(&[13], 0, 4);
        assert_eq!(root.coords, vec![0]);
        assert_eq!(root.side(4), 16);
        let bottom = CellId::of(&[13], 4, 4);
        assert_eq!(bottom.coords, vec![13]);
        assert_eq!(bottom.side(4), 1);
    }

    #[test]
    fn parent_halves_coords() {
        let c = CellId::of(&[13, 6], 3, 4);
        assert_eq!(c.coords, vec![6, 3]);
        assert_eq!(c.parent().unwrap(), CellId::of(&[13, 6], 2, 4));
        assert!(CellId::of(&[1], 0, 4).parent().is_none());
    }

    #[test]
    fn key_matches_fast_path() {
        let s = [5, 1023, 77];
        for level in 0..=10 {
            assert_eq!(CellId::of(&s, level, 10).key(), cell_key(&s, level, 10));
        }
        assert_ne!(cell_key(&[1, 2], 3, 4), cell_key(&[2, 1], 3, 4));
        assert_ne!(cell_key(&[0], 1, 4), cell_key(&[0], 2, 4));
    }
}
