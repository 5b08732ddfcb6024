use indexmap::IndexMap;

use super::NnOracle;
use crate::error::{Error, Result};
use crate::geometry::{l1_unchecked, Point, Side};

/// Exact oracle by linear scan over the distinct points of `B`.
#[derive(Debug, Clone, Default)]
pub struct ScanOracle {
    points: IndexMap<Point, u32>,
    len: usize,
}

impl ScanOracle {
    pub fn new() -> Self {
        Self::default()
    }
}

impl NnOracle for ScanOracle {
    fn insert(&mut self, b: &Point) -> Result<()> {
        *self.points.entry(b.clone()).or_default() += 1;
        self.len += 1;
        Ok(())
    }

    fn delete(&mut self, b: &Point) -> Result<()> {
        let count = self.points.get_mut(b).ok_or(Error::Absent(Side::B))?;
        *count -= 1;
        if *count == 0 {
            self.points.swap_remove(b);
        }
        self.len -= 1;
        Ok(())
    }

    fn value(&self, a: &Point) -> Result<f64> {
        self.points
            .keys()
            .map(|b| l1_unchecked(a.coords(), b.coords()))
            .min()
            .map(|d| d as f64)
            .ok_or(Error::Empty("B"))
    }

    fn len(&self) -> usize {
        self.len
    }
}
