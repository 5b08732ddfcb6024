//! Recomputes every node counter from raw point multisets and the shift,
//! without touching incremental state.

use std::collections::HashMap;

use super::cell::CellId;
use super::Counters;
use crate::geometry::Point;

fn shifted(p: &Point, shift: &[i64]) -> Vec<i64> {
    p.coords().iter().zip(shift).map(|(c, z)| c + z).collect()
}

/// Counters of every cell that is a node of the tree over `a` and `b`.
///
/// A cell is a node when it is nonempty and is the root or its parent holds at
/// least two points. Each `a` is matched at the lowest cell on its path that
/// contains a point of `b`.
pub fn recompute(levels: u32, shift: &[i64], a: &[Point], b: &[Point]) -> HashMap<CellId, Counters> {
    let mut cells: HashMap<CellId, Counters> = HashMap::new();
    for (set, is_a) in [(a, true), (b, false)] {
        for p in set {
            let s = shifted(p, shift);
            for level in 0..=levels {
                let c = cells.entry(CellId::of(&s, level, levels)).or_default();
                if is_a {
                    c.gamma_a += 1;
                } else {
                    c.gamma_b += 1;
                }
            }
        }
    }
    if !b.is_empty() {
        for p in a {
            let s = shifted(p, shift);
            let matched = (0..=levels)
                .rev()
                .map(|level| CellId::of(&s, level, levels))
                .find(|c| cells[c].gamma_b > 0)
                .expect("root contains every point of B");
            cells.get_mut(&matched).unwrap().gamma += 1;
        }
    }
    let is_node = |c: &CellId| match c.parent() {
        None => true,
        Some(p) => {
            let pc = &cells[&p];
            pc.gamma_a + pc.gamma_b >= 2
        }
    };
    cells.iter().filter(|(c, _)| is_node(c)).map(|(c, v)| (c.clone(), *v)).collect()
}
