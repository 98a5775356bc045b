//! Exact angular order of points around a center and semicircle counts.
//!
//! Directions are compared with exact orientation predicates, so collinear
//! and antipodal configurations are classified without tolerance.

use std::cmp::Ordering;
use std::f64::consts::{PI, TAU};

use crate::geom::{coord, Point2};

/// Gap in `atan2` keys under which neighbours are re-ordered exactly.
const KEY_TIE: f64 = 1e-9;

/// Points sharing one exact direction from the center.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Block {
    /// Index of one point of the block, in the caller's indexing.
    pub rep: usize,
    /// Smallest caller index in the block.
    pub min_index: usize,
    pub size: usize,
    /// Points strictly counterclockwise within half a turn.
    pub open: usize,
    /// Points in exactly the opposite direction.
    pub antipodal: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct AngularSweep {
    /// Points equal to the center.
    pub coincident: usize,
    pub blocks: Vec<Block>,
}

fn upper_half(dx: f64, dy: f64) -> bool {
    dy > 0.0 || (dy == 0.0 && dx > 0.0)
}

fn angle_key(center: Point2, p: Point2) -> f64 {
    let dx = p.x - center.x;
    let dy = p.y - center.y;
    let a = dy.atan2(dx);
    if upper_half(dx, dy) {
        a.max(0.0)
    } else if dy == 0.0 {
        PI
    } else {
        a + TAU
    }
}

fn orient(center: Point2, a: Point2, b: Point2) -> f64 {
    robust::orient2d(coord(center), coord(a), coord(b))
}

fn exact_cmp(center: Point2, a: Point2, b: Point2) -> Ordering {
    let ha = upper_half(a.x - center.x, a.y - center.y);
    let hb = upper_half(b.x - center.x, b.y - center.y);
    match (ha, hb) {
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        _ => {
            let o = orient(center, a, b);
            if o > 0.0 {
                Ordering::Less
            } else if o < 0.0 {
                Ordering::Greater
            } else {
                Ordering::Equal
            }
        }
    }
}

impl AngularSweep {
    /// Sweeps `points[i]` for `i` in `indices` around `center`.
    pub fn new(center: Point2, points: &[Point2], indices: impl Iterator<Item = usize>) -> Self {
        let mut coincident = 0;
        let mut keyed: Vec<(f64, usize)> = Vec::new();
        for i in indices {
            let p = points[i];
            if p == center {
                coincident += 1;
            } else {
                keyed.push((angle_key(center, p), i));
            }
        }
        keyed.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        // Near-ties in the floating keys are settled by exact orientation.
        let mut start = 0;
        while start < keyed.len() {
            let mut end = start + 1;
            while end < keyed.len() && keyed[end].0 - keyed[end - 1].0 <= KEY_TIE {
                end += 1;
            }
            if end - start > 1 {
                keyed[start..end].sort_by(|a, b| exact_cmp(center, points[a.1], points[b.1]).then(a.1.cmp(&b.1)));
            }
            start = end;
        }
        let order: Vec<usize> = keyed.into_iter().map(|(_, i)| i).collect();

        let mut blocks: Vec<Block> = Vec::new();
        let mut starts: Vec<usize> = Vec::new();
        for (pos, &i) in order.iter().enumerate() {
            match blocks.last_mut() {
                Some(b) if exact_cmp(center, points[b.rep], points[i]) == Ordering::Equal => {
                    b.size += 1;
                    b.min_index = b.min_index.min(i);
                }
                _ => {
                    starts.push(pos);
                    blocks.push(Block {
                        rep: i,
                        min_index: i,
                        size: 1,
                        open: 0,
                        antipodal: 0,
                    });
                }
            }
        }

        // The end of each open half-turn only moves forward as the blocks
        // rotate, so one pointer serves all of them.
        let m = order.len();
        let mut end = 0;
        for (b, &s) in blocks.iter_mut().zip(&starts) {
            let first = s + b.size;
            let limit = s + m;
            let rep = points[b.rep];
            end = end.max(first);
            while end < limit && orient(center, rep, points[order[end % m]]) > 0.0 {
                end += 1;
            }
            let mut anti = end;
            while anti < limit && orient(center, rep, points[order[anti % m]]) == 0.0 {
                anti += 1;
            }
            b.open = end - first;
            b.antipodal = anti - end;
        }

        AngularSweep { coincident, blocks }
    }

    /// Smallest number of points in a closed halfplane whose boundary passes
    /// through the center.
    pub fn min_closed_count(&self) -> usize {
        self.coincident
            + self
                .blocks
                .iter()
                .map(|b| b.open + b.antipodal)
                .min()
                .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_and_counts_on_a_cross() {
        // center at origin, points on both axes, one duplicate direction
        let pts = vec![
            Point2::new(1.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(-1.0, 0.0),
            Point2::new(0.0, -3.0),
            Point2::new(0.0, 0.0),
        ];
        let s = AngularSweep::new(Point2::new(0.0, 0.0), &pts, 0..pts.len());
        assert_eq!(s.coincident, 1);
        assert_eq!(s.blocks.len(), 4);
        let east = &s.blocks[0];
        assert_eq!(east.size, 2);
        assert_eq!(east.min_index, 0);
        assert_eq!(east.open, 1);
        assert_eq!(east.antipodal, 1);
        // closed halfplane {x <= 0}-side counts: min is 1 (+1 coincident)
        assert_eq!(s.min_closed_count(), 3);
    }

    #[test]
    fn near_vertical_keys_are_ordered_exactly() {
        let c = Point2::new(0.1, 0.7);
        let pts = vec![
            Point2::new(0.1, 1.7),
            Point2::new(0.1 + 1e-17, 5.0),
            Point2::new(0.1 - 1e-16, 2.0),
            Point2::new(0.1, -2.0),
        ];
        let s = AngularSweep::new(c, &pts, 0..pts.len());
        let total: usize = s.blocks.iter().map(|b| b.size).sum();
        assert_eq!(total, 4);
        for b in &s.blocks {
            assert!(b.open + b.antipodal + b.size <= 4);
        }
    }
}
