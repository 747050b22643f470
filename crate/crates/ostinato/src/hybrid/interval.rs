//! Intervals with open/closed endpoints and sparse axis-aligned boxes.
//!
//! Used for exact reasoning about predicate cells and guard intersections
//! when everything in sight is single-coordinate affine.

use std::collections::BTreeMap;
use std::fmt;

/// A real interval with independently open or closed endpoints.
/// Unbounded sides use `f64::{NEG_,}INFINITY` and are always open.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn full() -> Self {
        Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY, lo_closed: false, hi_closed: false }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v, lo_closed: true, hi_closed: true }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, lo_closed: true, hi_closed: true }
    }

    /// Half-line `x >= b` (closed) or `x > b` (open).
    pub fn at_least(b: f64, closed: bool) -> Self {
        Interval { lo: b, hi: f64::INFINITY, lo_closed: closed, hi_closed: false }
    }

    /// Half-line `x <= b` (closed) or `x < b` (open).
    pub fn at_most(b: f64, closed: bool) -> Self {
        Interval { lo: f64::NEG_INFINITY, hi: b, lo_closed: false, hi_closed: closed }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn contains(&self, v: f64) -> bool {
        let above = v > self.lo || (v == self.lo && self.lo_closed);
        let below = v < self.hi || (v == self.hi && self.hi_closed);
        above && below
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        let (lo, lo_closed) = if self.lo > other.lo {
            (self.lo, self.lo_closed)
        } else if self.lo < other.lo {
            (other.lo, other.lo_closed)
        } else {
            (self.lo, self.lo_closed && other.lo_closed)
        };
        let (hi, hi_closed) = if self.hi < other.hi {
            (self.hi, self.hi_closed)
        } else if self.hi > other.hi {
            (other.hi, other.hi_closed)
        } else {
            (self.hi, self.hi_closed && other.hi_closed)
        };
        Interval { lo, hi, lo_closed, hi_closed }
    }

    /// Do the closures of the two intervals intersect? This is the adjacency
    /// test for cells of a partition: disjoint cells whose closures touch
    /// share a boundary point.
    pub fn closure_intersects(&self, other: &Interval) -> bool {
        if self.is_empty() || other.is_empty() {
            return false;
        }
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Image under the affine map `v -> a*v + b`.
    pub fn affine_image(&self, a: f64, b: f64) -> Interval {
        if a == 0.0 {
            return Interval::point(b);
        }
        let (p, pc) = (a * self.lo + b, self.lo_closed);
        let (q, qc) = (a * self.hi + b, self.hi_closed);
        if a > 0.0 {
            Interval { lo: p, hi: q, lo_closed: pc, hi_closed: qc }
        } else {
            Interval { lo: q, hi: p, lo_closed: qc, hi_closed: pc }
        }
    }

    /// Range of `|v|` over the interval: (inf, sup, inf_attained, sup_attained).
    pub fn abs_range(&self) -> (f64, f64, bool, bool) {
        debug_assert!(!self.is_empty());
        let (inf, inf_att) = if self.contains(0.0) {
            (0.0, true)
        } else if self.lo > 0.0 || (self.lo == 0.0 && !self.lo_closed) {
            (self.lo.abs(), self.lo_closed)
        } else {
            (self.hi.abs(), self.hi_closed)
        };
        let la = self.lo.abs();
        let ha = self.hi.abs();
        let (sup, sup_att) = if la > ha {
            (la, self.lo_closed)
        } else if ha > la {
            (ha, self.hi_closed)
        } else {
            (la, self.lo_closed || self.hi_closed)
        };
        (inf, sup, inf_att, sup_att)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        write!(f, "{}{}, {}{}", l, self.lo, self.hi, r)
    }
}

/// Axis-aligned box over an arbitrary-dimensional space, storing only the
/// constrained coordinates. Missing coordinates are the full line.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseBox {
    coords: BTreeMap<usize, Interval>,
}

impl SparseBox {
    pub fn full() -> Self {
        SparseBox { coords: BTreeMap::new() }
    }

    pub fn get(&self, coord: usize) -> Interval {
        self.coords.get(&coord).copied().unwrap_or_else(Interval::full)
    }

    pub fn set(&mut self, coord: usize, iv: Interval) {
        self.coords.insert(coord, iv);
    }

    /// Intersect one coordinate with an interval. Returns false if the box
    /// became empty.
    pub fn narrow(&mut self, coord: usize, iv: Interval) -> bool {
        let cur = self.get(coord);
        let next = cur.intersect(&iv);
        self.coords.insert(coord, next);
        !next.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.values().any(Interval::is_empty)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.coords.iter().all(|(&i, iv)| iv.contains(x[i]))
    }

    pub fn intersects(&self, other: &SparseBox) -> bool {
        for (&i, iv) in &self.coords {
            if iv.intersect(&other.get(i)).is_empty() {
                return false;
            }
        }
        // coordinates constrained only in `other` intersect the full line
        !other.coords.values().any(Interval::is_empty)
    }

    /// Adjacency of disjoint cells: every coordinate's closures intersect.
    pub fn closure_intersects(&self, other: &SparseBox) -> bool {
        if self.is_empty() || other.is_empty() {
            return false;
        }
        self.coords.iter().all(|(&i, iv)| iv.closure_intersects(&other.get(i)))
    }

    pub fn constrained(&self) -> impl Iterator<Item = (usize, &Interval)> {
        self.coords.iter().map(|(&i, iv)| (i, iv))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_contains() {
        let iv = Interval { lo: 0.0, hi: 0.0, lo_closed: true, hi_closed: false };
        assert!(iv.is_empty());
        let iv = Interval::point(2.0);
        assert!(!iv.is_empty());
        assert!(iv.contains(2.0));
        let open = Interval { lo: -0.2, hi: 0.2, lo_closed: false, hi_closed: false };
        assert!(open.contains(0.0));
        assert!(!open.contains(0.2));
        assert!(!open.contains(-0.2));
    }

    #[test]
    fn closure_adjacency() {
        // [eps, inf) and (-eps, eps) touch at eps; [eps, inf) and (-inf, -eps] do not.
        let upper = Interval::at_least(0.2, true);
        let mid = Interval { lo: -0.2, hi: 0.2, lo_closed: false, hi_closed: false };
        let lower = Interval::at_most(-0.2, true);
        assert!(upper.closure_intersects(&mid));
        assert!(mid.closure_intersects(&lower));
        assert!(!upper.closure_intersects(&lower));
    }

    #[test]
    fn abs_range_cases() {
        let (inf, sup, _, sup_att) = Interval::at_least(0.2, true).abs_range();
        assert_eq!((inf, sup), (0.2, f64::INFINITY));
        assert!(!sup_att);
        let mid = Interval { lo: -0.2, hi: 0.2, lo_closed: false, hi_closed: false };
        let (inf, sup, inf_att, sup_att) = mid.abs_range();
        assert_eq!(inf, 0.0);
        assert!(inf_att);
        assert_eq!(sup, 0.2);
        assert!(!sup_att);
    }

    #[test]
    fn box_narrowing() {
        let mut b = SparseBox::full();
        assert!(b.narrow(3, Interval::at_least(1.0, true)));
        assert!(b.narrow(3, Interval::at_most(2.0, true)));
        assert!(!b.narrow(3, Interval::at_least(5.0, false)));
        assert!(b.is_empty());
    }
}
