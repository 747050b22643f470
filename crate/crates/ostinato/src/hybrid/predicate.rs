//! Predicates `g(x) ~ 0` with `~` in `{>=, >}`, and guards as conjunctions.

use std::fmt;
use std::sync::Arc;

use super::interval::{Interval, SparseBox};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Ge,
    Gt,
}

/// Sparse affine form `sum a_i * x_i + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineForm {
    pub terms: Vec<(usize, f64)>,
    pub offset: f64,
}

impl AffineForm {
    pub fn new(terms: Vec<(usize, f64)>, offset: f64) -> Self {
        AffineForm { terms, offset }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut v = 0.0;
        for &(i, a) in &self.terms {
            v += a * x[i];
        }
        v + self.offset
    }

    /// `Some((coord, a, b))` when the form is `a * x_coord + b` with `a != 0`.
    pub fn single_coordinate(&self) -> Option<(usize, f64, f64)> {
        match self.terms.as_slice() {
            [(i, a)] if *a != 0.0 => Some((*i, *a, self.offset)),
            _ => None,
        }
    }

    pub fn max_coord(&self) -> Option<usize> {
        self.terms.iter().map(|&(i, _)| i).max()
    }

    /// (inf, sup, inf_attained, sup_attained) over a sparse box.
    pub fn range_on_box(&self, b: &SparseBox) -> (f64, f64, bool, bool) {
        let mut inf = self.offset;
        let mut sup = self.offset;
        let mut inf_att = true;
        let mut sup_att = true;
        for &(i, a) in &self.terms {
            if a == 0.0 {
                continue;
            }
            let iv = b.get(i);
            let (lo_v, lo_c, hi_v, hi_c) = if a > 0.0 {
                (a * iv.lo, iv.lo_closed, a * iv.hi, iv.hi_closed)
            } else {
                (a * iv.hi, iv.hi_closed, a * iv.lo, iv.lo_closed)
            };
            inf += lo_v;
            sup += hi_v;
            inf_att &= lo_c;
            sup_att &= hi_c;
        }
        (inf, sup, inf_att, sup_att)
    }
}

/// The scalar function of a predicate.
#[derive(Clone)]
pub enum ScalarFn {
    Affine(AffineForm),
    /// `max_i |x[a_i] - x[b_i]| - threshold` (with `b_i` absent meaning
    /// `|x[a_i]|`): the infinity-norm deviation used by epsilon-neighborhood
    /// miss checks. Kept structured so interval reasoning stays exact.
    InfNormDev {
        pairs: Vec<(usize, Option<usize>)>,
        threshold: f64,
    },
    /// A registered nonlinear function. Opaque to interval reasoning.
    Named {
        name: String,
        f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarFn::Affine(a) => write!(f, "Affine({a:?})"),
            ScalarFn::InfNormDev { pairs, threshold } => {
                write!(f, "InfNormDev({pairs:?}, {threshold})")
            }
            ScalarFn::Named { name, .. } => write!(f, "Named({name})"),
        }
    }
}

impl ScalarFn {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ScalarFn::Affine(a) => a.eval(x),
            ScalarFn::InfNormDev { pairs, threshold } => {
                let mut m = 0.0f64;
                for &(i, j) in pairs {
                    let d = match j {
                        Some(j) => (x[i] - x[j]).abs(),
                        None => x[i].abs(),
                    };
                    if d > m {
                        m = d;
                    }
                }
                m - threshold
            }
            ScalarFn::Named { f, .. } => f(x),
        }
    }

    /// Range over a box, when computable: (inf, sup, inf_att, sup_att).
    pub fn range_on_box(&self, b: &SparseBox) -> Option<(f64, f64, bool, bool)> {
        match self {
            ScalarFn::Affine(a) => Some(a.range_on_box(b)),
            ScalarFn::InfNormDev { pairs, threshold } => {
                // Coordinates are independent, so inf(max) = max(inf_i) and
                // sup(max) = max(sup_i).
                let mut inf = f64::NEG_INFINITY;
                let mut sup = f64::NEG_INFINITY;
                let mut inf_att = true;
                let mut sup_att = true;
                for &(i, j) in pairs {
                    let iv = match j {
                        None => b.get(i),
                        Some(j) => {
                            let a = b.get(i);
                            let c = b.get(j);
                            // interval of x[i] - x[j]
                            Interval {
                                lo: a.lo - c.hi,
                                hi: a.hi - c.lo,
                                lo_closed: a.lo_closed && c.hi_closed,
                                hi_closed: a.hi_closed && c.lo_closed,
                            }
                        }
                    };
                    if iv.is_empty() {
                        return None;
                    }
                    let (lo, hi, lo_att, hi_att) = iv.abs_range();
                    if lo > inf || (lo == inf && inf == f64::NEG_INFINITY) {
                        inf = lo;
                        inf_att = lo_att;
                    }
                    if hi > sup || (hi == sup && sup == f64::NEG_INFINITY) {
                        sup = hi;
                        sup_att = hi_att;
                    }
                }
                Some((inf - threshold, sup - threshold, inf_att, sup_att))
            }
            ScalarFn::Named { .. } => None,
        }
    }
}

/// `g(x) ~ 0`. Evaluation is a pure function of `x`.
#[derive(Clone, Debug)]
pub struct Predicate {
    pub g: ScalarFn,
    pub rel: Relation,
}

impl Predicate {
    pub fn affine(terms: Vec<(usize, f64)>, offset: f64, rel: Relation) -> Self {
        Predicate { g: ScalarFn::Affine(AffineForm::new(terms, offset)), rel }
    }

    /// `x_coord >= bound`
    pub fn coord_ge(coord: usize, bound: f64) -> Self {
        Predicate::affine(vec![(coord, 1.0)], -bound, Relation::Ge)
    }

    /// `x_coord > bound`
    pub fn coord_gt(coord: usize, bound: f64) -> Self {
        Predicate::affine(vec![(coord, 1.0)], -bound, Relation::Gt)
    }

    /// `x_coord <= bound`
    pub fn coord_le(coord: usize, bound: f64) -> Self {
        Predicate::affine(vec![(coord, -1.0)], bound, Relation::Ge)
    }

    pub fn holds(&self, x: &[f64]) -> bool {
        let v = self.g.eval(x);
        match self.rel {
            Relation::Ge => v >= 0.0,
            Relation::Gt => v > 0.0,
        }
    }

    /// The half-line of a single-coordinate affine predicate under a required
    /// truth value, as `(coord, interval)`.
    pub fn half_line(&self, required: bool) -> Option<(usize, Interval)> {
        let ScalarFn::Affine(a) = &self.g else { return None };
        let (i, a1, b) = a.single_coordinate()?;
        let bound = -b / a1;
        let iv = match (a1 > 0.0, self.rel, required) {
            (true, Relation::Ge, true) => Interval::at_least(bound, true),
            (true, Relation::Ge, false) => Interval::at_most(bound, false),
            (true, Relation::Gt, true) => Interval::at_least(bound, false),
            (true, Relation::Gt, false) => Interval::at_most(bound, true),
            (false, Relation::Ge, true) => Interval::at_most(bound, true),
            (false, Relation::Ge, false) => Interval::at_least(bound, false),
            (false, Relation::Gt, true) => Interval::at_most(bound, false),
            (false, Relation::Gt, false) => Interval::at_least(bound, true),
        };
        Some((i, iv))
    }

    /// Can the predicate take the required truth value somewhere in the box?
    /// `None` when undecidable by interval reasoning.
    pub fn satisfiable_on(&self, b: &SparseBox, required: bool) -> Option<bool> {
        if let Some((i, iv)) = self.half_line(required) {
            return Some(!b.get(i).intersect(&iv).is_empty());
        }
        let (inf, sup, inf_att, sup_att) = self.g.range_on_box(b)?;
        Some(match (self.rel, required) {
            // exists v >= 0
            (Relation::Ge, true) => sup > 0.0 || (sup == 0.0 && sup_att),
            // exists v > 0
            (Relation::Gt, true) => sup > 0.0,
            // exists v < 0
            (Relation::Ge, false) => inf < 0.0,
            // exists v <= 0
            (Relation::Gt, false) => inf < 0.0 || (inf == 0.0 && inf_att),
        })
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.rel {
            Relation::Ge => ">=",
            Relation::Gt => ">",
        };
        match &self.g {
            ScalarFn::Affine(a) => {
                let mut first = true;
                for &(i, c) in &a.terms {
                    if first {
                        write!(f, "{c}*x{i}")?;
                        first = false;
                    } else if c < 0.0 {
                        write!(f, " - {}*x{i}", -c)?;
                    } else {
                        write!(f, " + {c}*x{i}")?;
                    }
                }
                if a.offset != 0.0 || first {
                    if first {
                        write!(f, "{}", a.offset)?;
                    } else if a.offset < 0.0 {
                        write!(f, " - {}", -a.offset)?;
                    } else {
                        write!(f, " + {}", a.offset)?;
                    }
                }
                write!(f, " {rel} 0")
            }
            ScalarFn::InfNormDev { pairs, threshold } => {
                write!(f, "max|")?;
                for (n, &(i, j)) in pairs.iter().enumerate() {
                    if n > 0 {
                        write!(f, ",")?;
                    }
                    match j {
                        Some(j) => write!(f, "x{i}-x{j}")?,
                        None => write!(f, "x{i}")?,
                    }
                }
                write!(f, "| - {threshold} {rel} 0")
            }
            ScalarFn::Named { name, .. } => write!(f, "{name}(x) {rel} 0"),
        }
    }
}

/// Conjunction of predicates. An empty guard is trivially true.
#[derive(Clone, Debug, Default)]
pub struct Guard {
    pub predicates: Vec<Predicate>,
}

impl Guard {
    pub fn always() -> Self {
        Guard { predicates: Vec::new() }
    }

    pub fn all(predicates: Vec<Predicate>) -> Self {
        Guard { predicates }
    }

    pub fn holds(&self, x: &[f64]) -> bool {
        self.predicates.iter().all(|p| p.holds(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_evaluates_exactly() {
        // c - p with bit-equal coordinates is exactly zero
        let p = Predicate::affine(vec![(0, 1.0), (1, -1.0)], 0.0, Relation::Ge);
        assert!(p.holds(&[0.15000000000000002, 0.15000000000000002]));
        assert!(!p.holds(&[0.1, 0.15000000000000002]));
        // delta - c at the exact boundary sample
        let q = Predicate::coord_le(0, 0.05);
        assert!(q.holds(&[0.05]));
        assert!(!q.holds(&[0.05 + f64::EPSILON]));
    }

    #[test]
    fn relations_are_strict_where_stated() {
        let ge = Predicate::coord_ge(0, 1.0);
        let gt = Predicate::coord_gt(0, 1.0);
        assert!(ge.holds(&[1.0]));
        assert!(!gt.holds(&[1.0]));
        assert!(gt.holds(&[1.0 + f64::EPSILON]));
    }

    #[test]
    fn inf_norm_deviation() {
        // max(|x0 - x2|, |x1 - x3|) - 0.2 > 0
        let p = Predicate {
            g: ScalarFn::InfNormDev {
                pairs: vec![(0, Some(2)), (1, Some(3))],
                threshold: 0.2,
            },
            rel: Relation::Gt,
        };
        assert!(!p.holds(&[1.0, 2.0, 1.1, 2.1]));
        assert!(p.holds(&[1.0, 2.0, 1.3, 2.1]));
        assert!(!p.holds(&[1.0, 2.0, 1.2, 2.2])); // exactly 0.2, not > 0.2
    }

    #[test]
    fn half_lines_of_partition_predicates() {
        let eps = 0.2;
        // z >= eps
        let p1 = Predicate::coord_ge(3, eps);
        assert_eq!(p1.half_line(true).unwrap().1, Interval::at_least(eps, true));
        assert_eq!(p1.half_line(false).unwrap().1, Interval::at_most(eps, false));
        // eps > z  <=>  -z + eps > 0
        let p2 = Predicate::affine(vec![(3, -1.0)], eps, Relation::Gt);
        assert_eq!(p2.half_line(true).unwrap().1, Interval::at_most(eps, false));
    }

    #[test]
    fn satisfiability_on_boxes() {
        // |z| - eps > 0 on the middle cell (-eps, eps) is unsatisfiable,
        // on [eps, inf) it is satisfiable.
        let miss = Predicate {
            g: ScalarFn::InfNormDev { pairs: vec![(0, None)], threshold: 0.2 },
            rel: Relation::Gt,
        };
        let mut mid = SparseBox::full();
        mid.set(0, Interval { lo: -0.2, hi: 0.2, lo_closed: false, hi_closed: false });
        assert_eq!(miss.satisfiable_on(&mid, true), Some(false));
        let mut upper = SparseBox::full();
        upper.set(0, Interval::at_least(0.2, true));
        assert_eq!(miss.satisfiable_on(&upper, true), Some(true));
    }
}
