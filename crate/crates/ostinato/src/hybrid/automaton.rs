//! Hybrid automaton structure: locations, transitions, resets, states.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::predicate::{AffineForm, Guard, Predicate};

/// Vector field `f(x, u, out)`. `out` has the location's state dimension.
pub type VectorField = Arc<dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocationId(pub usize);

impl fmt::Display for LocationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

/// Deterministic reset expression for one coordinate, evaluated over the
/// pre-jump state. Set-valued resets are not representable.
#[derive(Clone, Debug)]
pub enum ResetExpr {
    Const(f64),
    Copy(usize),
    Affine(AffineForm),
}

impl ResetExpr {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ResetExpr::Const(v) => *v,
            ResetExpr::Copy(i) => x[*i],
            ResetExpr::Affine(a) => a.eval(x),
        }
    }

    fn max_coord(&self) -> Option<usize> {
        match self {
            ResetExpr::Const(_) => None,
            ResetExpr::Copy(i) => Some(*i),
            ResetExpr::Affine(a) => a.max_coord(),
        }
    }
}

/// Coordinates not named in the assignment list pass through unchanged.
#[derive(Clone, Debug, Default)]
pub struct ResetMap {
    pub assignments: Vec<(usize, ResetExpr)>,
}

impl ResetMap {
    pub fn identity() -> Self {
        ResetMap { assignments: Vec::new() }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        for (i, expr) in &self.assignments {
            out[*i] = expr.eval(x);
        }
        out
    }
}

pub struct Location {
    pub name: String,
    pub dynamics: VectorField,
    /// Conjunction of predicates the state must satisfy while evolving here.
    pub invariant: Vec<Predicate>,
    /// Admissible input box `U_q`; empty means the location is autonomous.
    pub input_box: Vec<(f64, f64)>,
}

impl fmt::Debug for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Location")
            .field("name", &self.name)
            .field("invariant", &self.invariant.len())
            .field("input_box", &self.input_box)
            .finish()
    }
}

#[derive(Debug)]
pub struct Transition {
    pub source: LocationId,
    pub target: LocationId,
    pub guard: Guard,
    pub reset: ResetMap,
    pub label: String,
}

/// State of a hybrid automaton: location, continuous vector, elapsed time.
///
/// `t` is always `steps * h` for the fixed step `h` of the run, never an
/// accumulated sum, so time bookkeeping cannot drift.
#[derive(Clone, Debug, PartialEq)]
pub struct HybridState {
    pub location: LocationId,
    pub x: Vec<f64>,
    pub steps: u64,
    pub t: f64,
}

impl HybridState {
    pub fn new(location: LocationId, x: Vec<f64>) -> Self {
        HybridState { location, x, steps: 0, t: 0.0 }
    }
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("automaton has no locations")]
    NoLocations,
    #[error("transition {0} references missing location")]
    DanglingTransition(usize),
    #[error("state dimension mismatch: expected {expected}, got {got} ({what})")]
    DimensionMismatch { expected: usize, got: usize, what: String },
    #[error("initial state violates the invariant of location {0}")]
    InitialOutsideInvariant(String),
    #[error("initial location id {0} out of range")]
    BadInitialLocation(usize),
}

pub struct HybridAutomaton {
    pub name: String,
    /// Dimension of the continuous state in every location.
    pub dim: usize,
    locations: Vec<Location>,
    transitions: Vec<Transition>,
    /// Transition indices grouped by source location.
    outgoing: Vec<Vec<usize>>,
    pub initial_location: LocationId,
    pub initial_x: Vec<f64>,
}

impl fmt::Debug for HybridAutomaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HybridAutomaton")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("locations", &self.locations.len())
            .field("transitions", &self.transitions.len())
            .finish()
    }
}

impl HybridAutomaton {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        locations: Vec<Location>,
        transitions: Vec<Transition>,
        initial_location: LocationId,
        initial_x: Vec<f64>,
    ) -> Result<Self, BuildError> {
        if locations.is_empty() {
            return Err(BuildError::NoLocations);
        }
        if initial_location.0 >= locations.len() {
            return Err(BuildError::BadInitialLocation(initial_location.0));
        }
        if initial_x.len() != dim {
            return Err(BuildError::DimensionMismatch {
                expected: dim,
                got: initial_x.len(),
                what: "initial state".into(),
            });
        }
        for (k, t) in transitions.iter().enumerate() {
            if t.source.0 >= locations.len() || t.target.0 >= locations.len() {
                return Err(BuildError::DanglingTransition(k));
            }
            for (i, expr) in &t.reset.assignments {
                let hi = expr.max_coord().unwrap_or(0).max(*i);
                if hi >= dim {
                    return Err(BuildError::DimensionMismatch {
                        expected: dim,
                        got: hi + 1,
                        what: format!("reset of transition {k}"),
                    });
                }
            }
        }
        let init_loc = &locations[initial_location.0];
        if !init_loc.invariant.iter().all(|p| p.holds(&initial_x)) {
            return Err(BuildError::InitialOutsideInvariant(init_loc.name.clone()));
        }
        let mut outgoing = vec![Vec::new(); locations.len()];
        for (k, t) in transitions.iter().enumerate() {
            outgoing[t.source.0].push(k);
        }
        Ok(HybridAutomaton {
            name: name.into(),
            dim,
            locations,
            transitions,
            outgoing,
            initial_location,
            initial_x,
        })
    }

    pub fn initial_state(&self) -> HybridState {
        HybridState::new(self.initial_location, self.initial_x.clone())
    }

    pub fn location(&self, id: LocationId) -> &Location {
        &self.locations[id.0]
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub fn n_locations(&self) -> usize {
        self.locations.len()
    }

    pub fn location_by_name(&self, name: &str) -> Option<LocationId> {
        self.locations.iter().position(|l| l.name == name).map(LocationId)
    }

    pub fn transition(&self, idx: usize) -> &Transition {
        &self.transitions[idx]
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Transition indices leaving `loc`, in declaration order.
    pub fn outgoing(&self, loc: LocationId) -> &[usize] {
        &self.outgoing[loc.0]
    }

    pub fn invariant_holds(&self, state: &HybridState) -> bool {
        self.locations[state.location.0].invariant.iter().all(|p| p.holds(&state.x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hybrid::predicate::Relation;

    fn zero_field(dim: usize) -> VectorField {
        Arc::new(move |_x, _u, out: &mut [f64]| {
            for o in out.iter_mut().take(dim) {
                *o = 0.0;
            }
        })
    }

    #[test]
    fn builder_validates_endpoints_and_initial() {
        let loc = Location {
            name: "only".into(),
            dynamics: zero_field(1),
            invariant: vec![Predicate::coord_ge(0, 0.0)],
            input_box: vec![],
        };
        let bad = HybridAutomaton::new(
            "a",
            1,
            vec![loc],
            vec![Transition {
                source: LocationId(0),
                target: LocationId(3),
                guard: Guard::always(),
                reset: ResetMap::identity(),
                label: "t".into(),
            }],
            LocationId(0),
            vec![1.0],
        );
        assert!(matches!(bad, Err(BuildError::DanglingTransition(0))));

        let loc = Location {
            name: "only".into(),
            dynamics: zero_field(1),
            invariant: vec![Predicate::coord_ge(0, 0.0)],
            input_box: vec![],
        };
        let bad = HybridAutomaton::new("a", 1, vec![loc], vec![], LocationId(0), vec![-1.0]);
        assert!(matches!(bad, Err(BuildError::InitialOutsideInvariant(_))));
    }

    #[test]
    fn reset_leaves_unassigned_coordinates_bit_identical() {
        let r = ResetMap {
            assignments: vec![(1, ResetExpr::Const(0.0)), (2, ResetExpr::Copy(0))],
        };
        let x = [0.1 + 0.2, 5.0, -3.0, 1.0 / 3.0];
        let y = r.apply(&x);
        assert_eq!(y[0].to_bits(), x[0].to_bits());
        assert_eq!(y[3].to_bits(), x[3].to_bits());
        assert_eq!(y[1], 0.0);
        assert_eq!(y[2].to_bits(), x[0].to_bits());
    }

    #[test]
    fn identity_reset_is_identity() {
        let r = ResetMap::identity();
        let x = [1.0, 2.0, 3.0];
        assert_eq!(r.apply(&x), x.to_vec());
    }

    #[test]
    fn affine_reset_expression() {
        // omega := x0 - x1
        let r = ResetMap {
            assignments: vec![(
                2,
                ResetExpr::Affine(AffineForm::new(vec![(0, 1.0), (1, -1.0)], 0.0)),
            )],
        };
        let y = r.apply(&[3.0, 1.25, 0.0]);
        assert_eq!(y[2], 1.75);
        let _ = Relation::Ge; // silence unused import in cfg(test)
    }
}
