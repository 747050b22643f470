//! Hybrid automata: predicates, guards, resets, locations, and discrete-time
//! execution with fixed-step RK4 integration.

pub mod automaton;
pub mod integrate;
pub mod interval;
pub mod predicate;
pub mod simulate;

pub use automaton::{HybridAutomaton, HybridState, Location, LocationId, ResetExpr, ResetMap, Transition};
pub use integrate::rk4_step;
pub use interval::{Interval, SparseBox};
pub use predicate::{AffineForm, Guard, Predicate, Relation, ScalarFn};
pub use simulate::{
    continuous_step, enabled_transitions, replay, simulate, take_transition, Action, FirstEnabled,
    NoJumps, PolicyState, SimError, SimFailure, Trace, TraceEntry, TraceEvent, TransitionPolicy,
};
