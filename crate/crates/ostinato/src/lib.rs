//! Falsification of oscillation properties of parametric dynamical systems.
//!
//! A plant `x' = f(x, k)` with drifting parameters `k' = u` is wrapped in a
//! *property automaton* — a hybrid automaton whose locations encode "still in
//! transient", "learning a period", "oscillating" and "steady", and whose
//! transitions fire on tolerance-relaxed returns to a stored periodic point.
//! Finding an input signal `u(t)` that drives the automaton out of the
//! oscillating location falsifies oscillation robustness.
//!
//! The search for such a signal is a goal-biased random tree:
//!
//! 1. the property automaton is abstracted into a finite transition system
//!    over predicate cells ([`abstraction`]),
//! 2. a Metropolis–Hastings random walk over that system, with a target
//!    distribution favouring violation-adjacent cells, picks goal regions,
//! 3. a tree of simulated states grows toward the sampled goals, steering
//!    with uniformly sampled inputs ([`explorer`]).
//!
//! The [`models`] module ships the Laub-Loomis cAMP oscillation benchmark
//! together with small closed-form plants used as test oracles, and
//! [`runner`] exposes ready-made experiment presets and file output. See the
//! `examples/` directory for one runnable program per capability.

pub mod abstraction;
pub mod explorer;
pub mod hybrid;
pub mod models;
pub mod property;
pub mod runner;

pub use hybrid::automaton::{HybridAutomaton, HybridState, Location, LocationId, Transition};
pub use hybrid::predicate::{AffineForm, Guard, Predicate, Relation, ScalarFn};
pub use hybrid::simulate::{Action, Trace, TraceEvent, TransitionPolicy};
pub use property::{OscillationSpec, PropertyAutomaton, Verdict, VerdictKind};
