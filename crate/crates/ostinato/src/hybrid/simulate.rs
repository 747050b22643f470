//! Discrete-time execution: continuous steps, guard-gated jumps, traces.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::automaton::{HybridAutomaton, HybridState};
use super::integrate::rk4_step;

/// Consecutive jumps allowed at one sample before declaring a cascade.
const MAX_JUMPS_PER_STEP: usize = 16;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("integration diverged (non-finite coordinate {coord})")]
    IntegrationDiverged { coord: usize },
    #[error("invariant of location {location} violated after step {steps}")]
    InvariantExit { location: String, steps: u64, state: HybridState },
    #[error("input dimension {got} does not match location input box {expected}")]
    InputDimension { expected: usize, got: usize },
    #[error("input component {index} = {value} outside admissible box [{lo}, {hi}]")]
    InputOutOfRange { index: usize, value: f64, lo: f64, hi: f64 },
    #[error("transition {transition} not enabled at step {steps}")]
    TransitionNotEnabled { transition: usize, steps: u64 },
    #[error("reset of transition {transition} left the invariant of {target}")]
    ResetContract { transition: usize, target: String },
    #[error("more than {MAX_JUMPS_PER_STEP} consecutive jumps at one sample")]
    JumpCascade,
}

/// A simulation failure carrying the partial trace up to the failing step.
#[derive(Debug, Error)]
#[error("{error}")]
pub struct SimFailure {
    pub error: SimError,
    pub partial: Trace,
}

/// One recorded event.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TraceEvent {
    Init,
    /// Continuous step of length `h` under constant input `u`.
    Step { u: Vec<f64> },
    /// Discrete jump over the given transition index.
    Jump { transition: usize },
}

#[derive(Clone, Debug)]
pub struct TraceEntry {
    pub state: HybridState,
    pub event: TraceEvent,
}

/// Ordered record of a run. Entry times are nondecreasing; every `Step`
/// entry advances time by exactly one `h`.
#[derive(Debug, Default)]
pub struct Trace {
    pub h: f64,
    pub entries: Vec<TraceEntry>,
}

impl Trace {
    pub fn new(h: f64, initial: HybridState) -> Self {
        Trace { h, entries: vec![TraceEntry { state: initial, event: TraceEvent::Init }] }
    }

    pub fn last_state(&self) -> &HybridState {
        &self.entries.last().expect("trace has an initial entry").state
    }

    pub fn n_steps(&self) -> u64 {
        self.entries.iter().filter(|e| matches!(e.event, TraceEvent::Step { .. })).count() as u64
    }
}

/// An action a tester can apply: a continuous input held for one step, or a
/// controllable transition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Action {
    Input(Vec<f64>),
    Jump(usize),
}

/// Path-dependent policy state, snapshotted per tree node so exploration can
/// resume a policy mid-path. `None` for stateless policies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PolicyState {
    None,
    Monitor { armed: bool, prev_in: bool, prev_norm: f64, entered: bool },
}

/// Decides which enabled transition (if any) to take after a continuous step.
/// `choose` is called repeatedly until it returns `None`.
pub trait TransitionPolicy {
    fn choose(
        &mut self,
        automaton: &HybridAutomaton,
        state: &HybridState,
        enabled: &[usize],
    ) -> Option<usize>;

    fn save(&self) -> PolicyState {
        PolicyState::None
    }

    fn load(&mut self, _s: &PolicyState) {}
}

/// Always takes the first enabled transition (declaration order).
#[derive(Clone, Copy, Debug, Default)]
pub struct FirstEnabled;

impl TransitionPolicy for FirstEnabled {
    fn choose(&mut self, _a: &HybridAutomaton, _s: &HybridState, enabled: &[usize]) -> Option<usize> {
        enabled.first().copied()
    }
}

/// Never jumps; continuous evolution only.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoJumps;

impl TransitionPolicy for NoJumps {
    fn choose(&mut self, _a: &HybridAutomaton, _s: &HybridState, _e: &[usize]) -> Option<usize> {
        None
    }
}

fn check_input(automaton: &HybridAutomaton, state: &HybridState, u: &[f64]) -> Result<(), SimError> {
    let loc = automaton.location(state.location);
    if u.len() != loc.input_box.len() {
        return Err(SimError::InputDimension { expected: loc.input_box.len(), got: u.len() });
    }
    for (i, (&v, &(lo, hi))) in u.iter().zip(&loc.input_box).enumerate() {
        if v < lo || v > hi {
            return Err(SimError::InputOutOfRange { index: i, value: v, lo, hi });
        }
    }
    Ok(())
}

/// Advance the continuous state by one RK4 step under constant input.
/// The location is unchanged; `t` advances to `(steps + 1) * h`.
///
/// An invariant violation at the new point is reported as `InvariantExit`
/// carrying the offending state; the caller decides whether a transition
/// must fire instead.
pub fn continuous_step(
    automaton: &HybridAutomaton,
    state: &HybridState,
    u: &[f64],
    h: f64,
) -> Result<HybridState, SimError> {
    check_input(automaton, state, u)?;
    let loc = automaton.location(state.location);
    let x = rk4_step(&loc.dynamics, &state.x, u, h)?;
    let steps = state.steps + 1;
    let next = HybridState { location: state.location, x, steps, t: steps as f64 * h };
    if !automaton.invariant_holds(&next) {
        return Err(SimError::InvariantExit {
            location: loc.name.clone(),
            steps,
            state: next,
        });
    }
    Ok(next)
}

/// Exactly those transitions from the current location whose guard holds at
/// `x`, in declaration order.
pub fn enabled_transitions(automaton: &HybridAutomaton, state: &HybridState) -> Vec<usize> {
    automaton
        .outgoing(state.location)
        .iter()
        .copied()
        .filter(|&k| automaton.transition(k).guard.holds(&state.x))
        .collect()
}

/// Take an enabled transition: switch location, apply the reset, keep `t`.
pub fn take_transition(
    automaton: &HybridAutomaton,
    state: &HybridState,
    transition: usize,
) -> Result<HybridState, SimError> {
    let tr = automaton.transition(transition);
    if tr.source != state.location || !tr.guard.holds(&state.x) {
        return Err(SimError::TransitionNotEnabled { transition, steps: state.steps });
    }
    let x = tr.reset.apply(&state.x);
    let next = HybridState { location: tr.target, x, steps: state.steps, t: state.t };
    if !automaton.invariant_holds(&next) {
        return Err(SimError::ResetContract {
            transition,
            target: automaton.location(tr.target).name.clone(),
        });
    }
    Ok(next)
}

/// Run the policy-jump loop at the current sample. Returns the settled state
/// and the jumps taken, in order.
pub fn settle_jumps(
    automaton: &HybridAutomaton,
    state: HybridState,
    policy: &mut dyn TransitionPolicy,
) -> Result<(HybridState, Vec<usize>), SimError> {
    let mut cur = state;
    let mut jumps = Vec::new();
    loop {
        let enabled = enabled_transitions(automaton, &cur);
        match policy.choose(automaton, &cur, &enabled) {
            None => return Ok((cur, jumps)),
            Some(t) => {
                cur = take_transition(automaton, &cur, t)?;
                jumps.push(t);
                if jumps.len() > MAX_JUMPS_PER_STEP {
                    return Err(SimError::JumpCascade);
                }
            }
        }
    }
}

/// Simulate `n_steps` fixed steps, alternating continuous evolution with
/// policy-selected jumps. Every state is recorded; errors carry the partial
/// trace.
pub fn simulate(
    automaton: &HybridAutomaton,
    mut schedule: impl FnMut(u64, &HybridState) -> Vec<f64>,
    policy: &mut dyn TransitionPolicy,
    n_steps: u64,
    h: f64,
) -> Result<Trace, SimFailure> {
    let mut trace = Trace::new(h, automaton.initial_state());
    for step in 0..n_steps {
        let u = schedule(step, trace.last_state());
        if let Err(e) = advance(automaton, &mut trace, &u, policy) {
            return Err(SimFailure { error: e, partial: trace });
        }
    }
    Ok(trace)
}

/// One continuous step plus the policy-jump loop, appended to the trace.
pub fn advance(
    automaton: &HybridAutomaton,
    trace: &mut Trace,
    u: &[f64],
    policy: &mut dyn TransitionPolicy,
) -> Result<(), SimError> {
    let stepped = continuous_step(automaton, trace.last_state(), u, trace.h)?;
    trace.entries.push(TraceEntry { state: stepped.clone(), event: TraceEvent::Step { u: u.to_vec() } });
    let mut cur = stepped;
    let mut n = 0;
    loop {
        let enabled = enabled_transitions(automaton, &cur);
        match policy.choose(automaton, &cur, &enabled) {
            None => return Ok(()),
            Some(t) => {
                cur = take_transition(automaton, &cur, t)?;
                trace.entries.push(TraceEntry { state: cur.clone(), event: TraceEvent::Jump { transition: t } });
                n += 1;
                if n > MAX_JUMPS_PER_STEP {
                    return Err(SimError::JumpCascade);
                }
            }
        }
    }
}

/// Replay a recorded action schedule from the initial state. `Input` actions
/// run one continuous step plus the policy-jump loop (the same semantics the
/// schedule was produced under); `Jump` actions take the transition
/// explicitly.
pub fn replay(
    automaton: &HybridAutomaton,
    actions: &[Action],
    policy: &mut dyn TransitionPolicy,
    h: f64,
) -> Result<Trace, SimFailure> {
    let mut trace = Trace::new(h, automaton.initial_state());
    for action in actions {
        let r = match action {
            Action::Input(u) => advance(automaton, &mut trace, u, policy),
            Action::Jump(t) => take_transition(automaton, trace.last_state(), *t).map(|s| {
                trace.entries.push(TraceEntry { state: s, event: TraceEvent::Jump { transition: *t } });
            }),
        };
        if let Err(e) = r {
            return Err(SimFailure { error: e, partial: trace });
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hybrid::automaton::{Location, LocationId, ResetExpr, ResetMap, Transition, VectorField};
    use crate::hybrid::predicate::{Guard, Predicate};
    use std::sync::Arc;

    fn clock_automaton(threshold: f64) -> HybridAutomaton {
        // two locations, clock c with c' = 1, jump when c >= threshold, reset c := 0
        let field: VectorField = Arc::new(|_x, _u, out| out[0] = 1.0);
        let l0 = Location {
            name: "tick".into(),
            dynamics: field.clone(),
            invariant: vec![],
            input_box: vec![],
        };
        let l1 = Location { name: "tock".into(), dynamics: field, invariant: vec![], input_box: vec![] };
        let t = Transition {
            source: LocationId(0),
            target: LocationId(1),
            guard: Guard::all(vec![Predicate::coord_ge(0, threshold)]),
            reset: ResetMap { assignments: vec![(0, ResetExpr::Const(0.0))] },
            label: "fire".into(),
        };
        HybridAutomaton::new("clock", 1, vec![l0, l1], vec![t], LocationId(0), vec![0.0]).unwrap()
    }

    #[test]
    fn zero_steps_gives_only_initial_state() {
        let a = clock_automaton(1.0);
        let tr = simulate(&a, |_, _| vec![], &mut FirstEnabled, 0, 0.1).unwrap();
        assert_eq!(tr.entries.len(), 1);
        assert!(matches!(tr.entries[0].event, TraceEvent::Init));
    }

    #[test]
    fn clock_guard_fires_at_first_crossing_sample() {
        // c = T_i with c' = 1: fires at the unique first sample i*h >= threshold
        let thr = 0.173;
        let h = 0.05;
        let a = clock_automaton(thr);
        let tr = simulate(&a, |_, _| vec![], &mut FirstEnabled, 10, h).unwrap();
        let jump_at = tr
            .entries
            .iter()
            .position(|e| matches!(e.event, TraceEvent::Jump { .. }))
            .expect("jump happened");
        // the entry before the jump is the step that crossed
        let steps = tr.entries[jump_at - 1].state.steps;
        let expected = (thr / h).ceil() as u64; // first i with i*h >= thr
        assert_eq!(steps, expected);
        // and exactly one jump in the horizon
        assert_eq!(
            tr.entries.iter().filter(|e| matches!(e.event, TraceEvent::Jump { .. })).count(),
            1
        );
    }

    #[test]
    fn time_is_step_count_times_h_exactly() {
        let a = clock_automaton(1e9);
        let h = 0.05;
        let tr = simulate(&a, |_, _| vec![], &mut FirstEnabled, 1000, h).unwrap();
        let last = tr.last_state();
        assert_eq!(last.steps, 1000);
        assert_eq!(last.t, 1000.0 * h); // exact, no accumulation
    }

    #[test]
    fn identical_runs_are_bit_identical() {
        let a = clock_automaton(0.4);
        let run = || {
            simulate(&a, |_, _| vec![], &mut FirstEnabled, 200, 0.05)
                .unwrap()
                .entries
                .iter()
                .map(|e| e.state.x[0].to_bits())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn input_validation() {
        let field: VectorField = Arc::new(|_x, u, out| out[0] = u[0]);
        let l = Location {
            name: "l".into(),
            dynamics: field,
            invariant: vec![],
            input_box: vec![(-1.0, 1.0)],
        };
        let a = HybridAutomaton::new("i", 1, vec![l], vec![], LocationId(0), vec![0.0]).unwrap();
        let s = a.initial_state();
        assert!(matches!(
            continuous_step(&a, &s, &[2.0], 0.05),
            Err(SimError::InputOutOfRange { .. })
        ));
        assert!(matches!(
            continuous_step(&a, &s, &[], 0.05),
            Err(SimError::InputDimension { .. })
        ));
        assert!(continuous_step(&a, &s, &[0.5], 0.05).is_ok());
    }

    #[test]
    fn invariant_exit_signals_offending_state() {
        let field: VectorField = Arc::new(|_x, _u, out| out[0] = 1.0);
        let l = Location {
            name: "bounded".into(),
            dynamics: field,
            invariant: vec![Predicate::coord_le(0, 0.12)],
            input_box: vec![],
        };
        let a = HybridAutomaton::new("b", 1, vec![l], vec![], LocationId(0), vec![0.0]).unwrap();
        let mut s = a.initial_state();
        s = continuous_step(&a, &s, &[], 0.05).unwrap();
        s = continuous_step(&a, &s, &[], 0.05).unwrap();
        let e = continuous_step(&a, &s, &[], 0.05);
        match e {
            Err(SimError::InvariantExit { state, .. }) => {
                assert_eq!(state.steps, 3);
                assert!(state.x[0] > 0.12);
            }
            other => panic!("expected invariant exit, got {other:?}"),
        }
    }

    #[test]
    fn enabled_transitions_empty_when_guard_false() {
        let a = clock_automaton(1.0);
        let s = a.initial_state(); // c = 0 < 1
        assert!(enabled_transitions(&a, &s).is_empty());
    }

    #[test]
    fn take_transition_requires_enabledness() {
        let a = clock_automaton(1.0);
        let s = a.initial_state();
        assert!(matches!(
            take_transition(&a, &s, 0),
            Err(SimError::TransitionNotEnabled { .. })
        ));
    }

    #[test]
    fn replay_matches_simulate() {
        let a = clock_automaton(0.3);
        let tr = simulate(&a, |_, _| vec![], &mut FirstEnabled, 50, 0.05).unwrap();
        let actions: Vec<Action> = (0..50).map(|_| Action::Input(vec![])).collect();
        let re = replay(&a, &actions, &mut FirstEnabled, 0.05).unwrap();
        let locs = |t: &Trace| t.entries.iter().map(|e| e.state.location).collect::<Vec<_>>();
        assert_eq!(locs(&tr), locs(&re));
    }
}
