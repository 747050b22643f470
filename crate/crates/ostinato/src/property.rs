//! Oscillation, steady-state and overshoot property automata, plus trace
//! classification.
//!
//! The oscillation automaton has four locations:
//!
//! * `INIT` — transient; after the transient bound `T_i` the current state is
//!   stored as the expected periodic point and the clock resets.
//! * `LRN` — learning: when the trajectory comes back into the epsilon
//!   neighborhood of the stored point after more than `delta`, the elapsed
//!   clock is stored as the period `p`; a return within `(0, delta]` routes
//!   to `STD` instead (steady at the clock resolution).
//! * `OSC` — every `p` time units the trajectory must be epsilon-close to the
//!   point stored one period ago. A hit re-anchors and loops; a miss jumps
//!   back to `INIT`, which is the property violation.
//! * `STD` — same check at the resolution period `p <= delta`.
//!
//! Two state encodings are available: the direct one storing the periodic
//! point `x_p`, and the difference form storing `z = x - x_p` (so `z' = x'`,
//! resets become `z := 0`, and the oscillation checks involve single `z`
//! coordinates, which is what the predicate abstraction wants).
//!
//! Equality-style clock guards (`c = p`, `c = T_i`) fire at the first sampled
//! instant with `c >= threshold`. When exactly a learning return may fire is
//! the monitor policy's call (the guards are windows); see [`LearningRule`].

use std::ops::Range;
use std::sync::Arc;

use thiserror::Error;

use crate::hybrid::automaton::{
    HybridAutomaton, HybridState, Location, LocationId, ResetExpr, ResetMap, Transition,
    VectorField,
};
use crate::hybrid::predicate::{AffineForm, Guard, Predicate, Relation, ScalarFn};
use crate::hybrid::simulate::{PolicyState, Trace, TraceEvent, TransitionPolicy};
use crate::models::AugmentedPlant;

/// Index layout of the augmented state `(x, k, c, p, stored)` where `stored`
/// is the periodic point `x_p` or the difference `z`, one slot per plant
/// coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StateLayout {
    pub plant_dim: usize,
    pub param_dim: usize,
}

impl StateLayout {
    pub fn dim(&self) -> usize {
        2 * self.plant_dim + self.param_dim + 2
    }

    pub fn plant(&self) -> Range<usize> {
        0..self.plant_dim
    }

    pub fn params(&self) -> Range<usize> {
        self.plant_dim..self.plant_dim + self.param_dim
    }

    pub fn clock(&self) -> usize {
        self.plant_dim + self.param_dim
    }

    pub fn period(&self) -> usize {
        self.plant_dim + self.param_dim + 1
    }

    pub fn stored(&self) -> Range<usize> {
        let s = self.plant_dim + self.param_dim + 2;
        s..s + self.plant_dim
    }

    /// State index of the stored slot for plant coordinate `i`.
    pub fn stored_coord(&self, i: usize) -> usize {
        self.plant_dim + self.param_dim + 2 + i
    }
}

/// Which encoding the stored block uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StoredForm {
    /// Stored periodic point `x_p` with zero dynamics.
    Periodic,
    /// Difference `z = x - x_p` with `z' = x'`; anchoring resets `z := 0`.
    Difference,
}

/// When may a learning return fire within its guard window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LearningRule {
    /// Require the trajectory to leave the epsilon neighborhood before a
    /// return counts. Without this, any system whose per-step motion is
    /// below epsilon is captured as "steady" at the very first sample.
    pub require_exit: bool,
    /// Fire the period-learning transition one sample past the closest
    /// approach instead of at the first in-neighborhood sample. Sharpens the
    /// learned period when the return window spans several samples.
    pub closest_approach: bool,
}

impl Default for LearningRule {
    fn default() -> Self {
        LearningRule { require_exit: false, closest_approach: false }
    }
}

#[derive(Clone, Debug)]
pub struct OscillationSpec {
    /// Maximal transient duration `T_i`.
    pub t_transient: f64,
    /// Minimal period resolution `delta` (also the steady-state horizon).
    pub delta: f64,
    /// Return tolerance `epsilon`.
    pub epsilon: f64,
    /// Plant coordinates compared in the oscillation/steady checks.
    pub monitored: Vec<usize>,
    /// Plant coordinates compared in the learning return; `None` means all
    /// of them (the full-state return of the unmodified learning guards).
    pub learn_monitored: Option<Vec<usize>>,
    pub learning: LearningRule,
    /// Completed oscillation check loops required for an `Oscillating`
    /// verdict.
    pub cycles_to_confirm: u32,
}

impl OscillationSpec {
    pub fn new(t_transient: f64, delta: f64, epsilon: f64, monitored: Vec<usize>) -> Self {
        OscillationSpec {
            t_transient,
            delta,
            epsilon,
            monitored,
            learn_monitored: None,
            learning: LearningRule::default(),
            cycles_to_confirm: 1,
        }
    }

    pub fn validate(&self, plant_dim: usize) -> Result<(), PropertyError> {
        if !(self.t_transient > 0.0) {
            return Err(PropertyError::BadSpec("t_transient must be positive".into()));
        }
        if !(self.delta > 0.0) {
            return Err(PropertyError::BadSpec("delta must be positive".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(PropertyError::BadSpec("epsilon must be positive".into()));
        }
        if self.monitored.is_empty() {
            return Err(PropertyError::BadSpec("monitored set is empty".into()));
        }
        for &i in self.monitored.iter().chain(self.learn_monitored.iter().flatten()) {
            if i >= plant_dim {
                return Err(PropertyError::BadSpec(format!(
                    "monitored coordinate {i} outside plant dimension {plant_dim}"
                )));
            }
        }
        if self.cycles_to_confirm == 0 {
            return Err(PropertyError::BadSpec("cycles_to_confirm must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum PropertyError {
    #[error("invalid property spec: {0}")]
    BadSpec(String),
    #[error(transparent)]
    Build(#[from] crate::hybrid::automaton::BuildError),
}

/// Location and transition roles of an oscillation property automaton.
#[derive(Clone, Copy, Debug)]
pub struct OscillationRoles {
    pub init: LocationId,
    pub learn: LocationId,
    pub steady: LocationId,
    pub osc: LocationId,
    pub start_learning: usize,
    pub learn_steady: usize,
    pub learn_osc: usize,
    pub osc_check: usize,
    pub osc_violation: usize,
    pub steady_check: usize,
    pub steady_violation: usize,
}

pub struct PropertyAutomaton {
    pub automaton: HybridAutomaton,
    pub layout: StateLayout,
    pub spec: OscillationSpec,
    pub form: StoredForm,
    pub roles: OscillationRoles,
}

impl PropertyAutomaton {
    /// The deviation pairs `(coord, reference)` of the check guards, as state
    /// indices: `(z_i, None)` in difference form, `(x_i, x_p_i)` otherwise.
    pub fn check_pairs(&self) -> Vec<(usize, Option<usize>)> {
        deviation_pairs(&self.layout, self.form, &self.spec.monitored)
    }

    pub fn learn_pairs(&self) -> Vec<(usize, Option<usize>)> {
        let all: Vec<usize> = (0..self.layout.plant_dim).collect();
        let coords = self.spec.learn_monitored.as_deref().unwrap_or(&all);
        deviation_pairs(&self.layout, self.form, coords)
    }

    /// Signed monitored deviation with the largest magnitude at a state (the
    /// "exit value" of a violation).
    pub fn deviation(&self, x: &[f64]) -> f64 {
        let mut v = 0.0f64;
        for (i, j) in self.check_pairs() {
            let d = match j {
                Some(j) => x[i] - x[j],
                None => x[i],
            };
            if d.abs() > v.abs() {
                v = d;
            }
        }
        v
    }

    pub fn is_violation(&self, transition: usize) -> bool {
        transition == self.roles.osc_violation || transition == self.roles.steady_violation
    }

    /// The partition predicates over the first monitored difference
    /// coordinate: `(z >= eps, eps > z, z > -eps, -eps >= z)`. Single
    /// coordinate, so the abstraction stays on interval cells.
    pub fn cell_predicates(&self) -> Vec<Predicate> {
        let eps = self.spec.epsilon;
        let z = match self.form {
            StoredForm::Difference => self.layout.stored_coord(self.spec.monitored[0]),
            StoredForm::Periodic => {
                // cells over x_i - x_p_i are not single-coordinate; callers
                // should abstract the difference form
                self.layout.stored_coord(self.spec.monitored[0])
            }
        };
        vec![
            Predicate::affine(vec![(z, 1.0)], -eps, Relation::Ge),
            Predicate::affine(vec![(z, -1.0)], eps, Relation::Gt),
            Predicate::affine(vec![(z, 1.0)], eps, Relation::Gt),
            Predicate::affine(vec![(z, -1.0)], -eps, Relation::Ge),
        ]
    }

    pub fn monitor_policy(&self) -> MonitorPolicy {
        MonitorPolicy {
            epsilon: self.spec.epsilon,
            learn_pairs: Arc::new(self.learn_pairs()),
            rule: self.spec.learning,
            learn_loc: self.roles.learn,
            learn_steady: self.roles.learn_steady,
            learn_osc: self.roles.learn_osc,
            armed: false,
            prev_in: false,
            prev_norm: 0.0,
            entered: false,
        }
    }
}

fn deviation_pairs(
    layout: &StateLayout,
    form: StoredForm,
    coords: &[usize],
) -> Vec<(usize, Option<usize>)> {
    coords
        .iter()
        .map(|&i| match form {
            StoredForm::Difference => (layout.stored_coord(i), None),
            StoredForm::Periodic => (i, Some(layout.stored_coord(i))),
        })
        .collect()
}

/// Conjunction of `|d_i| <= eps` as affine predicate pairs.
fn near_predicates(pairs: &[(usize, Option<usize>)], eps: f64) -> Vec<Predicate> {
    let mut out = Vec::new();
    for &(i, j) in pairs {
        match j {
            None => {
                out.push(Predicate::affine(vec![(i, -1.0)], eps, Relation::Ge)); // d <= eps
                out.push(Predicate::affine(vec![(i, 1.0)], eps, Relation::Ge)); // d >= -eps
            }
            Some(j) => {
                out.push(Predicate::affine(vec![(i, -1.0), (j, 1.0)], eps, Relation::Ge));
                out.push(Predicate::affine(vec![(i, 1.0), (j, -1.0)], eps, Relation::Ge));
            }
        }
    }
    out
}

/// Single predicate `max_i |d_i| > eps`.
fn miss_predicate(pairs: &[(usize, Option<usize>)], eps: f64) -> Predicate {
    Predicate {
        g: ScalarFn::InfNormDev { pairs: pairs.to_vec(), threshold: eps },
        rel: Relation::Gt,
    }
}

/// Build the oscillation property automaton in the periodic-point form.
pub fn build_oscillation_automaton(
    spec: &OscillationSpec,
    plant: &AugmentedPlant,
) -> Result<PropertyAutomaton, PropertyError> {
    build_oscillation(spec, plant, StoredForm::Periodic)
}

/// Build the difference ("z") form: stored block holds `z = x - x_p` with
/// `z' = x'`, anchors reset `z := 0`, and both check guards read single `z`
/// coordinates.
pub fn build_oscillation_automaton_z(
    spec: &OscillationSpec,
    plant: &AugmentedPlant,
) -> Result<PropertyAutomaton, PropertyError> {
    build_oscillation(spec, plant, StoredForm::Difference)
}

fn build_oscillation(
    spec: &OscillationSpec,
    plant: &AugmentedPlant,
    form: StoredForm,
) -> Result<PropertyAutomaton, PropertyError> {
    spec.validate(plant.dim())?;
    let layout = StateLayout { plant_dim: plant.dim(), param_dim: plant.param_dim() };
    let dim = layout.dim();

    let field = property_field(plant, layout, form);
    let invariant = param_box_invariant(&layout, &plant.param_boxes);
    let input_box = plant.input_boxes.clone();
    let mk_loc = |name: &str| Location {
        name: name.into(),
        dynamics: field.clone(),
        invariant: invariant.clone(),
        input_box: input_box.clone(),
    };
    // declaration order fixes abstraction state order: INIT, LRN, STD, OSC
    let locations = vec![mk_loc("INIT"), mk_loc("LRN"), mk_loc("STD"), mk_loc("OSC")];
    let (init, learn, steady, osc) =
        (LocationId(0), LocationId(1), LocationId(2), LocationId(3));

    let c = layout.clock();
    let p = layout.period();
    let check = deviation_pairs(&layout, form, &spec.monitored);
    let all_coords: Vec<usize> = (0..layout.plant_dim).collect();
    let learn_coords = spec.learn_monitored.as_deref().unwrap_or(&all_coords);
    let learn_dev = deviation_pairs(&layout, form, learn_coords);

    let anchor = anchor_reset(&layout, form);
    let eps = spec.epsilon;

    // c >= p as a two-coordinate affine predicate
    let clock_at_period = Predicate::affine(vec![(c, 1.0), (p, -1.0)], 0.0, Relation::Ge);

    let mut g_learn_steady = vec![Predicate::coord_gt(c, 0.0), Predicate::coord_le(c, spec.delta)];
    g_learn_steady.extend(near_predicates(&learn_dev, eps));
    let mut g_learn_osc = vec![Predicate::coord_gt(c, spec.delta)];
    g_learn_osc.extend(near_predicates(&learn_dev, eps));

    let mut g_osc_check = vec![clock_at_period.clone()];
    g_osc_check.extend(near_predicates(&check, eps));
    let g_osc_violation =
        Guard::all(vec![miss_predicate(&check, eps), clock_at_period.clone()]);
    let mut g_steady_check = vec![clock_at_period.clone()];
    g_steady_check.extend(near_predicates(&check, eps));
    let g_steady_violation = Guard::all(vec![miss_predicate(&check, eps), clock_at_period]);

    let store_period = vec![(p, ResetExpr::Copy(c)), (c, ResetExpr::Const(0.0))];
    let with_anchor = |mut v: Vec<(usize, ResetExpr)>| {
        v.extend(anchor.clone());
        v
    };

    let transitions = vec![
        // INIT -> LRN after the transient bound (crossing rule on c = T_i)
        Transition {
            source: init,
            target: learn,
            guard: Guard::all(vec![Predicate::coord_ge(c, spec.t_transient)]),
            reset: ResetMap {
                assignments: with_anchor(vec![(c, ResetExpr::Const(0.0))]),
            },
            label: "start_learning".into(),
        },
        // LRN -> STD: return within (0, delta]
        Transition {
            source: learn,
            target: steady,
            guard: Guard::all(g_learn_steady),
            reset: ResetMap { assignments: with_anchor(store_period.clone()) },
            label: "learn_steady".into(),
        },
        // LRN -> OSC: return after delta, period learned
        Transition {
            source: learn,
            target: osc,
            guard: Guard::all(g_learn_osc),
            reset: ResetMap { assignments: with_anchor(store_period) },
            label: "learn_osc".into(),
        },
        // OSC self-loop: on-time return, re-anchor
        Transition {
            source: osc,
            target: osc,
            guard: Guard::all(g_osc_check),
            reset: ResetMap {
                assignments: with_anchor(vec![(c, ResetExpr::Const(0.0))]),
            },
            label: "osc_check".into(),
        },
        // OSC -> INIT: missed return, the violation. No clock reset (as
        // drawn); the difference form re-zeroes z.
        Transition {
            source: osc,
            target: init,
            guard: g_osc_violation,
            reset: ResetMap {
                assignments: match form {
                    StoredForm::Difference => anchor.clone(),
                    StoredForm::Periodic => vec![],
                },
            },
            label: "osc_violation".into(),
        },
        // STD self-loop: still within epsilon at the resolution period
        Transition {
            source: steady,
            target: steady,
            guard: Guard::all(g_steady_check),
            reset: ResetMap { assignments: vec![(c, ResetExpr::Const(0.0))] },
            label: "steady_check".into(),
        },
        // STD -> INIT: left the neighborhood
        Transition {
            source: steady,
            target: init,
            guard: g_steady_violation,
            reset: ResetMap { assignments: vec![(c, ResetExpr::Const(0.0))] },
            label: "steady_violation".into(),
        },
    ];

    let mut x0 = plant.initial();
    x0.push(0.0); // c
    x0.push(0.0); // p
    match form {
        StoredForm::Difference => x0.extend(std::iter::repeat(0.0).take(layout.plant_dim)),
        StoredForm::Periodic => x0.extend_from_slice(&plant.initial()[..layout.plant_dim]),
    }
    debug_assert_eq!(x0.len(), dim);

    let automaton = HybridAutomaton::new(
        format!("oscillation({})", plant.plant.name),
        dim,
        locations,
        transitions,
        init,
        x0,
    )?;

    Ok(PropertyAutomaton {
        automaton,
        layout,
        spec: spec.clone(),
        form,
        roles: OscillationRoles {
            init,
            learn,
            steady,
            osc,
            start_learning: 0,
            learn_steady: 1,
            learn_osc: 2,
            osc_check: 3,
            osc_violation: 4,
            steady_check: 5,
            steady_violation: 6,
        },
    })
}

fn property_field(plant: &AugmentedPlant, layout: StateLayout, form: StoredForm) -> VectorField {
    let aug = plant.dynamics.clone();
    let n = layout.plant_dim;
    let v = layout.param_dim;
    Arc::new(move |y, u, out| {
        aug(&y[..n + v], u, &mut out[..n + v]);
        out[n + v] = 1.0; // clock
        out[n + v + 1] = 0.0; // period
        for i in 0..n {
            out[n + v + 2 + i] = match form {
                StoredForm::Difference => out[i], // z' = x'
                StoredForm::Periodic => 0.0,      // x_p' = 0
            };
        }
    })
}

fn param_box_invariant(layout: &StateLayout, boxes: &[(f64, f64)]) -> Vec<Predicate> {
    let mut inv = Vec::new();
    for (pos, &(lo, hi)) in boxes.iter().enumerate() {
        let k = layout.params().start + pos;
        inv.push(Predicate::coord_ge(k, lo));
        inv.push(Predicate::coord_le(k, hi));
    }
    inv
}

/// The anchor reset: `x_p := x` in periodic form, `z := 0` in difference form.
fn anchor_reset(layout: &StateLayout, form: StoredForm) -> Vec<(usize, ResetExpr)> {
    (0..layout.plant_dim)
        .map(|i| {
            let s = layout.stored_coord(i);
            match form {
                StoredForm::Difference => (s, ResetExpr::Const(0.0)),
                StoredForm::Periodic => (s, ResetExpr::Copy(i)),
            }
        })
        .collect()
}

/// Learning-aware monitor policy: fires property transitions at the crossing
/// sample ("first enabled"), with the learning-return timing governed by the
/// [`LearningRule`].
#[derive(Clone)]
pub struct MonitorPolicy {
    epsilon: f64,
    learn_pairs: Arc<Vec<(usize, Option<usize>)>>,
    rule: LearningRule,
    learn_loc: LocationId,
    learn_steady: usize,
    learn_osc: usize,
    armed: bool,
    prev_in: bool,
    prev_norm: f64,
    entered: bool,
}

impl MonitorPolicy {
    fn learn_norm(&self, x: &[f64]) -> f64 {
        let mut m = 0.0f64;
        for &(i, j) in self.learn_pairs.iter() {
            let d = match j {
                Some(j) => (x[i] - x[j]).abs(),
                None => x[i].abs(),
            };
            if d > m {
                m = d;
            }
        }
        m
    }
}

impl TransitionPolicy for MonitorPolicy {
    fn choose(
        &mut self,
        _automaton: &HybridAutomaton,
        state: &HybridState,
        enabled: &[usize],
    ) -> Option<usize> {
        if state.location != self.learn_loc {
            self.entered = false;
            return enabled.first().copied();
        }
        if !self.entered {
            // first sight of this learning phase: the anchor was just taken
            self.entered = true;
            self.armed = false;
            self.prev_in = true;
            self.prev_norm = self.learn_norm(&state.x);
            return enabled.first().copied();
        }
        let nrm = self.learn_norm(&state.x);
        let in_ball = nrm <= self.epsilon;
        let gate = !self.rule.require_exit || self.armed;
        let mut fire = None;
        for &t in enabled {
            if t == self.learn_steady {
                if gate {
                    fire = Some(t);
                    break;
                }
            } else if t == self.learn_osc {
                let at_approach =
                    !self.rule.closest_approach || (self.prev_in && nrm > self.prev_norm);
                if gate && at_approach {
                    fire = Some(t);
                    break;
                }
            } else {
                fire = Some(t);
                break;
            }
        }
        if !in_ball {
            self.armed = true;
        }
        self.prev_in = in_ball;
        self.prev_norm = nrm;
        fire
    }

    fn save(&self) -> PolicyState {
        PolicyState::Monitor {
            armed: self.armed,
            prev_in: self.prev_in,
            prev_norm: self.prev_norm,
            entered: self.entered,
        }
    }

    fn load(&mut self, s: &PolicyState) {
        match s {
            PolicyState::Monitor { armed, prev_in, prev_norm, entered } => {
                self.armed = *armed;
                self.prev_in = *prev_in;
                self.prev_norm = *prev_norm;
                self.entered = *entered;
            }
            PolicyState::None => {
                self.armed = false;
                self.prev_in = false;
                self.prev_norm = 0.0;
                self.entered = false;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum VerdictKind {
    Oscillating { period: f64 },
    Steady,
    Falsified { time: f64, exit_value: f64 },
    Inconclusive,
}

/// Classification outcome with the trace-entry range that evidences it.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub evidence: Range<usize>,
}

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("trace does not visit any property location")]
    ForeignTrace,
}

/// Classify a trace of an oscillation property automaton. Pure: the same
/// trace always yields the same verdict.
///
/// `Falsified` is reported at the first violation jump after a period or
/// steady state was learned, even if oscillation was confirmed earlier.
pub fn classify_trace(trace: &Trace, prop: &PropertyAutomaton) -> Result<Verdict, ClassifyError> {
    let roles = &prop.roles;
    let known = [roles.init, roles.learn, roles.steady, roles.osc];
    if !trace.entries.iter().any(|e| known.contains(&e.state.location)) {
        return Err(ClassifyError::ForeignTrace);
    }

    let mut learned = false;
    let mut learned_idx = 0usize;
    let mut period = 0.0f64;
    let mut osc_loops = 0u32;
    let mut std_loops = 0u32;
    let mut oscillating: Option<(f64, usize)> = None;
    let mut steady_at: Option<usize> = None;

    for (idx, entry) in trace.entries.iter().enumerate() {
        let transition = match entry.event {
            TraceEvent::Jump { transition } => transition,
            _ => continue,
        };
        if transition == roles.learn_osc || transition == roles.learn_steady {
            learned = true;
            learned_idx = idx;
            period = entry.state.x[prop.layout.period()];
        } else if transition == roles.osc_check {
            osc_loops += 1;
            if osc_loops == prop.spec.cycles_to_confirm && oscillating.is_none() {
                oscillating = Some((period, idx));
            }
        } else if transition == roles.steady_check {
            std_loops += 1;
            if std_loops == 1 {
                steady_at = Some(idx);
            }
        } else if prop.is_violation(transition) && learned {
            let pre = &trace.entries[idx - 1].state;
            return Ok(Verdict {
                kind: VerdictKind::Falsified {
                    time: entry.state.t,
                    exit_value: prop.deviation(&pre.x),
                },
                evidence: learned_idx..idx + 1,
            });
        }
    }

    if let Some((p, idx)) = oscillating {
        return Ok(Verdict { kind: VerdictKind::Oscillating { period: p }, evidence: 0..idx + 1 });
    }
    if let Some(idx) = steady_at {
        return Ok(Verdict { kind: VerdictKind::Steady, evidence: 0..idx + 1 });
    }
    Ok(Verdict { kind: VerdictKind::Inconclusive, evidence: 0..trace.entries.len() })
}

// ---------------------------------------------------------------------------
// overshoot
// ---------------------------------------------------------------------------

/// Layout of the overshoot state `(x, x_ref, k, c, omega)`.
#[derive(Clone, Copy, Debug)]
pub struct OvershootLayout {
    pub plant_dim: usize,
    pub param_dim: usize,
}

impl OvershootLayout {
    pub fn dim(&self) -> usize {
        2 * self.plant_dim + self.param_dim + 2
    }

    pub fn reference(&self) -> Range<usize> {
        self.plant_dim..2 * self.plant_dim
    }

    pub fn clock(&self) -> usize {
        2 * self.plant_dim + self.param_dim
    }

    pub fn omega(&self) -> usize {
        2 * self.plant_dim + self.param_dim + 1
    }
}

pub struct OvershootSpec {
    /// Reference response dynamics `x_ref' = f*(x_ref)`, over `plant_dim`
    /// coordinates (no inputs).
    pub reference_dynamics: Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>,
    pub reference_initial: Vec<f64>,
    /// Sampling period of the peak tracker.
    pub delta: f64,
    /// Output coordinate compared against the reference.
    pub output: usize,
}

pub struct OvershootAutomaton {
    pub automaton: HybridAutomaton,
    pub layout: OvershootLayout,
}

/// Single-location automaton tracking the maximum peak `omega` of
/// `x - x_ref` every `delta` time units.
pub fn build_overshoot_automaton(
    spec: &OvershootSpec,
    plant: &AugmentedPlant,
) -> Result<OvershootAutomaton, PropertyError> {
    if spec.reference_initial.len() != plant.dim() {
        return Err(PropertyError::BadSpec(format!(
            "reference dimension {} does not match plant dimension {}",
            spec.reference_initial.len(),
            plant.dim()
        )));
    }
    if spec.output >= plant.dim() {
        return Err(PropertyError::BadSpec("output coordinate outside plant".into()));
    }
    let layout = OvershootLayout { plant_dim: plant.dim(), param_dim: plant.param_dim() };
    let n = layout.plant_dim;
    let v = layout.param_dim;
    let aug = plant.dynamics.clone();
    let refdyn = spec.reference_dynamics.clone();
    let field: VectorField = Arc::new(move |y, u, out| {
        // plant block and parameter block
        let mut tmp_in = Vec::with_capacity(n + v);
        tmp_in.extend_from_slice(&y[..n]);
        tmp_in.extend_from_slice(&y[2 * n..2 * n + v]);
        let mut tmp_out = vec![0.0; n + v];
        aug(&tmp_in, u, &mut tmp_out);
        out[..n].copy_from_slice(&tmp_out[..n]);
        refdyn(&y[n..2 * n], &mut out[n..2 * n]);
        out[2 * n..2 * n + v].copy_from_slice(&tmp_out[n..n + v]);
        out[2 * n + v] = 1.0; // clock
        out[2 * n + v + 1] = 0.0; // omega
    });

    let o = spec.output;
    let c = layout.clock();
    let w = layout.omega();
    let diff = AffineForm::new(vec![(o, 1.0), (n + o, -1.0)], 0.0);
    let guard = Guard::all(vec![
        Predicate { g: ScalarFn::Affine(diff.clone()), rel: Relation::Gt }, // x > x_ref
        Predicate::coord_ge(c, spec.delta),                                 // c = delta (crossing)
        Predicate::affine(vec![(o, 1.0), (n + o, -1.0), (w, -1.0)], 0.0, Relation::Gt), // omega < x - x_ref
    ]);
    let reset = ResetMap {
        assignments: vec![(w, ResetExpr::Affine(diff)), (c, ResetExpr::Const(0.0))],
    };

    let location = Location {
        name: "OS".into(),
        dynamics: field,
        invariant: param_box_invariant(
            &StateLayout { plant_dim: 2 * n, param_dim: v },
            &plant.param_boxes,
        ),
        input_box: plant.input_boxes.clone(),
    };
    let transitions = vec![Transition {
        source: LocationId(0),
        target: LocationId(0),
        guard,
        reset,
        label: "peak_update".into(),
    }];

    let mut x0 = Vec::with_capacity(layout.dim());
    x0.extend_from_slice(&plant.initial()[..n]);
    x0.extend_from_slice(&spec.reference_initial);
    x0.extend_from_slice(&plant.initial()[n..]);
    x0.push(0.0); // c
    x0.push(0.0); // omega

    let automaton = HybridAutomaton::new(
        format!("overshoot({})", plant.plant.name),
        layout.dim(),
        vec![location],
        transitions,
        LocationId(0),
        x0,
    )?;
    Ok(OvershootAutomaton { automaton, layout })
}

/// Final tracked peak of a trace of an overshoot automaton.
pub fn overshoot_value(trace: &Trace, layout: &OvershootLayout) -> f64 {
    trace.last_state().x[layout.omega()]
}
