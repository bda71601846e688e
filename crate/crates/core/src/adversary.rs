//! Stealthy Byzantine attackers and the pulse-count detector.
//!
//! An attacker is stealthy when its own emissions are spaced by strictly more
//! than T/2: every in-neighbor then contributes at most one pulse to any
//! half-period window, so a receiver never hears more than its in-degree.
//! Attackers see the exact state (phase and pulse history) of the legitimate
//! oscillators they can reach, and emit only when a pulse would widen the
//! containing arc of that set.

use crate::mechanism::{JumpRule, MechanismConfig, PulseHistory, WindowCounts};
use crate::metrics::containing_arc_of;
use crate::phase::{apply_jump_unchecked, PERIOD};

const HALF_PERIOD: f64 = PERIOD / 2.0;

/// Smallest arc growth that counts as an enlargement.
pub const ENLARGEMENT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct AttackerState {
    pub id: usize,
    pub last_emission: Option<f64>,
    /// Legitimate out-neighbors, ascending.
    pub observed: Vec<usize>,
}

impl AttackerState {
    pub fn new(id: usize, mut observed: Vec<usize>) -> Self {
        observed.sort_unstable();
        observed.dedup();
        Self {
            id,
            last_emission: None,
            observed,
        }
    }
}

/// True iff the attacker has never emitted or its last emission is more than
/// T/2 before `t`.
pub fn stealth_ok(state: &AttackerState, t: f64) -> bool {
    state.last_emission.is_none_or(|last| t - last > HALF_PERIOD)
}

/// Earliest representable time at which [`stealth_ok`] holds again.
pub fn stealth_expiry(last_emission: f64) -> f64 {
    let mut t = last_emission + HALF_PERIOD;
    while t - last_emission <= HALF_PERIOD {
        t = t.next_up();
    }
    t
}

/// What an attacker can read about one legitimate neighbor at the decision
/// instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VictimView {
    pub phase: f64,
    pub counts: WindowCounts,
    pub rule: JumpRule,
}

/// Read access to the current state of legitimate oscillators.
pub trait Oracle {
    fn victim(&self, node: usize) -> VictimView;
}

impl<F: Fn(usize) -> VictimView> Oracle for F {
    fn victim(&self, node: usize) -> VictimView {
        self(node)
    }
}

/// Oracle over explicit per-node states, used by fixtures and replays.
#[derive(Debug, Clone, Default)]
pub struct SnapshotOracle {
    pub victims: Vec<Option<(f64, PulseHistory, JumpRule)>>,
    pub now: f64,
}

impl Oracle for SnapshotOracle {
    fn victim(&self, node: usize) -> VictimView {
        let (phase, history, rule) = self.victims[node]
            .as_ref()
            .expect("oracle queried for an unknown victim");
        VictimView {
            phase: *phase,
            counts: history.window_counts(self.now),
            rule: *rule,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub emit: bool,
    pub predicted_arc_gain: f64,
}

/// Predicted change of the observed set's containing arc if `pulses` arrive at
/// `t`, processed in order. Each entry lists the victims one pulse reaches.
fn predicted_gain<O: Oracle + ?Sized>(
    view: &[usize],
    pulses: &[&[usize]],
    oracle: &O,
    coupling: f64,
    t: f64,
) -> f64 {
    let mut phases: Vec<f64> = Vec::with_capacity(view.len());
    let mut extra = vec![0usize; view.len()];
    let mut states: Vec<VictimView> = Vec::with_capacity(view.len());
    for &v in view {
        let s = oracle.victim(v);
        phases.push(s.phase);
        states.push(s);
    }
    let mut before = phases.clone();
    let before = containing_arc_of(&mut before).map_or(0.0, |a| a.length);
    for targets in pulses {
        for node in *targets {
            let Ok(k) = view.binary_search(node) else {
                continue;
            };
            let s = &states[k];
            let counts = WindowCounts {
                quarter: s.counts.quarter + extra[k],
                three_quarter: s.counts.three_quarter + extra[k],
            };
            if s.rule.admits(counts, t, 0.0) {
                phases[k] = apply_jump_unchecked(phases[k], coupling).value();
            }
            extra[k] += 1;
        }
    }
    let after = containing_arc_of(&mut phases).map_or(0.0, |a| a.length);
    after - before
}

/// Non-colluding decision: emit iff stealthy and one pulse at `t` strictly
/// widens the containing arc of the attacker's observed neighbors.
pub fn evaluate_attack<O: Oracle + ?Sized>(
    attacker: &AttackerState,
    oracle: &O,
    mech: &MechanismConfig,
    t: f64,
) -> Decision {
    if attacker.observed.is_empty() {
        return Decision {
            emit: false,
            predicted_arc_gain: 0.0,
        };
    }
    let gain = predicted_gain(
        &attacker.observed,
        &[attacker.observed.as_slice()],
        oracle,
        mech.coupling,
        t,
    );
    Decision {
        emit: stealth_ok(attacker, t) && gain > ENLARGEMENT_EPS,
        predicted_arc_gain: gain,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupDecision {
    /// Per member of the group (same order): whether it emits at `t`.
    pub emit: Vec<bool>,
    pub predicted_arc_gain: f64,
}

/// Colluding decision over the union of the members' observed sets.
///
/// Searches emission sets of increasing size among stealth-eligible members
/// (pulses applied in ascending attacker id) and returns the smallest set that
/// strictly widens the union arc, preferring the largest gain within a size.
/// With `allow_neutral`, if nothing widens the arc, every eligible member
/// emits when their joint effect leaves the arc unchanged.
pub fn evaluate_colluding<O: Oracle + ?Sized>(
    group: &[AttackerState],
    oracle: &O,
    mech: &MechanismConfig,
    t: f64,
    allow_neutral: bool,
) -> GroupDecision {
    let mut none = GroupDecision {
        emit: vec![false; group.len()],
        predicted_arc_gain: 0.0,
    };
    let mut view: Vec<usize> = group.iter().flat_map(|a| a.observed.iter().copied()).collect();
    view.sort_unstable();
    view.dedup();
    if view.is_empty() {
        return none;
    }
    let mut order: Vec<usize> = (0..group.len()).collect();
    order.sort_by_key(|&k| group[k].id);
    let eligible: Vec<usize> = order
        .into_iter()
        .filter(|&k| stealth_ok(&group[k], t))
        .collect();
    if eligible.is_empty() {
        return none;
    }
    let gain_of = |members: &[usize]| {
        let pulses: Vec<&[usize]> = members.iter().map(|&k| group[k].observed.as_slice()).collect();
        predicted_gain(&view, &pulses, oracle, mech.coupling, t)
    };
    for size in 1..=eligible.len() {
        let mut best: Option<(f64, Vec<usize>)> = None;
        for_each_combination(&eligible, size, &mut |members| {
            let gain = gain_of(members);
            if gain > ENLARGEMENT_EPS && best.as_ref().is_none_or(|(g, _)| gain > *g) {
                best = Some((gain, members.to_vec()));
            }
        });
        if let Some((gain, members)) = best {
            for k in members {
                none.emit[k] = true;
            }
            none.predicted_arc_gain = gain;
            return none;
        }
    }
    if allow_neutral {
        let gain = gain_of(&eligible);
        if gain.abs() <= ENLARGEMENT_EPS {
            for &k in &eligible {
                none.emit[k] = true;
            }
            none.predicted_arc_gain = gain;
        }
    }
    none
}

/// Visits every `size`-subset of `items` in lexicographic order.
fn for_each_combination(items: &[usize], size: usize, visit: &mut dyn FnMut(&[usize])) {
    fn rec(items: &[usize], size: usize, start: usize, acc: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if acc.len() == size {
            visit(acc);
            return;
        }
        let needed = size - acc.len();
        for i in start..=items.len() - needed {
            acc.push(items[i]);
            rec(items, size, i + 1, acc, visit);
            acc.pop();
        }
    }
    if size <= items.len() {
        rec(items, size, 0, &mut Vec::with_capacity(size), visit);
    }
}

/// Pulse-count attack detector: a node that hears more than its in-degree
/// pulses within half a period knows an attacker is present.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorState {
    pub receptions: Vec<PulseHistory>,
    pub thresholds: Vec<usize>,
    pub flagged: Vec<bool>,
}

impl DetectorState {
    pub fn new(in_degrees: Vec<usize>) -> Self {
        let n = in_degrees.len();
        Self {
            receptions: vec![PulseHistory::new(); n],
            thresholds: in_degrees,
            flagged: vec![false; n],
        }
    }

    pub fn flagged_count(&self) -> usize {
        self.flagged.iter().filter(|&&f| f).count()
    }
}

/// Records a reception at `node` and flags it if `(t − T/2, t]` now holds more
/// than `d⁻(node)` receptions. Flags are sticky.
pub fn detector_step(mut det: DetectorState, node: usize, t: f64) -> DetectorState {
    detector_record(&mut det.receptions[node], &mut det.flagged[node], det.thresholds[node], t);
    det
}

/// In-place form of [`detector_step`] over one node's reception history.
pub fn detector_record(history: &mut PulseHistory, flagged: &mut bool, in_degree: usize, t: f64) {
    history.push(t);
    if history.count_within(t, HALF_PERIOD) > in_degree {
        *flagged = true;
    }
}
