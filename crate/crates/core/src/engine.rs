//! Deterministic discrete-event simulation of a pulse-coupled network.
//!
//! Phases advance at unit rate and are stored lazily as an anchor
//! `(time, phase)`; only fires and jumps touch them. Events at equal times are
//! ordered fires first, then pulse arrivals, then attacker decisions, then
//! measurements; remaining ties go by node id and insertion order.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{
    detector_record, evaluate_attack, evaluate_colluding, stealth_expiry, AttackerState, Oracle,
    VictimView,
};
use crate::error::{Error, Result};
use crate::graph::Topology;
use crate::mechanism::{JumpRule, MechanismConfig, PulseHistory};
use crate::metrics::containing_arc_of;
use crate::phase::{apply_jump_unchecked, Phase, PERIOD};
use crate::trace::{EventKind, MetricRecord, PulseOrigin, Role, Trace, TraceEvent};

const QUARTER: f64 = PERIOD / 4.0;
const THREE_QUARTERS: f64 = 3.0 * PERIOD / 4.0;
const HALF_PERIOD: f64 = PERIOD / 2.0;

/// Arc length below which the network counts as synchronized when settling.
pub const SETTLE_ARC: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DelaySpec {
    #[default]
    None,
    /// One independent draw per (pulse, receiver) from `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialPhases {
    /// One phase per node; attacker entries are ignored.
    Explicit { phases: Vec<f64> },
    /// Independent uniform draws from `[0, π)`.
    UniformHalfPeriod { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScriptedEmission {
    pub attacker: usize,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttackBehavior {
    /// Greedy, stealth-respecting arc enlargement.
    #[default]
    Stealthy,
    /// Emit exactly at the listed times, ignoring stealth.
    Scripted { emissions: Vec<ScriptedEmission> },
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub topology: Arc<Topology>,
    pub mechanism: MechanismConfig,
    pub attackers: Vec<usize>,
    pub colluding: bool,
    pub behavior: AttackBehavior,
    /// Let colluding attackers emit pulses that leave the arc unchanged.
    pub allow_neutral_emissions: bool,
    pub delay: DelaySpec,
    pub initial_phases: InitialPhases,
    pub horizon: f64,
    /// Seeds the delay stream.
    pub seed: u64,
    pub measure_interval: f64,
    /// Stop once the legitimate arc has stayed below [`SETTLE_ARC`] for this
    /// many periods.
    pub settle_periods: Option<f64>,
}

impl SimConfig {
    pub fn new(topology: Arc<Topology>, mechanism: MechanismConfig, initial: InitialPhases) -> Self {
        Self {
            topology,
            mechanism,
            attackers: Vec::new(),
            colluding: false,
            behavior: AttackBehavior::Stealthy,
            allow_neutral_emissions: false,
            delay: DelaySpec::None,
            initial_phases: initial,
            horizon: 200.0 * PERIOD,
            seed: 0,
            measure_interval: 0.1,
            settle_periods: None,
        }
    }

    pub fn with_attackers(mut self, attackers: Vec<usize>, colluding: bool) -> Self {
        self.attackers = attackers;
        self.colluding = colluding;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_delay(mut self, delay: DelaySpec, seed: u64) -> Self {
        self.delay = delay;
        self.seed = seed;
        self
    }

    pub fn with_behavior(mut self, behavior: AttackBehavior) -> Self {
        self.behavior = behavior;
        self
    }

    pub fn with_settle(mut self, periods: f64) -> Self {
        self.settle_periods = Some(periods);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.topology.node_count();
        self.mechanism.validate()?;
        if n == 0 {
            return Err(Error::Config("network has no nodes".into()));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::Config(format!("horizon {} must be positive and finite", self.horizon)));
        }
        if !(self.measure_interval.is_finite() && self.measure_interval > 0.0) {
            return Err(Error::Config(format!(
                "measure interval {} must be positive",
                self.measure_interval
            )));
        }
        let mut seen = vec![false; n];
        for &a in &self.attackers {
            if a >= n {
                return Err(Error::Config(format!("attacker {a} is not a node (N = {n})")));
            }
            if std::mem::replace(&mut seen[a], true) {
                return Err(Error::Config(format!("attacker {a} listed twice")));
            }
        }
        if self.attackers.len() == n {
            return Err(Error::Config("every node is an attacker".into()));
        }
        if let DelaySpec::Uniform { lo, hi } = self.delay {
            if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo <= hi) {
                return Err(Error::Config(format!("delay bounds [{lo}, {hi}] are invalid")));
            }
        }
        if let InitialPhases::Explicit { phases } = &self.initial_phases {
            if phases.len() != n {
                return Err(Error::Config(format!(
                    "{} initial phases given for {n} nodes",
                    phases.len()
                )));
            }
            for &p in phases {
                Phase::new(p)?;
            }
        }
        if let AttackBehavior::Scripted { emissions } = &self.behavior {
            for e in emissions {
                if !seen.get(e.attacker).copied().unwrap_or(false) {
                    return Err(Error::Config(format!(
                        "scripted emission from {} which is not an attacker",
                        e.attacker
                    )));
                }
                if !(e.time.is_finite() && e.time >= 0.0) {
                    return Err(Error::Config(format!("scripted emission time {}", e.time)));
                }
            }
        }
        if let Some(p) = self.settle_periods {
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::Config(format!("settle periods {p}")));
            }
        }
        for i in (0..n).filter(|i| !seen[*i]) {
            self.mechanism.rule(self.topology.degree(i)).map_err(|e| {
                Error::Config(format!("node {i}: {e}"))
            })?;
        }
        Ok(())
    }

    /// Initial phase of every node (attackers included, though unused).
    pub fn resolve_initial_phases(&self) -> Result<Vec<f64>> {
        let n = self.topology.node_count();
        match &self.initial_phases {
            InitialPhases::Explicit { phases } => Ok(phases.clone()),
            InitialPhases::UniformHalfPeriod { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok((0..n).map(|_| rng.random::<f64>() * std::f64::consts::PI).collect())
            }
        }
    }
}

/// One delay draw; zero when delays are disabled.
pub fn sample_delay<R: Rng + ?Sized>(rng: &mut R, spec: &DelaySpec) -> f64 {
    match *spec {
        DelaySpec::None => 0.0,
        DelaySpec::Uniform { lo, hi } => rng.random_range(lo..=hi),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Priority {
    Fire,
    PulseArrival,
    AttackerDecision,
    Measure,
}

#[derive(Debug, Clone, Copy)]
enum Payload {
    Fire { generation: u64 },
    Pulse { origin: PulseOrigin, emit_time: f64 },
    /// Evaluate every stealthy attacker.
    Decide,
    Scripted { attacker: usize },
    Measure,
}

#[derive(Debug, Clone, Copy)]
struct Queued {
    time: f64,
    priority: Priority,
    node: usize,
    seq: u64,
    payload: Payload,
}

impl Queued {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.priority.cmp(&other.priority))
            .then(self.node.cmp(&other.node))
            .then(self.seq.cmp(&other.seq))
    }
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.key_cmp(other) == Ordering::Equal
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Queued {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other.key_cmp(self)
    }
}

struct Oscillator {
    anchor_time: f64,
    anchor_phase: f64,
    generation: u64,
    rule: JumpRule,
    history: PulseHistory,
    detector: PulseHistory,
    in_degree: usize,
    flagged: bool,
}

impl Oscillator {
    fn phase_at(&self, t: f64) -> f64 {
        (self.anchor_phase + (t - self.anchor_time)).clamp(0.0, PERIOD)
    }
}

struct Sim<'a> {
    cfg: &'a SimConfig,
    now: f64,
    roles: Vec<Role>,
    nodes: Vec<Option<Oscillator>>,
    legit: Vec<usize>,
    attackers: Vec<AttackerState>,
    observed: Vec<bool>,
    queue: BinaryHeap<Queued>,
    seq: u64,
    pending_decisions: HashSet<u64>,
    rng: ChaCha8Rng,
    arc: f64,
    scratch: Vec<f64>,
    events: Vec<TraceEvent>,
    metrics: Vec<MetricRecord>,
    stealthy: bool,
}

impl Oracle for Sim<'_> {
    fn victim(&self, node: usize) -> VictimView {
        let osc = self.nodes[node].as_ref().expect("victims are legitimate");
        VictimView {
            phase: osc.phase_at(self.now),
            counts: osc.history.window_counts(self.now),
            rule: osc.rule,
        }
    }
}

impl<'a> Sim<'a> {
    fn new(cfg: &'a SimConfig) -> Result<Self> {
        cfg.validate()?;
        let topo = &*cfg.topology;
        let n = topo.node_count();
        let initial = cfg.resolve_initial_phases()?;
        let mut roles = vec![Role::Legitimate; n];
        for &a in &cfg.attackers {
            roles[a] = Role::Attacker;
        }
        let mut nodes = Vec::with_capacity(n);
        for i in 0..n {
            nodes.push(match roles[i] {
                Role::Attacker => None,
                Role::Legitimate => Some(Oscillator {
                    anchor_time: 0.0,
                    anchor_phase: initial[i],
                    generation: 0,
                    rule: cfg.mechanism.rule(topo.degree(i))?,
                    history: PulseHistory::new(),
                    detector: PulseHistory::new(),
                    in_degree: topo.in_degree(i),
                    flagged: false,
                }),
            });
        }
        let legit: Vec<usize> = (0..n).filter(|&i| roles[i] == Role::Legitimate).collect();
        let mut attackers: Vec<AttackerState> = cfg
            .attackers
            .iter()
            .map(|&a| {
                let obs = topo
                    .out_neighbors(a)
                    .iter()
                    .copied()
                    .filter(|&j| roles[j] == Role::Legitimate)
                    .collect();
                AttackerState::new(a, obs)
            })
            .collect();
        attackers.sort_by_key(|a| a.id);
        let mut observed = vec![false; n];
        for a in &attackers {
            for &j in &a.observed {
                observed[j] = true;
            }
        }
        let stealthy = matches!(cfg.behavior, AttackBehavior::Stealthy) && !attackers.is_empty();
        let mut sim = Self {
            cfg,
            now: 0.0,
            roles,
            nodes,
            legit,
            attackers,
            observed,
            queue: BinaryHeap::new(),
            seq: 0,
            pending_decisions: HashSet::new(),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            arc: 0.0,
            scratch: Vec::with_capacity(n),
            events: Vec::new(),
            metrics: Vec::new(),
            stealthy,
        };
        for &i in &sim.legit.clone() {
            let p = initial[i];
            let fire_at = if p == 0.0 { PERIOD } else { PERIOD - p };
            sim.push(fire_at, Priority::Fire, i, Payload::Fire { generation: 0 });
        }
        if let AttackBehavior::Scripted { emissions } = &cfg.behavior {
            for e in emissions {
                sim.push(e.time, Priority::AttackerDecision, e.attacker, Payload::Scripted { attacker: e.attacker });
            }
        }
        if sim.stealthy {
            sim.request_decision(0.0);
        }
        sim.push(0.0, Priority::Measure, 0, Payload::Measure);
        sim.arc = sim.legit_arc();
        Ok(sim)
    }

    fn push(&mut self, time: f64, priority: Priority, node: usize, payload: Payload) {
        self.seq += 1;
        self.queue.push(Queued {
            time,
            priority,
            node,
            seq: self.seq,
            payload,
        });
    }

    fn request_decision(&mut self, t: f64) {
        if self.stealthy && t <= self.cfg.horizon && self.pending_decisions.insert(t.to_bits()) {
            self.push(t, Priority::AttackerDecision, 0, Payload::Decide);
        }
    }

    /// Decision epochs at which a reception at `t` leaves the two windows.
    fn request_window_expiries(&mut self, t: f64) {
        for width in [QUARTER, THREE_QUARTERS] {
            let mut x = t + width;
            while x - width < t {
                x = x.next_up();
            }
            self.request_decision(x);
        }
    }

    fn legit_phases_into(&self, out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.legit
                .iter()
                .map(|&i| self.nodes[i].as_ref().map_or(0.0, |o| o.phase_at(self.now))),
        );
    }

    fn legit_arc(&mut self) -> f64 {
        let mut buf = std::mem::take(&mut self.scratch);
        self.legit_phases_into(&mut buf);
        let arc = containing_arc_of(&mut buf).map_or(0.0, |a| a.length);
        self.scratch = buf;
        arc
    }

    fn run(mut self) -> Result<Trace> {
        let initial_phases = self.cfg.resolve_initial_phases()?;
        let initial_arc = self.arc;
        let mut last_time = f64::NEG_INFINITY;
        let mut settled_since: Option<f64> = None;
        let mut end_time = self.cfg.horizon;
        while let Some(ev) = self.queue.pop() {
            if ev.time > self.cfg.horizon {
                break;
            }
            // zero-delay pulses emitted by a decision share its timestamp but
            // sort before it, so only time is required to be monotone
            if ev.time < last_time {
                return Err(Error::Internal(format!(
                    "event at t = {} popped after t = {last_time}",
                    ev.time
                )));
            }
            last_time = ev.time;
            self.now = ev.time;
            match ev.payload {
                Payload::Fire { generation } => self.on_fire(ev.node, generation),
                Payload::Pulse { origin, emit_time } => self.on_pulse(ev.node, origin, emit_time),
                Payload::Decide => {
                    self.pending_decisions.remove(&ev.time.to_bits());
                    self.on_decide();
                }
                Payload::Scripted { attacker } => self.emit(attacker, 0.0),
                Payload::Measure => self.on_measure(),
            }
            if let Some(periods) = self.cfg.settle_periods {
                if self.arc < SETTLE_ARC {
                    let since = *settled_since.get_or_insert(self.now);
                    if self.now - since >= periods * PERIOD {
                        end_time = self.now;
                        break;
                    }
                } else {
                    settled_since = None;
                }
            }
        }
        Ok(Trace {
            roles: self.roles,
            coupling: self.cfg.mechanism.coupling,
            horizon: self.cfg.horizon,
            end_time,
            initial_phases,
            initial_arc,
            events: self.events,
            metrics: self.metrics,
        })
    }

    fn on_fire(&mut self, node: usize, generation: u64) {
        let now = self.now;
        let osc = self.nodes[node].as_mut().expect("only legitimate nodes fire");
        if osc.generation != generation {
            return;
        }
        osc.anchor_time = now;
        osc.anchor_phase = 0.0;
        osc.generation += 1;
        let next_gen = osc.generation;
        let flagged = osc.flagged;
        self.push(now + PERIOD, Priority::Fire, node, Payload::Fire { generation: next_gen });
        let topo = Arc::clone(&self.cfg.topology);
        for &j in topo.out_neighbors(node) {
            let delay = sample_delay(&mut self.rng, &self.cfg.delay);
            self.push(
                now + delay,
                Priority::PulseArrival,
                j,
                Payload::Pulse {
                    origin: PulseOrigin::Legitimate(node),
                    emit_time: now,
                },
            );
        }
        self.events.push(TraceEvent {
            time: now,
            node,
            kind: EventKind::Fire,
            phase_before: PERIOD,
            phase_after: 0.0,
            jump_applied: false,
            arc: self.arc,
            flagged,
        });
        if self.observed[node] {
            self.request_decision(now);
        }
    }

    fn on_pulse(&mut self, node: usize, origin: PulseOrigin, emit_time: f64) {
        let now = self.now;
        let coupling = self.cfg.mechanism.coupling;
        let Some(osc) = self.nodes[node].as_mut() else {
            return;
        };
        let counts = osc.history.window_counts(now);
        let jump = osc.rule.admits(counts, now, 0.0);
        let before = osc.phase_at(now);
        let mut after = before;
        let mut moved = false;
        let mut fire = None;
        if jump {
            after = apply_jump_unchecked(before, coupling).value();
            if after != before {
                moved = true;
                osc.anchor_time = now;
                osc.anchor_phase = after;
                osc.generation += 1;
                fire = Some((now + (PERIOD - after), osc.generation));
            }
        }
        osc.history.push(now);
        osc.history.prune(now);
        detector_record(&mut osc.detector, &mut osc.flagged, osc.in_degree, now);
        osc.detector.prune(now);
        let flagged = osc.flagged;
        if let Some((t, generation)) = fire {
            self.push(t.max(now), Priority::Fire, node, Payload::Fire { generation });
        }
        if moved {
            self.arc = self.legit_arc();
        }
        self.events.push(TraceEvent {
            time: now,
            node,
            kind: EventKind::Pulse {
                origin,
                emit_time,
                counts,
            },
            phase_before: before,
            phase_after: after,
            jump_applied: jump,
            arc: self.arc,
            flagged,
        });
        if self.observed[node] {
            self.request_decision(now);
            self.request_window_expiries(now);
        }
    }

    fn on_decide(&mut self) {
        let now = self.now;
        let mut emit: Vec<(usize, f64)> = Vec::new();
        if self.cfg.colluding {
            let d = evaluate_colluding(
                &self.attackers,
                self,
                &self.cfg.mechanism,
                now,
                self.cfg.allow_neutral_emissions,
            );
            for (k, &e) in d.emit.iter().enumerate() {
                if e {
                    emit.push((k, d.predicted_arc_gain));
                }
            }
        } else {
            for (k, a) in self.attackers.iter().enumerate() {
                let d = evaluate_attack(a, self, &self.cfg.mechanism, now);
                if d.emit {
                    emit.push((k, d.predicted_arc_gain));
                }
            }
        }
        for (k, gain) in emit {
            let id = self.attackers[k].id;
            self.emit(id, gain);
        }
    }

    fn emit(&mut self, attacker: usize, gain: f64) {
        let now = self.now;
        if let Some(a) = self.attackers.iter_mut().find(|a| a.id == attacker) {
            a.last_emission = Some(now);
        }
        let mut snapshot = Vec::with_capacity(self.legit.len());
        self.legit_phases_into(&mut snapshot);
        self.events.push(TraceEvent {
            time: now,
            node: attacker,
            kind: EventKind::AttackEmit {
                gain,
                legit_phases: snapshot,
            },
            phase_before: 0.0,
            phase_after: 0.0,
            jump_applied: false,
            arc: self.arc,
            flagged: false,
        });
        let topo = Arc::clone(&self.cfg.topology);
        for &j in topo.out_neighbors(attacker) {
            let delay = sample_delay(&mut self.rng, &self.cfg.delay);
            self.push(
                now + delay,
                Priority::PulseArrival,
                j,
                Payload::Pulse {
                    origin: PulseOrigin::Attacker(attacker),
                    emit_time: now,
                },
            );
        }
        if self.stealthy {
            self.request_decision(stealth_expiry(now));
        }
    }

    fn on_measure(&mut self) {
        let now = self.now;
        let mut buf = std::mem::take(&mut self.scratch);
        self.legit_phases_into(&mut buf);
        let mut sync = 0.0f64;
        for (i, a) in buf.iter().enumerate() {
            for b in &buf[i + 1..] {
                let d = (a - b).abs();
                sync = sync.max(d.min(PERIOD - d));
            }
        }
        self.scratch = buf;
        let flagged_nodes = self.nodes.iter().flatten().filter(|o| o.flagged).count();
        self.metrics.push(MetricRecord {
            time: now,
            arc: self.arc,
            sync_error: sync,
            flagged_nodes,
        });
        // multiply rather than accumulate so sample times do not drift
        let k = (now / self.cfg.measure_interval).round() + 1.0;
        self.push(k * self.cfg.measure_interval, Priority::Measure, 0, Payload::Measure);
    }
}

/// Runs one simulation to its horizon (or until it settles).
pub fn run(config: &SimConfig) -> Result<Trace> {
    Sim::new(config)?.run()
}

/// Half a period; attacker emissions must be spaced by more than this.
pub const STEALTH_SPACING: f64 = HALF_PERIOD;

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    fn two_node(phases: Vec<f64>, mech: MechanismConfig) -> SimConfig {
        SimConfig::new(
            Arc::new(Topology::complete(2)),
            mech,
            InitialPhases::Explicit { phases },
        )
    }

    #[test]
    fn queue_orders_by_time_then_priority_then_node() {
        let mut heap = BinaryHeap::new();
        let mk = |time, priority, node, seq| Queued {
            time,
            priority,
            node,
            seq,
            payload: Payload::Measure,
        };
        heap.push(mk(1.0, Priority::Measure, 0, 1));
        heap.push(mk(1.0, Priority::Fire, 5, 2));
        heap.push(mk(1.0, Priority::Fire, 2, 3));
        heap.push(mk(0.5, Priority::Measure, 9, 4));
        heap.push(mk(1.0, Priority::PulseArrival, 0, 5));
        let order: Vec<(f64, usize)> = std::iter::from_fn(|| heap.pop()).map(|q| (q.time, q.node)).collect();
        assert_eq!(order, vec![(0.5, 9), (1.0, 2), (1.0, 5), (1.0, 0), (1.0, 0)]);
    }

    #[test]
    fn conventional_pair_first_fire() {
        // node 1 fires at 2π − 5; node 0 sits at 2π − 4 < π and is pulled back
        let cfg = two_node(vec![1.0, 5.0], MechanismConfig::conventional(0.5)).with_horizon(TAU - 5.0 + 1e-9);
        let trace = run(&cfg).unwrap();
        let fire = &trace.events[0];
        assert_eq!((fire.node, fire.kind.clone()), (1, EventKind::Fire));
        let pulse = &trace.events[1];
        assert_eq!(pulse.node, 0);
        let before = TAU - 4.0;
        assert!((pulse.phase_before - before).abs() < 1e-12);
        assert!((pulse.phase_after - 0.5 * before).abs() < 1e-12);
    }

    #[test]
    fn absorption_with_unit_coupling() {
        // l = 1 sends any phase above π straight to 2π: both fire together
        let cfg = two_node(vec![4.0, 5.0], MechanismConfig::conventional(1.0)).with_horizon(3.0 * TAU);
        let trace = run(&cfg).unwrap();
        assert!(trace.final_arc() < 1e-12);
        let f0 = trace.fire_times(0);
        let f1 = trace.fire_times(1);
        assert!((f0[0] - f1[0]).abs() < 1e-12);
    }

    #[test]
    fn cutoff_blocks_first_period() {
        // with d = 1 under Mechanism 2, λ = 0 and λ̄ = 1; nothing jumps before T
        let cfg = two_node(vec![0.5, 4.0], MechanismConfig::mechanism2(0.5)).with_horizon(TAU);
        let trace = run(&cfg).unwrap();
        assert!(trace
            .events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::Pulse { .. }))
            .all(|e| !e.jump_applied));
    }

    #[test]
    fn measure_samples_are_regular() {
        let cfg = two_node(vec![0.0, 1.0], MechanismConfig::conventional(0.1)).with_horizon(1.0);
        let trace = run(&cfg).unwrap();
        assert_eq!(trace.metrics.len(), 11);
        assert!((trace.metrics[10].time - 1.0).abs() < 1e-12);
        assert!((trace.metrics[0].sync_error - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_configs() {
        let base = || two_node(vec![0.0, 1.0], MechanismConfig::conventional(0.1));
        assert!(matches!(run(&base().with_horizon(0.0)), Err(Error::Config(_))));
        assert!(matches!(run(&base().with_attackers(vec![2], false)), Err(Error::Config(_))));
        assert!(matches!(run(&base().with_attackers(vec![0, 1], false)), Err(Error::Config(_))));
        assert!(matches!(
            run(&base().with_delay(DelaySpec::Uniform { lo: 0.2, hi: 0.1 }, 0)),
            Err(Error::Config(_))
        ));
        let wrong_len = two_node(vec![0.0], MechanismConfig::conventional(0.1));
        assert!(matches!(run(&wrong_len), Err(Error::Config(_))));
        let bad_phase = two_node(vec![0.0, 7.0], MechanismConfig::conventional(0.1));
        assert!(matches!(run(&bad_phase), Err(Error::PhaseDomain(_))));
        assert!(matches!(
            run(&two_node(vec![0.0, 1.0], MechanismConfig::conventional(1.5))),
            Err(Error::Coupling(_))
        ));
    }

    #[test]
    fn delays_stay_in_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spec = DelaySpec::Uniform { lo: 0.1, hi: 0.3 };
        for _ in 0..1000 {
            let d = sample_delay(&mut rng, &spec);
            assert!((0.1..=0.3).contains(&d));
        }
        assert_eq!(sample_delay(&mut rng, &DelaySpec::None), 0.0);
    }

    #[test]
    fn isolated_attack_pulse_flags_receiver() {
        // node 0 has in-degree 1; two scripted attacker pulses π/2 apart
        let topo = Topology::from_edges(2, [(1, 0)]).unwrap();
        let cfg = SimConfig::new(
            Arc::new(topo),
            MechanismConfig::conventional(0.1),
            InitialPhases::Explicit { phases: vec![0.0, 0.0] },
        )
        .with_attackers(vec![1], false)
        .with_behavior(AttackBehavior::Scripted {
            emissions: vec![
                ScriptedEmission { attacker: 1, time: 1.0 },
                ScriptedEmission { attacker: 1, time: 1.0 + PI / 2.0 },
            ],
        })
        .with_horizon(4.0);
        let trace = run(&cfg).unwrap();
        assert!(trace.any_flagged());
    }
}
