//! Named trace properties used by tests, campaigns and scenario assertions.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Topology;
use crate::mechanism::MechanismConfig;
use crate::metrics::{contraction_factors, round_boundaries, straddles_firing_point, time_to_sync};
use crate::phase::{Phase, PERIOD};
use crate::trace::{EventKind, PulseOrigin, Trace};

/// Default slack for floating-point comparisons.
pub const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// Legitimate arc drops below the threshold before the horizon.
    Converges,
    /// Legitimate arc at the end of the run is at least the threshold.
    NotConverged,
    /// Arc never grows across an applied event.
    MonotoneArc,
    /// Consecutive fires of a legitimate node are at most 3T/2 apart.
    FireGap,
    /// After the arc first falls below 1e-9 every inter-fire gap is T.
    Period,
    /// Arc shrinks by at least (1 − l/2) over every two firing rounds.
    Contraction,
    /// Attacker emissions are more than T/2 apart.
    Stealth,
    /// Every attack emission happens while legitimate phases straddle 2π.
    AttackWindow,
    NoDetectorFlags,
    DetectorFlagged,
    /// No receiver hears more than its in-degree within a closed T/2 window.
    PulseBound,
    /// Each firing round after the first period carries a legitimate pulse
    /// that passes the three-quarter cut-off at its receiver.
    LegitCutoffAvailable,
}

impl Check {
    pub const ALL: [Check; 12] = [
        Check::Converges,
        Check::NotConverged,
        Check::MonotoneArc,
        Check::FireGap,
        Check::Period,
        Check::Contraction,
        Check::Stealth,
        Check::AttackWindow,
        Check::NoDetectorFlags,
        Check::DetectorFlagged,
        Check::PulseBound,
        Check::LegitCutoffAvailable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Converges => "converges",
            Check::NotConverged => "not_converged",
            Check::MonotoneArc => "monotone_arc",
            Check::FireGap => "fire_gap",
            Check::Period => "period",
            Check::Contraction => "contraction",
            Check::Stealth => "stealth",
            Check::AttackWindow => "attack_window",
            Check::NoDetectorFlags => "no_detector_flags",
            Check::DetectorFlagged => "detector_flagged",
            Check::PulseBound => "pulse_bound",
            Check::LegitCutoffAvailable => "legit_cutoff_available",
        }
    }

    /// Threshold used when an assertion does not give one.
    pub fn default_tolerance(self) -> f64 {
        match self {
            Check::Converges => 1e-6,
            Check::NotConverged => 0.1,
            _ => TOL,
        }
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown check `{s}`")))
    }
}

/// What a check needs beyond the trace.
#[derive(Debug, Clone, Copy)]
pub struct CheckContext<'a> {
    pub topology: &'a Topology,
    pub mechanism: &'a MechanismConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub check: Check,
    pub passed: bool,
    pub detail: String,
}

pub fn evaluate(check: Check, tolerance: f64, trace: &Trace, ctx: CheckContext<'_>) -> CheckOutcome {
    let result = match check {
        Check::Converges => converges(trace, tolerance),
        Check::NotConverged => not_converged(trace, tolerance),
        Check::MonotoneArc => monotone_arc(trace, tolerance),
        Check::FireGap => fire_gap(trace, 1.5 * PERIOD + tolerance),
        Check::Period => period_after_sync(trace, tolerance),
        Check::Contraction => contraction(trace, tolerance),
        Check::Stealth => stealth(trace),
        Check::AttackWindow => attack_window(trace),
        Check::NoDetectorFlags => no_detector_flags(trace),
        Check::DetectorFlagged => {
            if trace.any_flagged() {
                Ok(())
            } else {
                Err("no node was flagged".into())
            }
        }
        Check::PulseBound => pulse_bound(trace, ctx.topology),
        Check::LegitCutoffAvailable => legit_cutoff_available(trace, ctx),
    };
    CheckOutcome {
        check,
        passed: result.is_ok(),
        detail: result.err().unwrap_or_default(),
    }
}

pub type CheckResult = std::result::Result<(), String>;

pub fn converges(trace: &Trace, threshold: f64) -> CheckResult {
    match time_to_sync(trace, threshold) {
        Some(t) if t <= trace.horizon => Ok(()),
        _ => Err(format!(
            "arc {:.3e} at t = {:.3} is not below {threshold:e}",
            trace.final_arc(),
            trace.end_time
        )),
    }
}

pub fn not_converged(trace: &Trace, threshold: f64) -> CheckResult {
    let arc = trace.final_arc();
    if arc >= threshold {
        Ok(())
    } else {
        Err(format!("arc {arc:.3e} fell below {threshold}"))
    }
}

pub fn monotone_arc(trace: &Trace, tol: f64) -> CheckResult {
    let mut prev = trace.initial_arc;
    for e in &trace.events {
        if e.arc > prev + tol {
            return Err(format!(
                "arc grew from {prev:.12} to {:.12} at t = {} ({} at node {})",
                e.arc,
                e.time,
                e.kind.label(),
                e.node
            ));
        }
        prev = e.arc;
    }
    Ok(())
}

/// Largest gap between consecutive fires of a legitimate node, counting the
/// start of the run as a virtual fire.
pub fn max_fire_gap(trace: &Trace) -> f64 {
    let mut last: Vec<f64> = vec![0.0; trace.roles.len()];
    let mut worst: f64 = 0.0;
    for e in trace.events.iter().filter(|e| matches!(e.kind, EventKind::Fire)) {
        worst = worst.max(e.time - last[e.node]);
        last[e.node] = e.time;
    }
    worst
}

pub fn fire_gap(trace: &Trace, bound: f64) -> CheckResult {
    let gap = max_fire_gap(trace);
    if gap <= bound {
        Ok(())
    } else {
        Err(format!("fire gap {gap} exceeds {bound}"))
    }
}

pub fn period_after_sync(trace: &Trace, tol: f64) -> CheckResult {
    let start = if trace.initial_arc < TOL {
        Some(0.0)
    } else {
        trace.events.iter().find(|e| e.arc < TOL).map(|e| e.time)
    };
    let Some(start) = start else {
        return Err("arc never fell below 1e-9".into());
    };
    let mut last: Vec<Option<f64>> = vec![None; trace.roles.len()];
    for e in trace.events.iter().filter(|e| e.time >= start && matches!(e.kind, EventKind::Fire)) {
        if let Some(prev) = last[e.node] {
            let gap = e.time - prev;
            if (gap - PERIOD).abs() > tol {
                return Err(format!("node {} fired {gap} after its previous fire at {prev}", e.node));
            }
        }
        last[e.node] = Some(e.time);
    }
    Ok(())
}

pub fn contraction(trace: &Trace, tol: f64) -> CheckResult {
    let bound = 1.0 - trace.coupling / 2.0;
    for c in contraction_factors(trace) {
        if c.delta_before > TOL && c.ratio.is_some_and(|r| r > bound + tol) {
            return Err(format!(
                "round {}: arc {} -> {} (ratio {:?} > {bound})",
                c.round, c.delta_before, c.delta_after, c.ratio
            ));
        }
    }
    Ok(())
}

/// Smallest `(1 − l/2) − ratio` over the measured two-round contractions.
pub fn min_contraction_margin(trace: &Trace) -> Option<f64> {
    let bound = 1.0 - trace.coupling / 2.0;
    contraction_factors(trace)
        .iter()
        .filter(|c| c.delta_before > TOL)
        .filter_map(|c| c.ratio)
        .map(|r| bound - r)
        .reduce(f64::min)
}

pub fn stealth(trace: &Trace) -> CheckResult {
    let mut last: Vec<Option<f64>> = vec![None; trace.roles.len()];
    for e in trace.emissions() {
        if let Some(prev) = last[e.node] {
            if e.time - prev <= PERIOD / 2.0 {
                return Err(format!("attacker {} emitted at {prev} and {}", e.node, e.time));
            }
        }
        last[e.node] = Some(e.time);
    }
    Ok(())
}

pub fn attack_window(trace: &Trace) -> CheckResult {
    for e in trace.emissions() {
        if let EventKind::AttackEmit { legit_phases, .. } = &e.kind {
            let phases: Vec<Phase> = legit_phases.iter().map(|&p| Phase::clamped(p)).collect();
            if !straddles_firing_point(&phases) {
                return Err(format!("attacker {} emitted at {} outside the attack window", e.node, e.time));
            }
        }
    }
    Ok(())
}

pub fn no_detector_flags(trace: &Trace) -> CheckResult {
    match trace.events.iter().find(|e| e.flagged) {
        None => Ok(()),
        Some(e) => Err(format!("node {} flagged at t = {}", e.node, e.time)),
    }
}

/// Every closed window `[t, t + T/2]` holds at most `d⁻(i)` receptions at `i`.
pub fn pulse_bound(trace: &Trace, topo: &Topology) -> CheckResult {
    let mut receptions: Vec<Vec<f64>> = vec![Vec::new(); trace.roles.len()];
    for e in &trace.events {
        if matches!(e.kind, EventKind::Pulse { .. }) {
            receptions[e.node].push(e.time);
        }
    }
    for (i, times) in receptions.iter().enumerate() {
        let bound = topo.in_degree(i);
        let mut lo = 0;
        for hi in 0..times.len() {
            while times[hi] - times[lo] > PERIOD / 2.0 {
                lo += 1;
            }
            if hi - lo + 1 > bound {
                return Err(format!(
                    "node {i} heard {} pulses within [{}, {}] (in-degree {bound})",
                    hi - lo + 1,
                    times[lo],
                    times[hi]
                ));
            }
        }
    }
    Ok(())
}

pub fn legit_cutoff_available(trace: &Trace, ctx: CheckContext<'_>) -> CheckResult {
    let bounds = round_boundaries(trace);
    let mut lambda_bar = vec![usize::MAX; trace.roles.len()];
    for i in trace.legitimate() {
        let rule = ctx
            .mechanism
            .rule(ctx.topology.degree(i))
            .map_err(|e| e.to_string())?;
        if let Some(th) = rule.thresholds() {
            lambda_bar[i] = th.lambda_bar;
        }
    }
    let mut prev = 0.0;
    for &b in &bounds {
        let (lo, hi) = (prev, b);
        prev = b;
        if lo < PERIOD || trace.arc_at(lo) < TOL {
            continue;
        }
        let found = trace
            .events
            .iter()
            .filter(|e| e.time > lo && e.time <= hi)
            .any(|e| match e.kind {
                EventKind::Pulse {
                    origin: PulseOrigin::Legitimate(_),
                    counts,
                    ..
                } => counts.three_quarter < lambda_bar[e.node],
                _ => false,
            });
        if !found {
            return Err(format!("round ({lo}, {hi}] has no legitimate pulse under the cut-off"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for c in Check::ALL {
            assert_eq!(c.name().parse::<Check>().unwrap(), c);
            let json = serde_json::to_string(&c).unwrap();
            assert_eq!(json, format!("\"{}\"", c.name()));
        }
        assert!("bogus".parse::<Check>().is_err());
    }
}
