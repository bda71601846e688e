//! Circular statistics over oscillator phases and round-based measurements
//! over traces.

use crate::error::{Error, Result};
use crate::phase::Phase;
use crate::scalar::Scalar;
use crate::trace::{EventKind, Trace};

/// Shortest arc of the unit circle containing a set of phases.
///
/// Phases advance in the positive direction. `leading` is the most advanced
/// phase on the arc (next to fire); `terminating` is the laggard. Walking
/// forward from `terminating` by `length` reaches `leading`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcReport<S = f64> {
    pub length: S,
    pub leading: Phase<S>,
    pub terminating: Phase<S>,
}

impl<S: Scalar> ArcReport<S> {
    /// True if the arc passes through the firing point 0 ≡ 2π (strictly
    /// inside, or at an endpoint of a non-degenerate arc).
    pub fn contains_zero(&self) -> bool {
        let lead = self.leading.on_circle();
        let term = self.terminating.on_circle();
        self.length > S::zero() && (lead < term || lead == S::zero() || term == S::zero())
    }
}

/// Containing arc of a non-empty multiset of phases.
///
/// Length is `2π` minus the largest circular gap between consecutive sorted
/// phases. Equal largest gaps resolve to the smallest leading phase.
pub fn containing_arc<S: Scalar>(phases: &[Phase<S>]) -> Result<ArcReport<S>> {
    let mut sorted: Vec<S> = phases.iter().map(|p| p.on_circle()).collect();
    containing_arc_of(&mut sorted)
}

/// Same as [`containing_arc`] over raw values, reordering `values` in place.
pub(crate) fn containing_arc_of<S: Scalar>(values: &mut [S]) -> Result<ArcReport<S>> {
    if values.is_empty() {
        return Err(Error::EmptyPhases);
    }
    for v in values.iter_mut() {
        if *v >= S::two_pi() {
            *v = S::zero();
        }
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("phases are not NaN"));
    let n = values.len();
    let two_pi = S::two_pi();
    // gap k runs from values[k] forward to values[(k+1) % n]
    let mut best_gap = -S::one();
    let mut best_lead = S::zero();
    let mut best_term = S::zero();
    // gaps equal up to rounding count as ties
    let tie = S::epsilon() * S::lit(64.0) * two_pi;
    for k in 0..n {
        let from = values[k];
        let gap = if k + 1 < n {
            values[k + 1] - from
        } else {
            values[0] + two_pi - from
        };
        let to = values[(k + 1) % n];
        if gap > best_gap + tie || ((gap - best_gap).abs() <= tie && from < best_lead) {
            best_gap = gap;
            best_lead = from;
            best_term = to;
        }
    }
    let length = (two_pi - best_gap).max(S::zero());
    Ok(ArcReport {
        length,
        leading: Phase::new_unchecked(best_lead),
        terminating: Phase::new_unchecked(best_term),
    })
}

/// Largest pairwise circular distance, `max_{i,j} min(2π − |φi − φj|, |φi − φj|)`.
pub fn sync_error<S: Scalar>(phases: &[Phase<S>]) -> Result<S> {
    if phases.is_empty() {
        return Err(Error::EmptyPhases);
    }
    let two_pi = S::two_pi();
    let mut worst = S::zero();
    for (i, a) in phases.iter().enumerate() {
        for b in &phases[i + 1..] {
            let d = (a.value() - b.value()).abs();
            worst = worst.max(d.min(two_pi - d));
        }
    }
    Ok(worst)
}

/// Legitimate phases reside partly in `[0, π)` and partly in `(π, 2π]`, and
/// the containing arc passes through 2π.
pub fn straddles_firing_point<S: Scalar>(phases: &[Phase<S>]) -> bool {
    let below = phases.iter().any(|p| p.value() < S::PI());
    let above = phases.iter().any(|p| p.value() > S::PI());
    below
        && above
        && containing_arc(phases)
            .map(|arc| arc.contains_zero())
            .unwrap_or(false)
}

/// Times at which every legitimate oscillator has fired at least once since
/// the previous boundary (the first round counts from t = 0).
pub fn round_boundaries(trace: &Trace) -> Vec<f64> {
    let legit: Vec<usize> = trace.legitimate().collect();
    if legit.is_empty() {
        return Vec::new();
    }
    let mut fired = vec![false; trace.roles.len()];
    let mut remaining = legit.len();
    let mut out = Vec::new();
    for ev in &trace.events {
        if !matches!(ev.kind, EventKind::Fire) || fired[ev.node] {
            continue;
        }
        fired[ev.node] = true;
        remaining -= 1;
        if remaining == 0 {
            out.push(ev.time);
            for &i in &legit {
                fired[i] = false;
            }
            remaining = legit.len();
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contraction {
    pub round: usize,
    pub delta_before: f64,
    pub delta_after: f64,
    /// `None` when `delta_before` is zero.
    pub ratio: Option<f64>,
}

/// Arc length at round boundary `r` against boundary `r + 2`, for every `r`.
pub fn contraction_factors(trace: &Trace) -> Vec<Contraction> {
    let bounds = round_boundaries(trace);
    if bounds.len() < 3 {
        return Vec::new();
    }
    (0..bounds.len() - 2)
        .map(|r| {
            let before = trace.arc_at(bounds[r]);
            let after = trace.arc_at(bounds[r + 2]);
            Contraction {
                round: r,
                delta_before: before,
                delta_after: after,
                ratio: (before > 0.0).then(|| after / before),
            }
        })
        .collect()
}

/// First time after which the legitimate arc stays below `threshold` until
/// the end of the run.
pub fn time_to_sync(trace: &Trace, threshold: f64) -> Option<f64> {
    match trace.events.iter().rposition(|e| e.arc >= threshold) {
        None if trace.initial_arc < threshold => Some(0.0),
        None => trace.events.first().map(|e| e.time),
        Some(last) => trace.events.get(last + 1).map(|e| e.time),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    fn ph(values: &[f64]) -> Vec<Phase> {
        values.iter().map(|&v| Phase::new(v).unwrap()).collect()
    }

    #[test]
    fn arc_examples() {
        assert_eq!(containing_arc(&ph(&[0.3, 0.3, 0.3])).unwrap().length, 0.0);

        let arc = containing_arc(&ph(&[0.2, TAU - 0.1])).unwrap();
        assert!((arc.length - 0.3).abs() < 1e-12);
        assert!((arc.leading.value() - 0.2).abs() < 1e-15);
        assert!((arc.terminating.value() - (TAU - 0.1)).abs() < 1e-15);
        assert!(arc.contains_zero());

        let arc = containing_arc(&ph(&[0.0, TAU / 3.0, 2.0 * TAU / 3.0])).unwrap();
        assert!((arc.length - 4.0 * PI / 3.0).abs() < 1e-12);
        // three equal gaps: smallest leading phase wins
        assert_eq!(arc.leading.value(), 0.0);
    }

    #[test]
    fn arc_identifies_zero_and_two_pi() {
        let arc = containing_arc(&ph(&[0.0, TAU])).unwrap();
        assert_eq!(arc.length, 0.0);
        assert!(!arc.contains_zero());
    }

    #[test]
    fn arc_rejects_empty() {
        assert_eq!(containing_arc::<f64>(&[]), Err(Error::EmptyPhases));
        assert_eq!(sync_error::<f64>(&[]), Err(Error::EmptyPhases));
    }

    #[test]
    fn sync_error_examples() {
        assert_eq!(sync_error(&ph(&[1.0, 1.0])).unwrap(), 0.0);
        assert!((sync_error(&ph(&[0.1, TAU - 0.1])).unwrap() - 0.2).abs() < 1e-12);
        assert!((sync_error(&ph(&[0.0, PI / 2.0, PI])).unwrap() - PI).abs() < 1e-15);
        assert_eq!(sync_error(&ph(&[2.0])).unwrap(), 0.0);
    }

    #[test]
    fn straddle_predicate() {
        assert!(straddles_firing_point(&ph(&[0.1, TAU - 0.2, TAU - 0.05])));
        assert!(!straddles_firing_point(&ph(&[0.1, 0.5])));
        assert!(!straddles_firing_point(&ph(&[4.0, 5.0])));
        // both halves occupied but the arc passes through π instead
        assert!(!straddles_firing_point(&ph(&[PI - 0.1, PI + 0.1])));
    }

    #[test]
    fn arc_in_single_precision() {
        let phases: Vec<Phase<f32>> = [0.2f32, std::f32::consts::TAU - 0.1]
            .iter()
            .map(|&v| Phase::new(v).unwrap())
            .collect();
        assert!((containing_arc(&phases).unwrap().length - 0.3).abs() < 1e-5);
    }
}
