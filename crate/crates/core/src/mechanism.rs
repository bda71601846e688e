//! Jump gating: the conventional rule and the two cut-off mechanisms.
//!
//! Under the cut-off mechanisms a received pulse moves the receiver's phase
//! only if (a) one full period has elapsed since the simulation started,
//! (b) at least `λ` pulses arrived in `(t − T/4, t]`, and (c) fewer than `λ̄`
//! pulses arrived in `(t − 3T/4, t]`. Both counts exclude the pulse being
//! adjudicated.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::PERIOD;

const QUARTER: f64 = PERIOD / 4.0;
const THREE_QUARTERS: f64 = 3.0 * PERIOD / 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MechanismKind {
    /// Every received pulse triggers a jump.
    Conventional,
    /// Cut-off thresholds derived from the node degree and the population `N`.
    #[serde(rename = "m1", alias = "mechanism1")]
    Mechanism1,
    /// Cut-off thresholds derived from the node degree alone.
    #[serde(rename = "m2", alias = "mechanism2")]
    Mechanism2,
}

impl MechanismKind {
    pub fn name(self) -> &'static str {
        match self {
            MechanismKind::Conventional => "conventional",
            MechanismKind::Mechanism1 => "m1",
            MechanismKind::Mechanism2 => "m2",
        }
    }
}

impl std::str::FromStr for MechanismKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "conventional" | "conv" => Ok(MechanismKind::Conventional),
            "m1" | "mechanism1" => Ok(MechanismKind::Mechanism1),
            "m2" | "mechanism2" => Ok(MechanismKind::Mechanism2),
            other => Err(Error::Config(format!("unknown mechanism `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanismConfig {
    pub kind: MechanismKind,
    /// Coupling strength `l` in `(0, 1]`.
    pub coupling: f64,
    /// Total number of oscillators `N`; required by [`MechanismKind::Mechanism1`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population: Option<usize>,
}

impl MechanismConfig {
    pub fn conventional(coupling: f64) -> Self {
        Self {
            kind: MechanismKind::Conventional,
            coupling,
            population: None,
        }
    }

    pub fn mechanism1(coupling: f64, population: usize) -> Self {
        Self {
            kind: MechanismKind::Mechanism1,
            coupling,
            population: Some(population),
        }
    }

    pub fn mechanism2(coupling: f64) -> Self {
        Self {
            kind: MechanismKind::Mechanism2,
            coupling,
            population: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coupling > 0.0 && self.coupling <= 1.0) {
            return Err(Error::Coupling(self.coupling));
        }
        match (self.kind, self.population) {
            (MechanismKind::Mechanism1, None) => Err(Error::Config(
                "mechanism 1 requires the population size N".into(),
            )),
            (MechanismKind::Mechanism1, Some(0)) => {
                Err(Error::Config("population must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    /// Gating rule for a node of degree `d(i)`.
    pub fn rule(&self, degree: usize) -> Result<JumpRule> {
        match self.kind {
            MechanismKind::Conventional => Ok(JumpRule::Always),
            MechanismKind::Mechanism1 => {
                let n = self.population.ok_or_else(|| {
                    Error::Config("mechanism 1 requires the population size N".into())
                })?;
                mech1_thresholds(degree, n).map(JumpRule::CutOff)
            }
            MechanismKind::Mechanism2 => mech2_thresholds(degree).map(JumpRule::CutOff),
        }
    }
}

/// Cut-off thresholds `(λ, λ̄)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thresholds {
    pub lambda: usize,
    pub lambda_bar: usize,
}

/// `λ = ⌊(d(i) − ⌊N/2⌋)/4⌋`, `λ̄ = d(i) − 2λ`; requires `d(i) > ⌊N/2⌋`.
pub fn mech1_thresholds(degree: usize, population: usize) -> Result<Thresholds> {
    if population == 0 {
        return Err(Error::Admissibility("population N must be positive".into()));
    }
    let half = population / 2;
    if degree <= half {
        return Err(Error::Admissibility(format!(
            "degree {degree} must exceed ⌊N/2⌋ = {half} (N = {population})"
        )));
    }
    let lambda = (degree - half) / 4;
    Ok(Thresholds {
        lambda,
        lambda_bar: degree - 2 * lambda,
    })
}

/// `λ = ⌊d(i)/9⌋`, `λ̄ = d(i) − 2λ`; requires `d(i) ≥ 1`.
pub fn mech2_thresholds(degree: usize) -> Result<Thresholds> {
    if degree == 0 {
        return Err(Error::Admissibility("degree must be at least 1".into()));
    }
    let lambda = degree / 9;
    Ok(Thresholds {
        lambda,
        lambda_bar: degree - 2 * lambda,
    })
}

/// Pulse counts in the two sliding windows ending at the query time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WindowCounts {
    /// Receptions in `(t − T/4, t]`.
    pub quarter: usize,
    /// Receptions in `(t − 3T/4, t]`.
    pub three_quarter: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpRule {
    Always,
    CutOff(Thresholds),
}

impl JumpRule {
    pub fn admits(&self, counts: WindowCounts, now: f64, sim_start: f64) -> bool {
        match *self {
            JumpRule::Always => true,
            JumpRule::CutOff(th) => {
                now - sim_start >= PERIOD
                    && counts.quarter >= th.lambda
                    && counts.three_quarter < th.lambda_bar
            }
        }
    }

    pub fn thresholds(&self) -> Option<Thresholds> {
        match *self {
            JumpRule::Always => None,
            JumpRule::CutOff(th) => Some(th),
        }
    }
}

/// Reception timestamps of one oscillator, non-decreasing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PulseHistory {
    receptions: Vec<f64>,
}

impl PulseHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_sorted(receptions: Vec<f64>) -> Self {
        debug_assert!(receptions.windows(2).all(|w| w[0] <= w[1]));
        Self { receptions }
    }

    pub fn push(&mut self, t: f64) {
        debug_assert!(
            self.receptions.last().is_none_or(|&last| last <= t),
            "history must be non-decreasing"
        );
        self.receptions.push(t);
    }

    pub fn len(&self) -> usize {
        self.receptions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.receptions.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.receptions
    }

    /// Number of receptions in `(now − width, now]`.
    pub fn count_within(&self, now: f64, width: f64) -> usize {
        let lo = now - width;
        let start = self.receptions.partition_point(|&e| e <= lo);
        let end = self.receptions.partition_point(|&e| e <= now);
        end - start
    }

    pub fn window_counts(&self, now: f64) -> WindowCounts {
        WindowCounts {
            quarter: self.count_within(now, QUARTER),
            three_quarter: self.count_within(now, THREE_QUARTERS),
        }
    }

    /// Drops entries that can no longer fall inside any window at or after `now`.
    pub fn prune(&mut self, now: f64) {
        let cut = self
            .receptions
            .partition_point(|&e| e <= now - THREE_QUARTERS);
        // amortize: only shift when the stale prefix dominates
        if cut > 64 && cut * 2 > self.receptions.len() {
            self.receptions.drain(..cut);
        }
    }
}

/// Whether a pulse received at `now` triggers the jump rule, judged on the
/// history before that pulse is recorded.
pub fn should_jump(
    history: &PulseHistory,
    now: f64,
    mech: &MechanismConfig,
    degree: usize,
    sim_start: f64,
) -> Result<bool> {
    let rule = mech.rule(degree)?;
    Ok(rule.admits(history.window_counts(now), now, sim_start))
}
