//! Oscillator phase, the phase response function and the jump rule.
//!
//! Phases live on `[0, 2π]` with 0 and 2π naming the same point of the unit
//! circle; 2π is only ever observed at a firing instant. Oscillators advance at
//! ω = 1 rad/s, so the period is T = 2π seconds and phase and time share units.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Free-running period T (seconds), equal to 2π because ω = 1.
pub const PERIOD: f64 = std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Phase<S = f64>(S);

impl<S: Scalar> Phase<S> {
    pub const fn new_unchecked(value: S) -> Self {
        Phase(value)
    }

    pub fn new(value: S) -> Result<Self> {
        if value >= S::zero() && value <= S::two_pi() {
            Ok(Phase(value))
        } else {
            Err(Error::PhaseDomain(value.to_f64().unwrap_or(f64::NAN)))
        }
    }

    /// Clamps into `[0, 2π]`; used where rounding of `anchor + elapsed` can
    /// overshoot by an ulp.
    pub fn clamped(value: S) -> Self {
        Phase(value.max(S::zero()).min(S::two_pi()))
    }

    pub fn zero() -> Self {
        Phase(S::zero())
    }

    pub fn full() -> Self {
        Phase(S::two_pi())
    }

    #[inline]
    pub fn value(self) -> S {
        self.0
    }

    /// True at the firing point 2π.
    #[inline]
    pub fn is_firing(self) -> bool {
        self.0 >= S::two_pi()
    }

    /// Value folded onto `[0, 2π)`, identifying 2π with 0.
    #[inline]
    pub fn on_circle(self) -> S {
        if self.0 >= S::two_pi() {
            S::zero()
        } else {
            self.0
        }
    }
}

impl<S: Scalar> From<Phase<S>> for f64 {
    fn from(p: Phase<S>) -> f64 {
        p.0.to_f64().unwrap_or(f64::NAN)
    }
}

/// Phase response function: `-φ` on `[0, π]`, `2π - φ` on `(π, 2π]`.
pub fn prf<S: Scalar>(phase: Phase<S>) -> Result<S> {
    let phi = Phase::new(phase.0)?.0;
    Ok(prf_unchecked(phi))
}

#[inline]
pub(crate) fn prf_unchecked<S: Scalar>(phi: S) -> S {
    if phi <= S::PI() {
        -phi
    } else {
        S::two_pi() - phi
    }
}

/// Phase after receiving a jump-triggering pulse: `φ + l·F(φ)`.
///
/// Never leaves `[0, 2π]`. A result of exactly 2π (only reachable with
/// `l = 1`) means the oscillator fires at this instant.
pub fn apply_jump<S: Scalar>(phase: Phase<S>, coupling: S) -> Result<Phase<S>> {
    let phi = Phase::new(phase.0)?.0;
    if !(coupling > S::zero() && coupling <= S::one()) {
        return Err(Error::Coupling(coupling.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(apply_jump_unchecked(phi, coupling))
}

#[inline]
pub(crate) fn apply_jump_unchecked<S: Scalar>(phi: S, coupling: S) -> Phase<S> {
    Phase::clamped(phi + coupling * prf_unchecked(phi))
}
