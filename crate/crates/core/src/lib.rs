//! Discrete-event simulation of pulse-coupled oscillator networks under
//! stealthy Byzantine attack, with the cut-off jump rules that keep the
//! legitimate oscillators synchronizing.

pub mod adversary;
pub mod engine;
pub mod checks;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod mechanism;
pub mod metrics;
pub mod phase;
pub mod scalar;
pub mod trace;

pub use engine::{run, AttackBehavior, DelaySpec, InitialPhases, SimConfig};
pub use error::{Error, Result};
pub use graph::Topology;
pub use mechanism::{MechanismConfig, MechanismKind};
pub use phase::{Phase, PERIOD};
pub use trace::Trace;

pub type Phase64 = phase::Phase<f64>;
pub type Phase32 = phase::Phase<f32>;
pub type ArcReport64 = metrics::ArcReport<f64>;
pub type ArcReport32 = metrics::ArcReport<f32>;
