//! Append-only simulation record and its CSV export.

use std::fmt::Write as _;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::mechanism::WindowCounts;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Legitimate,
    Attacker,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PulseOrigin {
    Legitimate(usize),
    Attacker(usize),
}

impl PulseOrigin {
    pub fn node(self) -> usize {
        match self {
            PulseOrigin::Legitimate(n) | PulseOrigin::Attacker(n) => n,
        }
    }

    pub fn is_attack(self) -> bool {
        matches!(self, PulseOrigin::Attacker(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    Fire,
    Pulse {
        origin: PulseOrigin,
        emit_time: f64,
        counts: WindowCounts,
    },
    /// An attacker emitted a pulse. `legit_phases` is the snapshot of every
    /// legitimate phase at the emission instant.
    AttackEmit { gain: f64, legit_phases: Vec<f64> },
}

impl EventKind {
    pub fn label(&self) -> &'static str {
        match self {
            EventKind::Fire => "fire",
            EventKind::Pulse { .. } => "pulse",
            EventKind::AttackEmit { .. } => "attack_emit",
        }
    }
}

/// One applied event. For attack emissions the phase fields are unused (0).
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    pub time: f64,
    pub node: usize,
    pub kind: EventKind,
    pub phase_before: f64,
    pub phase_after: f64,
    pub jump_applied: bool,
    /// Containing-arc length of the legitimate oscillators after the event.
    pub arc: f64,
    /// Detector flag of `node` after the event.
    pub flagged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricRecord {
    pub time: f64,
    pub arc: f64,
    pub sync_error: f64,
    pub flagged_nodes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub roles: Vec<Role>,
    pub coupling: f64,
    pub horizon: f64,
    /// Time at which the run stopped (the horizon unless it settled early).
    pub end_time: f64,
    pub initial_phases: Vec<f64>,
    pub initial_arc: f64,
    pub events: Vec<TraceEvent>,
    pub metrics: Vec<MetricRecord>,
}

impl Trace {
    pub fn legitimate(&self) -> impl Iterator<Item = usize> + '_ {
        self.roles
            .iter()
            .enumerate()
            .filter(|(_, r)| **r == Role::Legitimate)
            .map(|(i, _)| i)
    }

    pub fn legit_count(&self) -> usize {
        self.legitimate().count()
    }

    pub fn final_arc(&self) -> f64 {
        self.events.last().map_or(self.initial_arc, |e| e.arc)
    }

    /// Arc after every event with time ≤ `t` has been applied.
    pub fn arc_at(&self, t: f64) -> f64 {
        let idx = self.events.partition_point(|e| e.time <= t);
        if idx == 0 {
            self.initial_arc
        } else {
            self.events[idx - 1].arc
        }
    }

    pub fn fire_times(&self, node: usize) -> Vec<f64> {
        self.events
            .iter()
            .filter(|e| e.node == node && matches!(e.kind, EventKind::Fire))
            .map(|e| e.time)
            .collect()
    }

    pub fn emissions(&self) -> impl Iterator<Item = &TraceEvent> {
        self.events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::AttackEmit { .. }))
    }

    pub fn any_flagged(&self) -> bool {
        self.events.iter().any(|e| e.flagged)
            || self.metrics.iter().any(|m| m.flagged_nodes > 0)
    }

    pub const CSV_HEADER: &'static str =
        "time,node,event,phase_before,phase_after,jump,arc,sync_error,flag,gain";

    /// Writes event rows and measure rows merged in time order (events first
    /// at equal times).
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        let mut line = String::with_capacity(128);
        let mut metrics = self.metrics.iter().peekable();
        for ev in &self.events {
            while let Some(m) = metrics.next_if(|m| m.time < ev.time) {
                metric_row(&mut line, m);
                out.write_all(line.as_bytes())?;
            }
            event_row(&mut line, ev);
            out.write_all(line.as_bytes())?;
        }
        for m in metrics {
            metric_row(&mut line, m);
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

fn event_row(line: &mut String, ev: &TraceEvent) {
    line.clear();
    let _ = write!(line, "{},{},{},", fmt_g12(ev.time), ev.node, ev.kind.label());
    match &ev.kind {
        EventKind::AttackEmit { gain, .. } => {
            let _ = writeln!(
                line,
                ",,1,{},,{},{}",
                fmt_g12(ev.arc),
                u8::from(ev.flagged),
                fmt_g12(*gain)
            );
        }
        _ => {
            let _ = writeln!(
                line,
                "{},{},{},{},,{},",
                fmt_g12(ev.phase_before),
                fmt_g12(ev.phase_after),
                u8::from(ev.jump_applied),
                fmt_g12(ev.arc),
                u8::from(ev.flagged)
            );
        }
    }
}

fn metric_row(line: &mut String, m: &MetricRecord) {
    line.clear();
    let _ = writeln!(
        line,
        "{},,,,,,{},{},{},",
        fmt_g12(m.time),
        fmt_g12(m.arc),
        fmt_g12(m.sync_error),
        m.flagged_nodes
    );
}

/// Formats like C's `%.12g`: 12 significant digits, trailing zeros trimmed.
pub fn fmt_g12(x: f64) -> String {
    const PREC: i32 = 12;
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", (PREC - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..PREC).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (PREC - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g12_matches_printf() {
        assert_eq!(fmt_g12(0.0), "0");
        assert_eq!(fmt_g12(std::f64::consts::TAU), "6.28318530718");
        assert_eq!(fmt_g12(1.0), "1");
        assert_eq!(fmt_g12(-2.5), "-2.5");
        assert_eq!(fmt_g12(1e-7), "1e-07");
        assert_eq!(fmt_g12(1.5e-5), "1.5e-05");
        assert_eq!(fmt_g12(0.0001234), "0.0001234");
        assert_eq!(fmt_g12(1256.63706144), "1256.63706144");
        assert_eq!(fmt_g12(1e15), "1e+15");
        assert_eq!(fmt_g12(999999999999.5), "1e+12");
    }

    #[test]
    fn csv_rows_have_ten_fields() {
        let trace = Trace {
            roles: vec![Role::Legitimate, Role::Attacker],
            coupling: 0.1,
            horizon: 1.0,
            end_time: 1.0,
            initial_phases: vec![0.0, 0.0],
            initial_arc: 0.0,
            events: vec![
                TraceEvent {
                    time: 0.5,
                    node: 0,
                    kind: EventKind::Fire,
                    phase_before: std::f64::consts::TAU,
                    phase_after: 0.0,
                    jump_applied: false,
                    arc: 0.0,
                    flagged: false,
                },
                TraceEvent {
                    time: 0.75,
                    node: 1,
                    kind: EventKind::AttackEmit {
                        gain: 0.25,
                        legit_phases: vec![0.25],
                    },
                    phase_before: 0.0,
                    phase_after: 0.0,
                    jump_applied: false,
                    arc: 0.0,
                    flagged: false,
                },
            ],
            metrics: vec![MetricRecord {
                time: 0.5,
                arc: 0.0,
                sync_error: 0.0,
                flagged_nodes: 0,
            }],
        };
        let csv = trace.to_csv_string();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], Trace::CSV_HEADER);
        assert_eq!(lines[1], "0.5,0,fire,6.28318530718,0,0,0,,0,");
        assert_eq!(lines[2], "0.5,,,,,,0,0,0,");
        assert_eq!(lines[3], "0.75,1,attack_emit,,,1,0,,0,0.25");
        assert!(lines.iter().all(|l| l.split(',').count() == 10));
    }
}
