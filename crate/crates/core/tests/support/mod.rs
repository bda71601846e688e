//! Independent reference implementations used to cross-check the crate.
#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

/// Shortest containing arc by trying every input phase as the arc's start.
pub fn brute_arc(phases: &[f64]) -> f64 {
    phases
        .iter()
        .map(|&a| {
            phases
                .iter()
                .map(|&p| (p - a).rem_euclid(TAU))
                .map(|d| if TAU - d < 1e-15 { 0.0 } else { d })
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Pairwise maximum circular distance.
pub fn brute_sync_error(phases: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for a in phases {
        for b in phases {
            let d = (a - b).abs();
            worst = worst.max(d.min(TAU - d));
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rule {
    Conventional,
    M1,
    M2,
}

/// Time-stepped integrator of the same network model.
///
/// Phases advance by `dt` per step. Oscillators that passed 2π during the step
/// fire most-advanced first, each at its crossing instant `t_end − overshoot`;
/// receivers respond with the phase they had at that instant, and may be
/// pushed over 2π and fire in the same step.
pub struct FixedStep {
    pub out: Vec<Vec<usize>>,
    pub degree: Vec<usize>,
    pub rule: Rule,
    pub coupling: f64,
    pub phases: Vec<f64>,
    pub receptions: Vec<Vec<f64>>,
}

impl FixedStep {
    pub fn all_to_all(n: usize, rule: Rule, coupling: f64, phases: Vec<f64>) -> Self {
        Self {
            out: (0..n).map(|i| (0..n).filter(|&j| j != i).collect()).collect(),
            degree: vec![n - 1; n],
            rule,
            coupling,
            phases,
            receptions: vec![Vec::new(); n],
        }
    }

    fn thresholds(&self, i: usize) -> Option<(usize, usize)> {
        let d = self.degree[i];
        let n = self.phases.len();
        let lambda = match self.rule {
            Rule::Conventional => return None,
            Rule::M1 => (d - n / 2) / 4,
            Rule::M2 => d / 9,
        };
        Some((lambda, d - 2 * lambda))
    }

    /// Delivers a pulse at `t`, `lag` seconds before the end of the step.
    fn receive(&mut self, j: usize, t: f64, lag: f64) {
        let count = |w: f64| self.receptions[j].iter().filter(|&&e| e > t - w && e <= t).count();
        let admitted = match self.thresholds(j) {
            None => true,
            Some((lo, hi)) => t >= TAU && count(TAU / 4.0) >= lo && count(3.0 * TAU / 4.0) < hi,
        };
        let phi = self.phases[j] - lag;
        if admitted && phi < TAU {
            let f = if phi <= PI { -phi } else { TAU - phi };
            self.phases[j] = (phi + self.coupling * f).clamp(0.0, TAU) + lag;
        }
        self.receptions[j].push(t);
    }

    /// Integrates to `steps · dt`, returning the containing arc after every
    /// `sample_every` steps (and at t = 0).
    pub fn run(&mut self, dt: f64, steps: usize, sample_every: usize) -> Vec<f64> {
        let mut samples = vec![brute_arc(&self.phases)];
        for k in 1..=steps {
            let t = k as f64 * dt;
            for p in &mut self.phases {
                *p += dt;
            }
            loop {
                let next = (0..self.phases.len())
                    .filter(|&i| self.phases[i] >= TAU)
                    .max_by(|&a, &b| self.phases[a].total_cmp(&self.phases[b]));
                let Some(i) = next else { break };
                let lag = self.phases[i] - TAU;
                self.phases[i] = lag;
                for j in self.out[i].clone() {
                    self.receive(j, t - lag, lag);
                }
            }
            if k % sample_every == 0 {
                samples.push(brute_arc(&self.phases));
            }
        }
        samples
    }
}

