//! Experiment descriptions, the named scenario catalog, verification
//! campaigns and delay sweeps.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::checks::{self, Check, CheckContext, CheckOutcome};
use crate::engine::{run, AttackBehavior, DelaySpec, InitialPhases, SimConfig};
use crate::error::{Error, Result};
use crate::graph::{check_admissibility, generate_geometric, GeometricParams, Topology, PAPER30_PARAMS, PAPER30_SEED};
use crate::mechanism::{MechanismConfig, MechanismKind};
use crate::metrics::{contraction_factors, time_to_sync};
use crate::phase::PERIOD;
use crate::trace::Trace;

/// Arc below which a run counts as synchronized in summaries.
pub const SYNC_THRESHOLD: f64 = 1e-6;

/// A duration in seconds; parses either a number or a count of periods such
/// as `"200T"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Horizon(pub f64);

impl Horizon {
    pub fn periods(k: f64) -> Self {
        Horizon(k * PERIOD)
    }
}

impl std::str::FromStr for Horizon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Config(format!("cannot parse duration `{s}`"));
        let value = if let Some(k) = s.strip_suffix(['T', 't']) {
            k.trim().parse::<f64>().map_err(|_| bad())? * PERIOD
        } else {
            s.parse::<f64>().map_err(|_| bad())?
        };
        if value.is_finite() && value > 0.0 {
            Ok(Horizon(value))
        } else {
            Err(bad())
        }
    }
}

impl Serialize for Horizon {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Horizon {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Seconds(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Seconds(v) => Ok(Horizon(v)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TopologySpec {
    /// The shipped 30-node deployment.
    Paper30,
    Geometric(GeometricParams),
    Complete { n: usize },
    /// A file in the `pco-topology v1` text format.
    File { path: String },
}

impl TopologySpec {
    pub fn build(&self) -> Result<Topology> {
        match self {
            TopologySpec::Paper30 => generate_geometric(&PAPER30_PARAMS),
            TopologySpec::Geometric(p) => generate_geometric(p),
            TopologySpec::Complete { n } => Ok(Topology::complete(*n)),
            TopologySpec::File { path } => Topology::from_text(&std::fs::read_to_string(path)?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub check: Check,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl Assertion {
    pub fn new(check: Check) -> Self {
        Self { check, tolerance: None }
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or_else(|| self.check.default_tolerance())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<String>,
}

fn default_one() -> usize {
    1
}
fn default_stride() -> u64 {
    1
}
fn default_measure() -> f64 {
    0.1
}
fn default_horizon() -> Horizon {
    Horizon::periods(200.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub topology: TopologySpec,
    pub mechanism: MechanismKind,
    pub coupling: f64,
    #[serde(default)]
    pub attackers: Vec<usize>,
    #[serde(default)]
    pub colluding: bool,
    #[serde(default)]
    pub allow_neutral_emissions: bool,
    #[serde(default)]
    pub behavior: AttackBehavior,
    #[serde(default)]
    pub delay: DelaySpec,
    /// Explicit phases; when absent each repetition draws from `[0, π)` with
    /// its own seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_phases: Option<Vec<f64>>,
    #[serde(default = "default_horizon")]
    pub horizon: Horizon,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_stride")]
    pub seed_stride: u64,
    #[serde(default = "default_one")]
    pub repetitions: usize,
    #[serde(default = "default_measure")]
    pub measure_interval: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub settle_periods: Option<f64>,
    #[serde(default)]
    pub assertions: Vec<Assertion>,
    #[serde(default)]
    pub outputs: Outputs,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        Ok(())
    }

    pub fn mechanism_for(&self, topo: &Topology) -> MechanismConfig {
        mechanism_config(self.mechanism, self.coupling, topo.node_count())
    }

    /// Engine configuration of repetition `rep`.
    pub fn sim_config(&self, topo: Arc<Topology>, rep: usize) -> SimConfig {
        let seed = self.seed.wrapping_add(self.seed_stride.wrapping_mul(rep as u64));
        let initial = match &self.initial_phases {
            Some(phases) => InitialPhases::Explicit { phases: phases.clone() },
            None => InitialPhases::UniformHalfPeriod { seed },
        };
        let mechanism = self.mechanism_for(&topo);
        let mut cfg = SimConfig::new(topo, mechanism, initial)
            .with_attackers(self.attackers.clone(), self.colluding)
            .with_behavior(self.behavior.clone())
            .with_delay(self.delay, seed)
            .with_horizon(self.horizon.0);
        cfg.allow_neutral_emissions = self.allow_neutral_emissions;
        cfg.measure_interval = self.measure_interval;
        cfg.settle_periods = self.settle_periods;
        cfg
    }
}

pub fn mechanism_config(kind: MechanismKind, coupling: f64, n: usize) -> MechanismConfig {
    match kind {
        MechanismKind::Conventional => MechanismConfig::conventional(coupling),
        MechanismKind::Mechanism1 => MechanismConfig::mechanism1(coupling, n),
        MechanismKind::Mechanism2 => MechanismConfig::mechanism2(coupling),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub final_arc: f64,
    pub time_to_sync: Option<f64>,
    pub detector_flags: usize,
    pub min_contraction_margin: Option<f64>,
    pub contraction_ratios: Vec<f64>,
    pub attack_emissions: usize,
    pub end_time: f64,
}

impl Summary {
    pub fn of(trace: &Trace) -> Self {
        Self {
            final_arc: trace.final_arc(),
            time_to_sync: time_to_sync(trace, SYNC_THRESHOLD).filter(|&t| t <= trace.horizon),
            detector_flags: trace.metrics.iter().map(|m| m.flagged_nodes).max().unwrap_or(0),
            min_contraction_margin: checks::min_contraction_margin(trace),
            contraction_ratios: contraction_factors(trace).iter().filter_map(|c| c.ratio).collect(),
            attack_emissions: trace.emissions().count(),
            end_time: trace.end_time,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub rep: usize,
    pub trace: Trace,
    pub summary: Summary,
    pub outcomes: Vec<CheckOutcome>,
}

impl RunResult {
    pub fn first_failure(&self) -> Option<&CheckOutcome> {
        self.outcomes.iter().find(|o| !o.passed)
    }
}

pub fn evaluate_assertions(
    assertions: &[Assertion],
    trace: &Trace,
    topo: &Topology,
    mech: &MechanismConfig,
) -> Vec<CheckOutcome> {
    let ctx = CheckContext {
        topology: topo,
        mechanism: mech,
    };
    assertions
        .iter()
        .map(|a| checks::evaluate(a.check, a.tolerance(), trace, ctx))
        .collect()
}

/// Runs every repetition of `spec` in order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<RunResult>> {
    spec.validate()?;
    let topo = Arc::new(spec.topology.build()?);
    let mech = spec.mechanism_for(&topo);
    (0..spec.repetitions)
        .map(|rep| {
            let trace = run(&spec.sim_config(Arc::clone(&topo), rep))?;
            let outcomes = evaluate_assertions(&spec.assertions, &trace, &topo, &mech);
            Ok(RunResult {
                rep,
                summary: Summary::of(&trace),
                trace,
                outcomes,
            })
        })
        .collect()
}

/// Names of the scenario catalog, in display order.
pub const SCENARIOS: [&str; 10] = [
    "fig6a",
    "fig6b",
    "fig7_noncolluding",
    "fig8_colluding4",
    "fig9_colluding2",
    "fig10_m2_noncolluding4",
    "fig11_m2_colluding4",
    "fig12_m2_colluding2",
    "delays_l03",
    "delays_l06",
];

/// Attackers are given by 1-based labels; label `k` is node `k − 1` of the
/// preset topology.
fn labels(ids: &[usize]) -> Vec<usize> {
    ids.iter().map(|k| k - 1).collect()
}

const SYNC_CHECKS: [Check; 5] = [
    Check::Converges,
    Check::MonotoneArc,
    Check::FireGap,
    Check::Period,
    Check::Contraction,
];

const STEALTH_CHECKS: [Check; 4] = [
    Check::Stealth,
    Check::AttackWindow,
    Check::NoDetectorFlags,
    Check::PulseBound,
];

/// Builds a catalog scenario on the shipped 30-node topology.
pub fn scenario(name: &str) -> Result<ExperimentSpec> {
    let m1 = MechanismKind::Mechanism1;
    let m2 = MechanismKind::Mechanism2;
    let synced = |extra: &[Check]| -> Vec<Assertion> {
        SYNC_CHECKS[..2]
            .iter()
            .chain(extra)
            .copied()
            .map(Assertion::new)
            .collect()
    };
    let attack_free: Vec<Assertion> = SYNC_CHECKS
        .iter()
        .chain(&[Check::NoDetectorFlags, Check::PulseBound])
        .copied()
        .map(Assertion::new)
        .collect();
    let stalled = vec![
        Assertion::new(Check::NotConverged),
        Assertion::new(Check::Stealth),
        Assertion::new(Check::NoDetectorFlags),
    ];
    let (mechanism, coupling, attackers, colluding, horizon, assertions, delay) = match name {
        "fig6a" => (m1, 0.1, vec![], false, 200.0, attack_free, DelaySpec::None),
        "fig6b" => (m2, 0.1, vec![], false, 200.0, attack_free, DelaySpec::None),
        "fig7_noncolluding" => (m1, 0.1, labels(&[1, 6, 26, 30]), false, 200.0, synced(&STEALTH_CHECKS), DelaySpec::None),
        "fig8_colluding4" => (m1, 0.1, labels(&[1, 6, 26, 30]), true, 100.0, stalled, DelaySpec::None),
        "fig9_colluding2" => (m1, 0.1, labels(&[1, 6]), true, 200.0, synced(&STEALTH_CHECKS), DelaySpec::None),
        "fig10_m2_noncolluding4" => (m2, 0.1, labels(&[1, 6, 18, 26]), false, 200.0, synced(&STEALTH_CHECKS), DelaySpec::None),
        "fig11_m2_colluding4" => (m2, 0.1, labels(&[1, 6, 18, 26]), true, 100.0, stalled, DelaySpec::None),
        "fig12_m2_colluding2" => (m2, 0.1, labels(&[1, 6]), true, 200.0, synced(&STEALTH_CHECKS), DelaySpec::None),
        "delays_l03" | "delays_l06" => {
            let l = if name == "delays_l03" { 0.3 } else { 0.6 };
            let delay = DelaySpec::Uniform { lo: 0.0, hi: 0.1 * PERIOD };
            (m1, l, vec![], false, 50.0, vec![Assertion::new(Check::FireGap)], delay)
        }
        _ => return Err(Error::UnknownScenario(name.to_string())),
    };
    Ok(ExperimentSpec {
        name: name.to_string(),
        topology: TopologySpec::Paper30,
        mechanism,
        coupling,
        attackers,
        colluding,
        allow_neutral_emissions: false,
        behavior: AttackBehavior::Stealthy,
        delay,
        initial_phases: None,
        horizon: Horizon::periods(horizon),
        seed: PAPER30_SEED,
        seed_stride: 1,
        repetitions: 1,
        measure_interval: 0.1,
        settle_periods: None,
        assertions,
        outputs: Outputs::default(),
    })
}

fn default_checks() -> Vec<Check> {
    vec![
        Check::Converges,
        Check::MonotoneArc,
        Check::FireGap,
        Check::Period,
        Check::Contraction,
        Check::Stealth,
        Check::AttackWindow,
        Check::NoDetectorFlags,
        Check::PulseBound,
    ]
}
fn default_couplings() -> Vec<f64> {
    vec![0.1, 0.5, 1.0]
}
fn default_side() -> f64 {
    50.0
}
fn default_radius() -> f64 {
    50.0
}
fn default_settle() -> Option<f64> {
    Some(3.0)
}

/// Randomized property-verification campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Campaign {
    pub mechanism: MechanismKind,
    pub n_range: (usize, usize),
    pub reps: usize,
    pub seed: u64,
    #[serde(default = "default_couplings")]
    pub couplings: Vec<f64>,
    /// Number of attackers per instance, placed uniformly at random.
    #[serde(default)]
    pub attackers: usize,
    #[serde(default)]
    pub colluding: bool,
    #[serde(default = "default_side")]
    pub area_side: f64,
    #[serde(default = "default_radius")]
    pub radius: f64,
    /// Required network degree; defaults to the smallest admissible one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_degree: Option<usize>,
    #[serde(default = "default_horizon")]
    pub horizon: Horizon,
    /// Stop a run this many periods after it synchronizes.
    #[serde(default = "default_settle")]
    pub settle_periods: Option<f64>,
    #[serde(default = "default_checks")]
    pub checks: Vec<Check>,
}

impl Campaign {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.n_range;
        if lo < 2 || lo > hi {
            return Err(Error::Campaign(format!("invalid node range {lo}..={hi}")));
        }
        if self.reps == 0 {
            return Err(Error::Campaign("reps must be at least 1".into()));
        }
        if self.couplings.is_empty() {
            return Err(Error::Campaign("no coupling strengths given".into()));
        }
        if self.mechanism == MechanismKind::Conventional {
            return Err(Error::Campaign(
                "the conventional mechanism has no resilience guarantee to verify".into(),
            ));
        }
        Ok(())
    }
}

/// Smallest network degree for which `attackers` attackers are tolerated.
pub fn required_degree(kind: MechanismKind, n: usize, attackers: usize, colluding: bool) -> usize {
    // per-unit requirement of the threshold floor: ⌊·/4⌋ for Mechanism 1, ⌊·/9⌋ for 2
    let units = if colluding { attackers } else { attackers.div_ceil(2) };
    match kind {
        MechanismKind::Mechanism2 => ((2 * n) / 3 + 1).max(9 * units),
        _ => (n / 2 + 1).max(n / 2 + 4 * units),
    }
}

/// One admissible random instance of a campaign.
#[derive(Debug, Clone)]
pub struct Instance {
    pub index: usize,
    pub topology: Arc<Topology>,
    pub attackers: Vec<usize>,
    pub phase_seed: u64,
}

/// Draws instance `index` of the campaign; errors if the graph cannot be
/// generated or violates the admissibility conditions.
pub fn sample_instance(c: &Campaign, index: usize) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed.wrapping_add(index as u64));
    let (lo, hi) = c.n_range;
    let n = rng.random_range(lo..=hi);
    let params = GeometricParams {
        n,
        area_side: c.area_side,
        radius: c.radius,
        seed: rng.random(),
        min_degree: c.min_degree.unwrap_or_else(|| required_degree(c.mechanism, n, c.attackers, c.colluding)),
        connected: true,
        max_attempts: 10_000,
    };
    let topo = generate_geometric(&params)
        .map_err(|e| Error::Campaign(format!("instance {index} (N = {n}): {e}")))?;
    let mut nodes: Vec<usize> = (0..n).collect();
    for k in 0..c.attackers.min(n) {
        let j = rng.random_range(k..n);
        nodes.swap(k, j);
    }
    let mut attackers = nodes[..c.attackers.min(n)].to_vec();
    attackers.sort_unstable();
    let mech = mechanism_config(c.mechanism, c.couplings[0], n);
    let report = check_admissibility(&topo, &mech, attackers.len(), c.colluding);
    if !report.admissible {
        return Err(Error::Admissibility(format!(
            "instance {index} (N = {n}): {}",
            report.violated.join("; ")
        )));
    }
    Ok(Instance {
        index,
        topology: Arc::new(topo),
        attackers,
        phase_seed: rng.random(),
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckTally {
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub runs: usize,
    pub tallies: BTreeMap<String, CheckTally>,
    /// Descriptions of the first failures (at most 20).
    pub failures: Vec<String>,
}

impl VerificationReport {
    pub fn total_failures(&self) -> usize {
        self.tallies.values().map(|t| t.failed).sum()
    }
}

/// Samples `reps` instances and runs each under every coupling strength.
pub fn run_verification(c: &Campaign) -> Result<VerificationReport> {
    c.validate()?;
    let mut report = VerificationReport::default();
    for check in &c.checks {
        report.tallies.insert(check.name().to_string(), CheckTally::default());
    }
    for index in 0..c.reps {
        let inst = sample_instance(c, index)?;
        let n = inst.topology.node_count();
        for &l in &c.couplings {
            let mech = mechanism_config(c.mechanism, l, n);
            let mut cfg = SimConfig::new(
                Arc::clone(&inst.topology),
                mech,
                InitialPhases::UniformHalfPeriod { seed: inst.phase_seed },
            )
            .with_attackers(inst.attackers.clone(), c.colluding)
            .with_horizon(c.horizon.0);
            cfg.settle_periods = c.settle_periods;
            let trace = run(&cfg)?;
            let ctx = CheckContext {
                topology: &inst.topology,
                mechanism: &mech,
            };
            report.runs += 1;
            for &check in &c.checks {
                let out = checks::evaluate(check, check.default_tolerance(), &trace, ctx);
                let tally = report.tallies.entry(check.name().to_string()).or_default();
                if out.passed {
                    tally.passed += 1;
                } else {
                    tally.failed += 1;
                    if report.failures.len() < 20 {
                        report.failures.push(format!(
                            "instance {index} (N = {n}, l = {l}): {}: {}",
                            check.name(),
                            out.detail
                        ));
                    }
                }
            }
        }
    }
    Ok(report)
}

fn default_sweep_mechanisms() -> Vec<MechanismKind> {
    vec![MechanismKind::Conventional, MechanismKind::Mechanism1]
}
fn default_sweep_horizon() -> Horizon {
    Horizon::periods(40.0)
}
fn default_window() -> f64 {
    10.0
}

/// Delay-robustness sweep over coupling strengths and delay bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub couplings: Vec<f64>,
    /// Upper delay bounds as fractions of the period.
    pub delay_hi: Vec<f64>,
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_sweep_mechanisms")]
    pub mechanisms: Vec<MechanismKind>,
    #[serde(default = "paper30_spec")]
    pub topology: TopologySpec,
    #[serde(default = "default_sweep_horizon")]
    pub horizon: Horizon,
    /// Averaging window at the end of each run, in periods.
    #[serde(default = "default_window")]
    pub window_periods: f64,
}

fn paper30_spec() -> TopologySpec {
    TopologySpec::Paper30
}

impl Sweep {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub mechanism: MechanismKind,
    pub coupling: f64,
    pub delay_hi: f64,
    pub reps: usize,
    pub mean: f64,
    pub std: f64,
}

/// Time-averaged synchronization error over the last `window` seconds.
pub fn steady_state_error(trace: &Trace, window: f64) -> f64 {
    let from = trace.end_time - window;
    let (sum, count) = trace
        .metrics
        .iter()
        .filter(|m| m.time >= from)
        .fold((0.0, 0usize), |(s, c), m| (s + m.sync_error, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn run_delay_sweep(s: &Sweep) -> Result<Vec<SweepRow>> {
    if s.reps == 0 {
        return Err(Error::Config("reps must be at least 1".into()));
    }
    if s.window_periods <= 0.0 || s.window_periods * PERIOD > s.horizon.0 {
        return Err(Error::Config("averaging window must fit inside the horizon".into()));
    }
    let topo = Arc::new(s.topology.build()?);
    let n = topo.node_count();
    let mut rows = Vec::new();
    for &mechanism in &s.mechanisms {
        for &l in &s.couplings {
            for &hi in &s.delay_hi {
                let mech = mechanism_config(mechanism, l, n);
                let errors = (0..s.reps)
                    .map(|rep| {
                        let seed = s.seed.wrapping_add(rep as u64);
                        let cfg = SimConfig::new(Arc::clone(&topo), mech, InitialPhases::UniformHalfPeriod { seed })
                            .with_delay(DelaySpec::Uniform { lo: 0.0, hi: hi * PERIOD }, seed)
                            .with_horizon(s.horizon.0);
                        run(&cfg).map(|t| steady_state_error(&t, s.window_periods * PERIOD))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                let (mean, std) = mean_std(&errors);
                rows.push(SweepRow {
                    mechanism,
                    coupling: l,
                    delay_hi: hi,
                    reps: s.reps,
                    mean,
                    std,
                });
            }
        }
    }
    Ok(rows)
}

pub const SWEEP_CSV_HEADER: &str = "mechanism,coupling,delay_hi,reps,mean_sync_error,std_sync_error";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    use crate::trace::fmt_g12;
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.mechanism.name(),
            fmt_g12(r.coupling),
            fmt_g12(r.delay_hi),
            r.reps,
            fmt_g12(r.mean),
            fmt_g12(r.std)
        ));
    }
    out
}
