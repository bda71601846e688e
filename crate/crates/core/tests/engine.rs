use std::f64::consts::TAU;
use std::sync::Arc;

use pco_core::checks::{self, CheckContext};
use pco_core::engine::{run, AttackBehavior, DelaySpec, InitialPhases, ScriptedEmission, SimConfig};
use pco_core::experiment::{
    mean_std, run_delay_sweep, run_experiment, run_verification, sample_instance, scenario, Campaign,
    ExperimentSpec, Horizon, Sweep, TopologySpec,
};
use pco_core::graph::{paper30, Topology};
use pco_core::{Error, MechanismConfig, MechanismKind};

fn campaign(json: &str) -> Campaign {
    Campaign::from_json(json).unwrap()
}

#[test]
fn greedy_attackers_only_strike_inside_the_window() {
    let c = campaign(
        r#"{"mechanism": "m1", "n_range": [11, 30], "reps": 60, "seed": 7, "attackers": 2}"#,
    );
    let mut emitting_runs = 0;
    for index in 0..c.reps {
        let inst = sample_instance(&c, index).unwrap();
        for &l in &c.couplings {
            let n = inst.topology.node_count();
            let mech = MechanismConfig::mechanism1(l, n);
            let cfg = SimConfig::new(inst.topology.clone(), mech, InitialPhases::UniformHalfPeriod { seed: inst.phase_seed })
                .with_attackers(inst.attackers.clone(), false)
                .with_horizon(200.0 * TAU)
                .with_settle(3.0);
            let trace = run(&cfg).unwrap();
            if trace.emissions().next().is_none() {
                continue;
            }
            emitting_runs += 1;
            checks::attack_window(&trace).unwrap();
            checks::monotone_arc(&trace, 1e-9).unwrap();
            checks::stealth(&trace).unwrap();
            checks::no_detector_flags(&trace).unwrap();
            checks::pulse_bound(&trace, &inst.topology).unwrap();
            checks::converges(&trace, 1e-6).unwrap();
        }
    }
    assert!(emitting_runs > 0, "no run exercised an attack emission");
}

#[test]
fn colluding_group_stalls_but_stays_hidden() {
    let spec = scenario("fig8_colluding4").unwrap();
    let result = run_experiment(&spec).unwrap().remove(0);
    assert!(result.summary.attack_emissions > 0);
    assert!(result.summary.final_arc >= 0.1);
    assert_eq!(result.summary.detector_flags, 0);
    checks::stealth(&result.trace).unwrap();
    checks::pulse_bound(&result.trace, &paper30()).unwrap();
    assert!(result.outcomes.iter().all(|o| o.passed));
}

#[test]
fn neutral_emissions_leave_a_legitimate_cutoff() {
    let mut spec = scenario("fig9_colluding2").unwrap();
    spec.allow_neutral_emissions = true;
    spec.horizon = Horizon::periods(60.0);
    let topo = spec.topology.build().unwrap();
    let result = run_experiment(&spec).unwrap().remove(0);
    let mech = spec.mechanism_for(&topo);
    let ctx = CheckContext { topology: &topo, mechanism: &mech };
    checks::legit_cutoff_available(&result.trace, ctx).unwrap();
    checks::stealth(&result.trace).unwrap();
    checks::no_detector_flags(&result.trace).unwrap();
}

#[test]
fn stealthy_runs_are_reproducible() {
    for name in ["fig9_colluding2", "fig12_m2_colluding2"] {
        let mut spec = scenario(name).unwrap();
        spec.horizon = Horizon::periods(40.0);
        let a = run_experiment(&spec).unwrap().remove(0);
        let b = run_experiment(&spec).unwrap().remove(0);
        assert_eq!(a.trace.to_csv_string(), b.trace.to_csv_string(), "{name}");
        let ea: Vec<(f64, usize)> = a.trace.emissions().map(|e| (e.time, e.node)).collect();
        let eb: Vec<(f64, usize)> = b.trace.emissions().map(|e| (e.time, e.node)).collect();
        assert_eq!(ea, eb);
    }
}

#[test]
fn attack_free_runs_respect_pulse_bound() {
    for name in ["fig6a", "fig6b"] {
        let mut spec = scenario(name).unwrap();
        spec.horizon = Horizon::periods(50.0);
        let result = run_experiment(&spec).unwrap().remove(0);
        checks::pulse_bound(&result.trace, &paper30()).unwrap();
        checks::no_detector_flags(&result.trace).unwrap();
    }
}

#[test]
fn burst_is_flagged_by_neighbours() {
    let topo = Arc::new(Topology::complete(5));
    let cfg = SimConfig::new(
        topo,
        MechanismConfig::mechanism1(0.5, 5),
        InitialPhases::Explicit { phases: vec![1.0; 5] },
    )
    .with_attackers(vec![4], false)
    .with_behavior(AttackBehavior::Scripted {
        emissions: vec![
            ScriptedEmission { attacker: 4, time: TAU - 1.0 },
            ScriptedEmission { attacker: 4, time: TAU - 1.0 + TAU / 4.0 },
        ],
    })
    .with_horizon(5.0 * TAU);
    let trace = run(&cfg).unwrap();
    assert!(trace.any_flagged());
    assert!(checks::stealth(&trace).is_err());
    let flagged: Vec<usize> = trace
        .events
        .iter()
        .filter(|e| e.flagged)
        .map(|e| e.node)
        .collect();
    assert!(!flagged.is_empty());
    assert!(flagged.iter().all(|&n| n != 4));
}

#[test]
fn zero_width_delay_matches_no_delay() {
    let topo = Arc::new(Topology::complete(6));
    let base = SimConfig::new(topo, MechanismConfig::mechanism2(0.4), InitialPhases::UniformHalfPeriod { seed: 3 })
        .with_horizon(40.0 * TAU);
    let a = run(&base).unwrap();
    let b = run(&base.clone().with_delay(DelaySpec::Uniform { lo: 0.0, hi: 0.0 }, 11)).unwrap();
    assert_eq!(a.to_csv_string(), b.to_csv_string());
}

#[test]
fn settle_stops_after_synchronization() {
    let topo = Arc::new(Topology::complete(8));
    let cfg = SimConfig::new(topo, MechanismConfig::conventional(0.5), InitialPhases::UniformHalfPeriod { seed: 5 })
        .with_horizon(500.0 * TAU)
        .with_settle(3.0);
    let trace = run(&cfg).unwrap();
    let end = trace.metrics.last().unwrap().time;
    assert!(end < 500.0 * TAU);
    assert!(trace.final_arc() < 1e-9);
}

#[test]
fn inadmissible_topology_is_rejected() {
    let cfg = SimConfig::new(
        Arc::new(Topology::path(5)),
        MechanismConfig::mechanism1(0.5, 5),
        InitialPhases::UniformHalfPeriod { seed: 0 },
    );
    assert!(matches!(run(&cfg), Err(Error::Config(_))));
}

#[test]
fn campaign_with_too_small_degree_is_rejected() {
    let c = campaign(r#"{"mechanism": "m1", "n_range": [10, 12], "reps": 3, "seed": 1, "min_degree": 1, "area_side": 80}"#);
    assert!(matches!(run_verification(&c), Err(Error::Admissibility(_))));
}

#[test]
fn mechanism2_campaign_holds() {
    let c = campaign(
        r#"{"mechanism": "m2", "n_range": [12, 20], "reps": 10, "seed": 3,
            "attackers": 1, "colluding": true, "area_side": 30}"#,
    );
    let report = run_verification(&c).unwrap();
    assert_eq!(report.runs, 30);
    assert_eq!(report.total_failures(), 0, "{:?}", report.failures);
}

#[test]
fn single_repetition_sweep_has_zero_spread() {
    let s = Sweep {
        couplings: vec![0.5],
        delay_hi: vec![0.0, 0.05],
        reps: 1,
        seed: 2,
        mechanisms: vec![MechanismKind::Conventional, MechanismKind::Mechanism1],
        topology: TopologySpec::Complete { n: 10 },
        horizon: Horizon::periods(40.0),
        window_periods: 10.0,
    };
    let rows = run_delay_sweep(&s).unwrap();
    assert_eq!(rows.len(), 4);
    for row in &rows {
        assert_eq!(row.std, 0.0);
        if row.delay_hi == 0.0 {
            assert!(row.mean < 1e-6, "{row:?}");
        }
    }
    assert_eq!(mean_std(&[1.0, 3.0]), (2.0, 1.0));
}

#[test]
fn scenario_specs_round_trip_through_json() {
    for name in pco_core::experiment::SCENARIOS {
        let spec = scenario(name).unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(ExperimentSpec::from_json(&text).unwrap(), spec);
    }
}

#[test]
fn horizon_accepts_periods_and_seconds() {
    let spec = ExperimentSpec::from_json(
        r#"{"name": "x", "topology": {"kind": "complete", "n": 4}, "mechanism": "m1",
            "coupling": 0.2, "horizon": "12.5T"}"#,
    )
    .unwrap();
    assert!((spec.horizon.0 - 12.5 * TAU).abs() < 1e-12);
    assert_eq!("30".parse::<Horizon>().unwrap().0, 30.0);
    assert!("T".parse::<Horizon>().is_err());
}
