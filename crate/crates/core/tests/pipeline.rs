use blindwave::harness::report::{to_csv, to_json};
use blindwave::harness::{run_experiment, ChannelSpec, DeltaMode, DeltaSetting, Scenario, SimulationModel};
use blindwave::{estimate, Error};

fn scenario_file(name: &str) -> String {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/").to_string() + name;
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn shipped_default_scenario_matches_the_builtin() {
    let parsed = Scenario::from_toml_str(&scenario_file("default.toml")).unwrap();
    assert_eq!(parsed, Scenario::default_scenario());
    assert!(Scenario::from_toml_str(&scenario_file("white-noise.toml")).is_ok());
}

fn small(channels: usize, reps: usize) -> Scenario {
    let mut sc = Scenario::default_scenario();
    sc.n = 1024;
    sc.reps = reps;
    sc.oracle = false;
    sc.channels = vec![
        ChannelSpec {
            alpha2: 1.0,
            ..sc.channels[0].clone()
        };
        channels
    ];
    sc.noise.eps_log2 = Some([-5, -5]);
    sc.noise.delta = DeltaSetting::Mode(DeltaMode::Zero);
    sc
}

#[test]
fn more_identical_channels_do_not_hurt() {
    let one = run_experiment(&small(1, 60)).unwrap().points[0].clone();
    let four = run_experiment(&small(4, 60)).unwrap().points[0].clone();
    let slack = 2.0 * (one.risk_se.powi(2) + four.risk_se.powi(2)).sqrt();
    assert!(
        four.risk_mean <= one.risk_mean + slack,
        "M=4 {} vs M=1 {}",
        four.risk_mean,
        one.risk_mean
    );
}

#[test]
fn oracle_is_no_worse_with_kernel_noise() {
    let mut sc = small(2, 40);
    sc.channels[0].alpha2 = 0.6;
    sc.noise.delta = DeltaSetting::Mode(DeltaMode::Coupled);
    sc.noise.eps_log2 = Some([-4, -7]);
    sc.oracle = true;
    let r = run_experiment(&sc).unwrap();
    for p in &r.points {
        let o = p.oracle_risk_mean.unwrap();
        let slack = 2.0 * (p.risk_se.powi(2) + p.oracle_risk_se.unwrap().powi(2)).sqrt();
        assert!(o <= p.risk_mean + slack, "eps {}: oracle {o} blind {}", p.eps, p.risk_mean);
    }
}

#[test]
fn reports_are_reproducible() {
    let sc = small(2, 6);
    let a = run_experiment(&sc).unwrap();
    let b = run_experiment(&sc).unwrap();
    assert_eq!(to_csv(&a), to_csv(&b));
    assert_eq!(to_json(&a), to_json(&b));
}

#[test]
fn estimate_trace_is_consistent() {
    let sc = small(2, 1);
    let model = SimulationModel::new(&sc).unwrap();
    let obs = model.observations(0.05, 0.05, 3).unwrap();
    let est = estimate(&obs, &sc.estimator.config()).unwrap();
    let t = &est.trace;
    assert!(t.top() > t.m0());
    assert_eq!(t.plan.levels.len() as u32, t.top() - t.m0());
    assert_eq!(t.kept() + t.killed(), est.beta_hat.len());
    for lvl in &t.plan.levels {
        let block = est.beta_hat.level(lvl.j).unwrap();
        assert!(block.iter().all(|b| b.norm() == 0.0 || b.norm() > lvl.lambda));
    }
}

#[test]
fn heavy_noise_with_forced_levels_is_infeasible() {
    let mut sc = small(1, 1);
    sc.estimator.m0 = Some(5);
    sc.estimator.j = Some(5);
    let model = SimulationModel::new(&sc).unwrap();
    let obs = model.observations(0.1, 0.0, 1).unwrap();
    let err = estimate(&obs, &sc.estimator.config()).unwrap_err();
    assert!(matches!(err, Error::Infeasible(_)));
    assert!(!err.is_configuration());
}
