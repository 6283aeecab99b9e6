use collab_activity::estimate::{fit_ratio, EstimationConfig, ObjectiveSpec};
use collab_activity::spectral::spectral_radius;
use collab_activity::synth::{
    karate_club, random_initial_activity, scenario_series, seeded_rng, ScenarioKind, ScenarioSpec,
};
use proptest::prelude::*;
use rand::RngCore;

#[test]
fn generator_stream_is_pinned() {
    // ChaCha8 keyed by seed_from_u64; these words must never change
    let mut rng = seeded_rng(0);
    let first: Vec<u64> = (0..3).map(|_| rng.next_u64()).collect();
    let mut again = seeded_rng(0);
    assert_eq!(first, (0..3).map(|_| again.next_u64()).collect::<Vec<_>>());
    assert_eq!(first, FIXTURE_SEED0);
}

const FIXTURE_SEED0: [u64; 3] = [13080132717333068652, 8594738769458413623, 12896916468484187878];

#[test]
fn karate_club_shape() {
    let net = karate_club();
    assert_eq!(net.node_count(), 34);
    assert_eq!(net.edge_count(), 78);
    assert_eq!(net.isolated_count(), 0);
    assert_eq!(net.degree(0), 16);
    assert_eq!(net.degree(33), 17);
}

#[test]
fn f32_pipeline_smoke() {
    let net = karate_club();
    let k1 = spectral_radius::<f32>(&net).unwrap().kappa1;
    assert!((k1 - 6.7257).abs() < 1e-3);
    let series = scenario_series::<f32>(&ScenarioSpec::new(ScenarioKind::Increasing, 20.0, 1.0, 1), &net).unwrap();
    let states = series.states_for(&net).unwrap();
    let fit = fit_ratio(
        &states[..4],
        &net,
        k1,
        &EstimationConfig::default(),
        ObjectiveSpec::default(),
    )
    .unwrap();
    assert!(fit.ratio.is_finite() && fit.ratio > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scenarios_are_valid_and_deterministic(
        kind in prop::sample::select(vec![ScenarioKind::Increasing, ScenarioKind::Decreasing, ScenarioKind::Variable]),
        base in 0.1f64..100.0,
        step in 0.0f64..10.0,
        seed in any::<u64>(),
        weeks in 2usize..40,
    ) {
        let net = karate_club();
        let spec = ScenarioSpec { n_weeks: weeks, ..ScenarioSpec::new(kind, base, step, seed) };
        let a = scenario_series::<f64>(&spec, &net).unwrap();
        let b = scenario_series::<f64>(&spec, &net).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.n_weeks(), weeks);
        prop_assert_eq!(a.n_users(), 34);
        prop_assert!(a.values().iter().flatten().all(|&v| v >= 0.0 && v.is_finite()));
        for (total, want) in a.weekly_totals().iter().zip(spec.aggregates()) {
            prop_assert!((total - want).abs() <= 1e-9 * (1.0 + want));
        }
        let x = random_initial_activity::<f64>(&net, 0.0, 0.1, seed).unwrap();
        prop_assert!(x.iter().all(|&v| (0.0..0.1).contains(&v)));
    }
}
