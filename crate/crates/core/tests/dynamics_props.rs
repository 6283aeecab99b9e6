use approx::assert_relative_eq;
use collab_activity::dynamics::{
    classify_stability, derivative, euler_integrate, find_active_fixed_point, influence_growth_rate,
    linearized_coefficient_decay, peer_influence, DynamicsError, DynamicsParams, FixedPointError, PeerInfluenceParams,
    Stability,
};
use collab_activity::spectral::spectral_radius;
use collab_activity::synth::{karate_club, random_initial_activity};
use collab_activity::{CollaborationNetwork, UserId};
use proptest::prelude::*;

fn network(n: usize, pairs: Vec<(usize, usize)>) -> CollaborationNetwork {
    let users = (0..n).map(|i| UserId::new(format!("u{i}"))).collect();
    CollaborationNetwork::from_index_pairs(users, pairs).unwrap()
}

/// Connected random graph: a spanning path plus random chords.
fn arb_connected(max_n: usize) -> impl Strategy<Value = CollaborationNetwork> {
    (3..max_n)
        .prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n), 0..2 * n)))
        .prop_map(|(n, mut pairs)| {
            pairs.extend((1..n).map(|i| (i - 1, i)));
            network(n, pairs)
        })
}

fn lone() -> CollaborationNetwork {
    network(1, vec![])
}

#[test]
fn isolated_node_halving_dtau_halves_error() {
    let exact = (-5.0f64).exp();
    let err = |dtau: f64| {
        let p = DynamicsParams {
            ratio: 1.0,
            dtau,
            tau_per_step: 5.0,
        };
        let t = euler_integrate(&lone(), &[1.0], p, 1).unwrap();
        (t.last().x[0] - exact).abs()
    };
    let (e1, e2, e3) = (err(0.01), err(0.005), err(0.0025));
    assert!((1.9..2.1).contains(&(e1 / e2)));
    assert!((1.9..2.1).contains(&(e2 / e3)));
}

#[test]
fn trace_layout_and_errors() {
    let net = karate_club();
    let x0 = vec![0.1; net.node_count()];
    let t = euler_integrate(&net, &x0, DynamicsParams::new(3.0), 4).unwrap();
    assert_eq!(t.states.len(), 5);
    assert_eq!(t.states[0].x, x0);
    assert_eq!(t.aggregate.len(), 5);
    assert_relative_eq!(t.states[4].tau, 4.0);
    assert!(matches!(
        euler_integrate(&net, &x0, DynamicsParams::new(3.0), 0),
        Err(DynamicsError::NoSteps)
    ));
    assert!(matches!(
        euler_integrate(&net, &x0[..3], DynamicsParams::new(3.0), 1),
        Err(DynamicsError::LengthMismatch { .. })
    ));
    assert!(euler_integrate(&net, &x0, DynamicsParams::new(-1.0), 1).is_err());
}

#[test]
fn huge_step_diverges_without_panicking() {
    let net = karate_club();
    let x0 = vec![1.0; net.node_count()];
    let p = DynamicsParams {
        ratio: 1e6,
        dtau: 1.0,
        tau_per_step: 50.0,
    };
    let t = euler_integrate(&net, &x0, p, 3).unwrap();
    assert!(t.diverged);
    assert!(t.aggregate.iter().all(|a: &f64| a.is_finite()));
}

#[test]
fn marginal_ratio_is_flagged() {
    assert_eq!(classify_stability(2.0, 2.0), Stability::Unstable { marginal: true });
    assert_eq!(classify_stability(2.0, 1.0), Stability::Unstable { marginal: false });
    assert_eq!(classify_stability(2.0, 3.0), Stability::Stable);
}

#[test]
fn stable_side_reports_decay_to_zero() {
    let net = karate_club();
    let k1 = spectral_radius::<f64>(&net).unwrap().kappa1;
    let x0 = vec![0.05; net.node_count()];
    let r = find_active_fixed_point(&net, 1.2 * k1, &x0, 1e-8, 1e4);
    assert!(matches!(r, Err(FixedPointError::DecaysToZero { .. })), "{r:?}");
}

#[test]
fn linear_modes_follow_their_eigenvalues() {
    // each eigenmode of the linearised system evolves with rate κ_r − ratio
    let net = karate_club();
    let n = net.node_count();
    let mut a = nalgebra::DMatrix::<f64>::zeros(n, n);
    for &(i, j) in net.edges() {
        a[(i, j)] = 1.0;
        a[(j, i)] = 1.0;
    }
    let eig = nalgebra::SymmetricEigen::new(a);
    let ratio = 3.0;
    for r in [eig.eigenvalues.imax(), eig.eigenvalues.imin(), 5] {
        let v: Vec<f64> = eig.eigenvectors.column(r).iter().map(|x| x * 1e-7).collect();
        let t = euler_integrate(&net, &v, DynamicsParams::new(ratio).with_dtau(1e-4), 1).unwrap();
        let proj0: f64 = eig.eigenvectors.column(r).iter().zip(&v).map(|(a, b)| a * b).sum();
        let proj1: f64 = eig
            .eigenvectors
            .column(r)
            .iter()
            .zip(&t.last().x)
            .map(|(a, b)| a * b)
            .sum();
        let predicted = linearized_coefficient_decay(eig.eigenvalues[r], ratio, 1.0, proj0);
        assert_relative_eq!(proj1, predicted, max_relative = 1e-2);
    }
}

proptest! {
    #[test]
    fn peer_influence_is_odd_bounded_increasing(x in -1e6f64..1e6, dx in 1e-3f64..10.0) {
        let g = peer_influence(x);
        prop_assert_eq!(peer_influence(-x), -g);
        prop_assert!(g.abs() < 1.0 || x.abs() > 1e7);
        prop_assert!(g.abs() <= 1.0);
        prop_assert!(peer_influence(x + dx) >= g);
    }

    #[test]
    fn growth_rate_matches_finite_difference(
        log_q in -2.0f64..2.0,
        log_ac in -2.0f64..2.0,
        rel_a in -5.0f64..5.0,
    ) {
        let p = PeerInfluenceParams::new(10f64.powf(log_q), 10f64.powf(log_ac)).unwrap();
        let a = rel_a * p.a_c;
        let h = 1e-5 * p.a_c;
        let fd = (p.influence(a + h) - p.influence(a - h)) / (2.0 * h);
        let exact = influence_growth_rate(a, &p);
        prop_assert!((fd - exact).abs() <= 1e-6 * p.mu().max(1.0), "{} vs {}", fd, exact);
        prop_assert_eq!(influence_growth_rate(0.0, &p), p.mu());
    }

    #[test]
    fn f32_and_f64_agree_on_peer_influence(x in -100.0f32..100.0) {
        let g32 = peer_influence(x) as f64;
        let g64 = peer_influence(x as f64);
        prop_assert!((g32 - g64).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn stability_dichotomy_on_random_graphs(net in arb_connected(51), seed in any::<u64>()) {
        let k1 = spectral_radius::<f64>(&net).unwrap().kappa1;
        let x0: Vec<f64> = random_initial_activity(&net, 1e-6, 0.1, seed).unwrap();

        let decay = euler_integrate(&net, &x0, DynamicsParams::new(1.05 * k1), 200).unwrap();
        prop_assert!(*decay.aggregate.last().unwrap() < 1e-6);

        let grow = euler_integrate(&net, &x0, DynamicsParams::new(0.95 * k1), 200).unwrap();
        prop_assert!(*grow.aggregate.last().unwrap() > 1e-3);
    }

    #[test]
    fn active_fixed_point_is_positive_and_stationary(net in arb_connected(30), seed in any::<u64>()) {
        let k1 = spectral_radius::<f64>(&net).unwrap().kappa1;
        let x0: Vec<f64> = random_initial_activity(&net, 1e-6, 0.1, seed).unwrap();
        let x = find_active_fixed_point(&net, 0.8 * k1, &x0, 1e-8, 1e4).unwrap();
        prop_assert!(x.iter().all(|&v| v > 0.0));
        let residual = derivative(&net, &x, 0.8 * k1).unwrap();
        prop_assert!(residual.iter().all(|d| d.abs() < 1e-8));
        prop_assert!(derivative(&net, &vec![0.0; net.node_count()], 0.8 * k1).unwrap().iter().all(|&d| d == 0.0));
    }
}
