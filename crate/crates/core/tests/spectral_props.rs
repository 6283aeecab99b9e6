use approx::assert_relative_eq;
use collab_activity::spectral::{full_spectrum_small, largest_eigenvalue, spectral_radius, SpectralError};
use collab_activity::synth::karate_club;
use collab_activity::{CollaborationNetwork, UserId};
use proptest::prelude::*;

fn network(n: usize, pairs: Vec<(usize, usize)>) -> CollaborationNetwork {
    let users = (0..n).map(|i| UserId::new(format!("u{i}"))).collect();
    CollaborationNetwork::from_index_pairs(users, pairs).unwrap()
}

fn arb_network(max_n: usize) -> impl Strategy<Value = CollaborationNetwork> {
    (2..max_n)
        .prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n), 1..3 * n)))
        .prop_map(|(n, pairs)| network(n, pairs))
}

#[test]
fn karate_matches_the_dense_route() {
    let net = karate_club();
    let power = spectral_radius::<f64>(&net).unwrap().kappa1;
    let dense: Vec<f64> = full_spectrum_small(&net, 100).unwrap();
    assert_relative_eq!(power, dense[0], epsilon = 1e-8);
    assert_relative_eq!(power, 6.725697727631729, epsilon = 1e-8);
}

#[test]
fn complete_and_bipartite_graphs() {
    // K_n has κ₁ = n − 1
    let n = 9;
    let complete = network(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect());
    assert_relative_eq!(spectral_radius::<f64>(&complete).unwrap().kappa1, 8.0, epsilon = 1e-8);
    // K_{3,12} has κ₁ = 6; plain power iteration oscillates on it
    let star = network(15, (0..3).flat_map(|i| (3..15).map(move |j| (i, j))).collect());
    assert_relative_eq!(spectral_radius::<f64>(&star).unwrap().kappa1, 6.0, epsilon = 1e-8);
}

#[test]
fn edgeless_and_empty_networks() {
    let lonely = network(4, vec![]);
    assert_eq!(spectral_radius::<f64>(&lonely).unwrap().kappa1, 0.0);
    let empty = network(0, vec![]);
    assert!(matches!(
        spectral_radius::<f64>(&empty),
        Err(SpectralError::EmptyNetwork)
    ));
    assert!(matches!(
        largest_eigenvalue::<f64>(&karate_club(), 0.0, 10),
        Err(SpectralError::InvalidTolerance(_))
    ));
}

#[test]
fn dense_route_refuses_large_networks() {
    let net = network(50, vec![(0, 1)]);
    assert!(matches!(
        full_spectrum_small::<f64>(&net, 10),
        Err(SpectralError::TooLarge { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn power_iteration_agrees_with_dense(net in arb_network(60)) {
        let power = spectral_radius::<f64>(&net).unwrap().kappa1;
        let dense: Vec<f64> = full_spectrum_small(&net, 2_000).unwrap();
        prop_assert!((power - dense[0]).abs() <= 1e-6, "{} vs {}", power, dense[0]);
    }

    #[test]
    fn spectrum_has_zero_trace_and_bounded_radius(net in arb_network(40)) {
        let dense: Vec<f64> = full_spectrum_small(&net, 2_000).unwrap();
        let trace: f64 = dense.iter().sum();
        prop_assert!(trace.abs() <= 1e-8 * net.node_count() as f64);
        // largest eigenvalue dominates every other in magnitude (Perron–Frobenius)
        prop_assert!(dense.iter().all(|v| v.abs() <= dense[0] + 1e-9));
        let max_degree = net.degrees().into_iter().max().unwrap() as f64;
        let mean_degree = 2.0 * net.edge_count() as f64 / net.node_count() as f64;
        prop_assert!(dense[0] <= max_degree + 1e-9 && dense[0] + 1e-9 >= mean_degree);
    }

    #[test]
    fn adding_an_edge_never_lowers_kappa(net in arb_network(40), a in any::<prop::sample::Index>(), b in any::<prop::sample::Index>()) {
        let n = net.node_count();
        let (a, b) = (a.index(n), b.index(n));
        prop_assume!(a != b);
        let mut pairs = net.edges().to_vec();
        pairs.push((a, b));
        let bigger = CollaborationNetwork::from_index_pairs(net.users().to_vec(), pairs).unwrap();
        let before = spectral_radius::<f64>(&net).unwrap().kappa1;
        let after = spectral_radius::<f64>(&bigger).unwrap().kappa1;
        prop_assert!(after + 1e-9 >= before);
    }
}
