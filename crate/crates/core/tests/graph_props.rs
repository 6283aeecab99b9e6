use collab_activity::graph::{build_qa_network, build_wiki_network, read_edge_list, write_edge_list, NetworkSummary};
use collab_activity::{CollaborationNetwork, ContributionEvent, UserId};
use proptest::prelude::*;

fn arb_pairs(max_n: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (1..max_n).prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n), 0..4 * n)))
}

fn network(n: usize, pairs: Vec<(usize, usize)>) -> CollaborationNetwork {
    let users = (0..n).map(|i| UserId::new(format!("u{i}"))).collect();
    CollaborationNetwork::from_index_pairs(users, pairs).unwrap()
}

/// Events over `users` authors where each reply points at an earlier artifact.
fn arb_log() -> impl Strategy<Value = Vec<ContributionEvent>> {
    (
        1usize..8,
        prop::collection::vec((0usize..8, any::<bool>(), any::<prop::sample::Index>()), 1..40),
    )
        .prop_map(|(users, raw)| {
            let mut events = Vec::new();
            for (e, (u, is_reply, parent)) in raw.into_iter().enumerate() {
                let user = format!("u{}", u % users);
                let own = format!("a{e}");
                if is_reply && e > 0 {
                    let p = format!("a{}", parent.index(e));
                    events.push(ContributionEvent::reply(e as i64, &user, &own, &p));
                } else {
                    events.push(ContributionEvent::post(e as i64, &user, &own));
                }
            }
            events
        })
}

proptest! {
    #[test]
    fn adjacency_is_symmetric((n, pairs) in arb_pairs(30), seed in prop::collection::vec(-5.0f64..5.0, 30)) {
        let net = network(n, pairs);
        for &(a, b) in net.edges() {
            prop_assert!(a < b);
            prop_assert!(net.has_edge(a, b) && net.has_edge(b, a));
        }
        // ⟨Au, v⟩ = ⟨u, Av⟩
        let u = &seed[..n];
        let v: Vec<f64> = u.iter().rev().map(|x| x * 0.5 + 1.0).collect();
        let lhs: f64 = net.apply_adjacency(u).iter().zip(&v).map(|(a, b)| a * b).sum();
        let rhs: f64 = u.iter().zip(net.apply_adjacency(&v)).map(|(a, b)| a * b).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn adjacency_is_linear((n, pairs) in arb_pairs(25), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let net = network(n, pairs);
        let u: Vec<f64> = (0..n).map(|i| i as f64 * 0.3 - 1.0).collect();
        let v: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let combo: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let lhs = net.apply_adjacency(&combo);
        let (au, av) = (net.apply_adjacency(&u), net.apply_adjacency(&v));
        for i in 0..n {
            prop_assert!((lhs[i] - (a * au[i] + b * av[i])).abs() <= 1e-9);
        }
    }

    #[test]
    fn degrees_sum_to_twice_edges((n, pairs) in arb_pairs(40)) {
        let net = network(n, pairs);
        prop_assert_eq!(net.degrees().iter().sum::<usize>(), 2 * net.edge_count());
        prop_assert_eq!(net.isolated_count(), net.degrees().iter().filter(|&&d| d == 0).count());
    }

    #[test]
    fn built_networks_have_no_self_loops(events in arb_log()) {
        for net in [build_qa_network(&events).unwrap(), build_wiki_network(&events).unwrap()] {
            prop_assert!(net.edges().iter().all(|&(a, b)| a != b));
            let mut sorted = net.edges().to_vec();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), net.edge_count());
            // every author appears as a node
            for e in &events {
                prop_assert!(net.index_of(e.user.as_str()).is_some());
            }
        }
    }

    #[test]
    fn qa_network_ignores_event_order(events in arb_log(), perm_seed in any::<u64>()) {
        let mut shuffled = events.clone();
        // deterministic Fisher–Yates driven by the proptest seed
        let mut s = perm_seed | 1;
        for i in (1..shuffled.len()).rev() {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            shuffled.swap(i, (s % (i as u64 + 1)) as usize);
        }
        let a = build_qa_network(&events).unwrap();
        let b = build_qa_network(&shuffled).unwrap();
        prop_assert_eq!(a.named_edges(), b.named_edges());
        prop_assert_eq!(a.node_count(), b.node_count());
    }

    #[test]
    fn edge_list_round_trips((n, pairs) in arb_pairs(20)) {
        let net = network(n, pairs);
        let mut buf = Vec::new();
        write_edge_list(&net, &mut buf).unwrap();
        let back = read_edge_list(buf.as_slice(), Some(&NetworkSummary::of(&net))).unwrap();
        prop_assert_eq!(back.named_edges(), net.named_edges());
        prop_assert_eq!(back.node_count(), net.node_count());
    }
}
